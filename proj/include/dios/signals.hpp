#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace dios {

/// Non-owning window of uniformly gridded state samples covering one delay
/// interval. `head_override`, when set, replaces the newest sample; the
/// integrator uses it to splice Runge-Kutta stage states onto stored data
/// without copying the window.
class HistoryView {
 public:
  HistoryView(const double* data, int dim, int count, double theta,
              const double* head_override = nullptr)
      : data_(data), dim_(dim), count_(count), theta_(theta),
        head_(head_override) {}

  int dim() const { return dim_; }
  int count() const { return count_; }        // samples, oldest first
  double theta() const { return theta_; }
  double step() const { return theta_ / (count_ - 1); }

  std::span<const double> sample(int i) const {
    if (head_ && i == count_ - 1) return {head_, size_t(dim_)};
    return {data_ + size_t(i) * dim_, size_t(dim_)};
  }
  std::span<const double> head() const { return sample(count_ - 1); }       // s = 0
  std::span<const double> delayed() const { return sample(0); }             // s = -theta

  /// Sample at lag s in [-theta, 0], snapped to the grid.
  std::span<const double> at_lag(double s) const;

  double sup_norm() const;  // max Euclidean norm over the window

 private:
  const double* data_;
  int dim_, count_;
  double theta_;
  const double* head_;
};

/// Owning continuous state history xi : [-theta, 0] -> R^n stored as grid
/// samples with step theta/N. Immutable value type.
class HistorySegment {
 public:
  HistorySegment() = default;
  HistorySegment(double theta, int steps, int dim, std::vector<double> samples);

  static HistorySegment constant(double theta, int steps,
                                 std::vector<double> value);
  static HistorySegment from_function(
      double theta, int steps, int dim,
      const std::function<void(double, std::span<double>)>& fn);

  double theta() const { return theta_; }
  int steps() const { return steps_; }
  int dim() const { return dim_; }
  int sample_count() const { return steps_ + 1; }
  std::span<const double> sample(int i) const;
  std::span<double> mutable_sample(int i);
  double sup_norm() const { return view().sup_norm(); }
  HistoryView view() const {
    return HistoryView(data_.data(), dim_, steps_ + 1, theta_);
  }
  nlohmann::json to_json() const;

 private:
  double theta_ = 0;
  int steps_ = 0, dim_ = 0;
  std::vector<double> data_;
};

/// Piecewise-constant, right-continuous input u : [0, inf) -> R^m. The last
/// level persists past the final breakpoint, so sup norms over any window
/// are exact maxima of covering levels.
class InputSignal {
 public:
  InputSignal() = default;
  InputSignal(std::vector<double> times, std::vector<std::vector<double>> levels,
              double horizon);

  static InputSignal constant(std::vector<double> level, double horizon = 0);
  static InputSignal zero(int dim, double horizon = 0);

  int dim() const { return levels_.empty() ? 0 : int(levels_[0].size()); }
  double horizon() const { return horizon_; }
  std::span<const double> value(double t) const;
  /// Exact L-infinity norm (of Euclidean level norms) over [a, b).
  double sup_norm(double a = 0,
                  double b = std::numeric_limits<double>::infinity()) const;
  const std::vector<double>& breakpoints() const { return times_; }
  const std::vector<std::vector<double>>& levels() const { return levels_; }
  nlohmann::json to_json() const;

 private:
  std::vector<double> times_;                 // times_[0] == 0
  std::vector<std::vector<double>> levels_;   // levels_[i] on [t_i, t_{i+1})
  double horizon_ = 0;
};

/// Disturbances take values in the closed unit ball.
using DisturbanceSignal = InputSignal;
DisturbanceSignal make_disturbance(InputSignal signal);

/// u on [0,tau) concatenated with v time-shifted to start at tau.
InputSignal concat_input(const InputSignal& u, double tau, const InputSignal& v);

/// Linear resampling of a history onto a different grid resolution.
HistorySegment resample_history(const HistorySegment& xi, int new_steps);

/// Simulated solution on a delay-aligned grid. States run from t = -theta
/// (the initial history); history windows at grid times are exact stored
/// samples, never interpolated.
class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(double theta, int steps_per_delay, int n, int p, long steps,
             bool outputs_on_history);

  double theta() const { return theta_; }
  double dt() const { return theta_ / steps_per_delay_; }
  int steps_per_delay() const { return steps_per_delay_; }
  int state_dim() const { return n_; }
  int output_dim() const { return p_; }
  long step_count() const { return steps_; }
  double final_time() const { return steps_ * dt(); }
  bool outputs_on_history() const { return outputs_on_history_; }

  long row_count() const { return steps_per_delay_ + steps_ + 1; }
  double time_of_row(long row) const { return (row - steps_per_delay_) * dt(); }
  long row_of_time(double t) const;  // snaps within 1e-9, else throws

  std::span<const double> state_row(long row) const;
  std::span<double> mutable_state_row(long row);
  std::span<const double> output_row(long row) const;  // valid rows only
  std::span<double> mutable_output_row(long row);
  bool output_valid(long row) const {
    return outputs_on_history_ || row >= steps_per_delay_;
  }

  double state_norm(long row) const { return euclid_norm_row(state_row(row)); }
  double output_norm(long row) const { return euclid_norm_row(output_row(row)); }

  HistoryView window_at_row(long row) const;       // window ending at `row`
  HistorySegment history_at(double t) const;       // owning copy
  /// Y(t): max |y| over the delay window ending at t (needs history outputs).
  double output_history_norm(double t) const;

  std::span<const double> derivative_row(long row) const;
  std::span<double> mutable_derivative_row(long row);

 private:
  static double euclid_norm_row(std::span<const double> v);
  double theta_ = 0;
  int steps_per_delay_ = 0, n_ = 0, p_ = 0;
  long steps_ = 0;
  bool outputs_on_history_ = false;
  std::vector<double> states_, outputs_, derivs_;
};

/// Integral of x_c(s)^2 over the delay window ending at the given row,
/// composite Simpson per grid segment: midpoints come from the stored
/// Hermite data on the computed part and from chord averages on the initial
/// data (exact there for piecewise-linear histories).
double trailing_square_integral(const Trajectory& traj, int component, long row);

/// CSV export: t, x_1..x_n, y_1..y_p, Y (Y only for delay-free outputs).
void write_trajectory_csv(const Trajectory& traj, const std::string& path);

/// Grid snapping: t must lie within 1e-9 of a multiple of dt.
long snap_to_grid(double t, double dt);

// ---- history/input literals (CLI-facing) ----
//   {"const": [..]} | {"samples": [[..], ..]} | {"piecewise": [[t,[..]], ..]}
HistorySegment parse_history_literal(const nlohmann::json& spec, double theta,
                                     int steps, int dim);
InputSignal parse_input_literal(const nlohmann::json& spec, int dim,
                                double horizon, double dt);

}  // namespace dios
