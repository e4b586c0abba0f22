#include "dios/signals.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "dios/errors.hpp"
#include "dios/linalg.hpp"

namespace dios {

// -------------------------------------------------------------- HistoryView

std::span<const double> HistoryView::at_lag(double s) const {
  if (s < -theta_ - 1e-9 || s > 1e-9)
    throw ConfigMismatch("history lag outside [-theta, 0]");
  double idx = (s + theta_) / step();
  long i = std::lround(idx);
  if (i < 0) i = 0;
  if (i >= count_) i = count_ - 1;
  return sample(int(i));
}

double HistoryView::sup_norm() const {
  double best = 0;
  for (int i = 0; i < count_; ++i) {
    double v = euclid_norm(sample(i));
    if (v > best) best = v;
  }
  return best;
}

// ----------------------------------------------------------- HistorySegment

HistorySegment::HistorySegment(double theta, int steps, int dim,
                               std::vector<double> samples)
    : theta_(theta), steps_(steps), dim_(dim), data_(std::move(samples)) {
  if (!(theta > 0) || steps < 1 || dim < 1)
    throw ConfigMismatch("HistorySegment: need theta > 0, steps >= 1, dim >= 1");
  if (data_.size() != size_t(steps + 1) * dim)
    throw ConfigMismatch("HistorySegment: sample count must be steps+1");
  for (double v : data_)
    if (!std::isfinite(v)) throw ConfigMismatch("HistorySegment: non-finite sample");
}

HistorySegment HistorySegment::constant(double theta, int steps,
                                        std::vector<double> value) {
  int dim = int(value.size());
  std::vector<double> data;
  data.reserve(size_t(steps + 1) * dim);
  for (int i = 0; i <= steps; ++i)
    data.insert(data.end(), value.begin(), value.end());
  return HistorySegment(theta, steps, dim, std::move(data));
}

HistorySegment HistorySegment::from_function(
    double theta, int steps, int dim,
    const std::function<void(double, std::span<double>)>& fn) {
  std::vector<double> data(size_t(steps + 1) * dim);
  for (int i = 0; i <= steps; ++i) {
    double s = -theta + theta * i / steps;
    fn(s, {data.data() + size_t(i) * dim, size_t(dim)});
  }
  return HistorySegment(theta, steps, dim, std::move(data));
}

std::span<const double> HistorySegment::sample(int i) const {
  return {data_.data() + size_t(i) * dim_, size_t(dim_)};
}

std::span<double> HistorySegment::mutable_sample(int i) {
  return {data_.data() + size_t(i) * dim_, size_t(dim_)};
}

nlohmann::json HistorySegment::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i <= steps_; ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (double v : sample(i)) row.push_back(v);
    rows.push_back(std::move(row));
  }
  return {{"theta", theta_}, {"samples", rows}};
}

// -------------------------------------------------------------- InputSignal

InputSignal::InputSignal(std::vector<double> times,
                         std::vector<std::vector<double>> levels, double horizon)
    : times_(std::move(times)), levels_(std::move(levels)), horizon_(horizon) {
  if (times_.empty() || times_.size() != levels_.size())
    throw ConfigMismatch("InputSignal: breakpoints and levels must align");
  if (times_.front() != 0.0)
    throw ConfigMismatch("InputSignal: first breakpoint must be 0");
  for (size_t i = 1; i < times_.size(); ++i)
    if (!(times_[i] > times_[i - 1]))
      throw ConfigMismatch("InputSignal: breakpoints must increase");
  size_t dim = levels_.front().size();
  for (const auto& lv : levels_)
    if (lv.size() != dim)
      throw ConfigMismatch("InputSignal: inconsistent level dimension");
}

InputSignal InputSignal::constant(std::vector<double> level, double horizon) {
  return InputSignal({0.0}, {std::move(level)}, horizon);
}

InputSignal InputSignal::zero(int dim, double horizon) {
  return constant(std::vector<double>(dim, 0.0), horizon);
}

std::span<const double> InputSignal::value(double t) const {
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  size_t idx = it == times_.begin() ? 0 : size_t(it - times_.begin()) - 1;
  return {levels_[idx].data(), levels_[idx].size()};
}

double InputSignal::sup_norm(double a, double b) const {
  if (!(b > a)) return 0.0;
  double best = 0;
  for (size_t i = 0; i < times_.size(); ++i) {
    double seg_lo = times_[i];
    double seg_hi = (i + 1 < times_.size())
                        ? times_[i + 1]
                        : std::numeric_limits<double>::infinity();
    if (seg_hi <= a || seg_lo >= b) continue;
    best = std::max(best, euclid_norm(levels_[i]));
  }
  return best;
}

nlohmann::json InputSignal::to_json() const {
  nlohmann::json pieces = nlohmann::json::array();
  for (size_t i = 0; i < times_.size(); ++i)
    pieces.push_back({times_[i], levels_[i]});
  return {{"piecewise", pieces}};
}

DisturbanceSignal make_disturbance(InputSignal signal) {
  for (const auto& lv : signal.levels())
    if (euclid_norm(lv) > 1.0 + 1e-12)
      throw ConfigMismatch("disturbance level outside the closed unit ball");
  return signal;
}

InputSignal concat_input(const InputSignal& u, double tau, const InputSignal& v) {
  if (tau < 0) throw ConfigMismatch("concat_input: tau must be nonnegative");
  if (u.dim() != v.dim()) throw ConfigMismatch("concat_input: dimension mismatch");
  std::vector<double> times;
  std::vector<std::vector<double>> levels;
  if (tau > 0) {
    const auto& ut = u.breakpoints();
    for (size_t i = 0; i < ut.size() && ut[i] < tau; ++i) {
      times.push_back(ut[i]);
      levels.push_back(u.levels()[i]);
    }
  }
  const auto& vt = v.breakpoints();
  for (size_t i = 0; i < vt.size(); ++i) {
    double t = tau + vt[i];
    if (!times.empty() && t <= times.back()) {
      if (t == times.back()) {
        levels.back() = v.levels()[i];
        continue;
      }
      throw ConfigMismatch("concat_input: breakpoint collision");
    }
    times.push_back(t);
    levels.push_back(v.levels()[i]);
  }
  if (times.empty() || times.front() != 0.0) {
    times.insert(times.begin(), 0.0);
    levels.insert(levels.begin(), v.levels().front());
  }
  return InputSignal(std::move(times), std::move(levels),
                     std::max(u.horizon(), tau + v.horizon()));
}

HistorySegment resample_history(const HistorySegment& xi, int new_steps) {
  if (new_steps == xi.steps()) return xi;
  int dim = xi.dim();
  return HistorySegment::from_function(
      xi.theta(), new_steps, dim, [&](double s, std::span<double> out) {
        double pos = (s + xi.theta()) / xi.theta() * xi.steps();
        int lo = std::clamp(int(pos), 0, xi.steps() - 1);
        double w = pos - lo;
        auto a = xi.sample(lo), b = xi.sample(lo + 1);
        for (int c = 0; c < dim; ++c) out[c] = (1 - w) * a[c] + w * b[c];
      });
}

// --------------------------------------------------------------- Trajectory

Trajectory::Trajectory(double theta, int steps_per_delay, int n, int p,
                       long steps, bool outputs_on_history)
    : theta_(theta), steps_per_delay_(steps_per_delay), n_(n), p_(p),
      steps_(steps), outputs_on_history_(outputs_on_history) {
  states_.assign(size_t(row_count()) * n_, 0.0);
  derivs_.assign(size_t(row_count()) * n_, 0.0);
  outputs_.assign(size_t(row_count()) * p_, 0.0);
}

double Trajectory::euclid_norm_row(std::span<const double> v) {
  return euclid_norm(v);
}

long Trajectory::row_of_time(double t) const {
  long k = snap_to_grid(t, dt());
  long row = k + steps_per_delay_;
  if (row < 0 || row >= row_count())
    throw ConfigMismatch("time outside trajectory range");
  return row;
}

std::span<const double> Trajectory::state_row(long row) const {
  return {states_.data() + size_t(row) * n_, size_t(n_)};
}
std::span<double> Trajectory::mutable_state_row(long row) {
  return {states_.data() + size_t(row) * n_, size_t(n_)};
}
std::span<const double> Trajectory::output_row(long row) const {
  if (!output_valid(row))
    throw NoDelayFreeOutput("output undefined on the initial interval");
  return {outputs_.data() + size_t(row) * p_, size_t(p_)};
}
std::span<double> Trajectory::mutable_output_row(long row) {
  return {outputs_.data() + size_t(row) * p_, size_t(p_)};
}
std::span<const double> Trajectory::derivative_row(long row) const {
  return {derivs_.data() + size_t(row) * n_, size_t(n_)};
}
std::span<double> Trajectory::mutable_derivative_row(long row) {
  return {derivs_.data() + size_t(row) * n_, size_t(n_)};
}

HistoryView Trajectory::window_at_row(long row) const {
  if (row < steps_per_delay_ || row >= row_count())
    throw ConfigMismatch("window row out of range");
  return HistoryView(states_.data() + size_t(row - steps_per_delay_) * n_, n_,
                     steps_per_delay_ + 1, theta_);
}

HistorySegment Trajectory::history_at(double t) const {
  long row = row_of_time(t);
  if (row < steps_per_delay_)
    throw ConfigMismatch("history window requires t >= 0");
  auto w = window_at_row(row);
  std::vector<double> data;
  data.reserve(size_t(w.count()) * n_);
  for (int i = 0; i < w.count(); ++i) {
    auto s = w.sample(i);
    data.insert(data.end(), s.begin(), s.end());
  }
  return HistorySegment(theta_, steps_per_delay_, n_, std::move(data));
}

double Trajectory::output_history_norm(double t) const {
  if (!outputs_on_history_)
    throw NoDelayFreeOutput("Y(t) requires a delay-free output map");
  long row = row_of_time(t);
  if (row < steps_per_delay_)
    throw ConfigMismatch("Y(t) requires t >= 0");
  double best = 0;
  for (long r = row - steps_per_delay_; r <= row; ++r)
    best = std::max(best, output_norm(r));
  return best;
}

double trailing_square_integral(const Trajectory& traj, int component,
                                long row) {
  const int N = traj.steps_per_delay();
  if (row < N || row >= traj.row_count())
    throw ConfigMismatch("window integral requires a full delay window");
  const double h = traj.dt();
  double acc = 0;
  for (long r = row - N; r < row; ++r) {
    double a = traj.state_row(r)[component];
    double b = traj.state_row(r + 1)[component];
    double m;
    if (r + 1 <= N) {
      m = 0.5 * (a + b);
    } else {
      double da = traj.derivative_row(r)[component];
      double db = traj.derivative_row(r + 1)[component];
      m = 0.5 * (a + b) + 0.125 * h * (da - db);
    }
    acc += h * (a * a + 4 * m * m + b * b) / 6.0;
  }
  return acc;
}

long snap_to_grid(double t, double dt) {
  double k = t / dt;
  long kk = std::lround(k);
  if (std::abs(t - kk * dt) > 1e-9 * std::max(1.0, std::abs(t)))
    throw ConfigMismatch("time " + std::to_string(t) +
                         " is not aligned to the grid step " + std::to_string(dt));
  return kk;
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out << "t";
  for (int i = 1; i <= traj.state_dim(); ++i) out << ",x_" << i;
  for (int i = 1; i <= traj.output_dim(); ++i) out << ",y_" << i;
  if (traj.outputs_on_history()) out << ",Y";
  out << "\n";
  char buf[32];
  auto fmt = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
  };
  for (long row = 0; row < traj.row_count(); ++row) {
    fmt(traj.time_of_row(row));
    for (double v : traj.state_row(row)) {
      out << ",";
      fmt(v);
    }
    if (traj.output_valid(row)) {
      for (double v : traj.output_row(row)) {
        out << ",";
        fmt(v);
      }
    } else {
      for (int i = 0; i < traj.output_dim(); ++i) out << ",";
    }
    if (traj.outputs_on_history()) {
      out << ",";
      double t = traj.time_of_row(row);
      if (t >= 0) fmt(traj.output_history_norm(t));
    }
    out << "\n";
  }
}

// ----------------------------------------------------------------- literals

namespace {

std::vector<double> to_vector(const nlohmann::json& j, const char* what) {
  if (!j.is_array()) throw ConfigError(std::string(what) + ": expected an array");
  std::vector<double> v;
  for (const auto& e : j) {
    if (!e.is_number()) throw ConfigError(std::string(what) + ": expected numbers");
    v.push_back(e.get<double>());
  }
  return v;
}

}  // namespace

HistorySegment parse_history_literal(const nlohmann::json& spec, double theta,
                                     int steps, int dim) {
  if (spec.contains("const")) {
    auto v = to_vector(spec["const"], "history const");
    if (int(v.size()) != dim)
      throw ConfigError("history const: expected " + std::to_string(dim) +
                        " components");
    return HistorySegment::constant(theta, steps, std::move(v));
  }
  if (spec.contains("samples")) {
    const auto& rows = spec["samples"];
    if (!rows.is_array() || rows.size() != size_t(steps + 1))
      throw ConfigError("history samples: expected " + std::to_string(steps + 1) +
                        " rows (grid = theta/steps)");
    std::vector<double> data;
    for (const auto& row : rows) {
      auto v = to_vector(row, "history sample");
      if (int(v.size()) != dim)
        throw ConfigError("history sample: wrong dimension");
      data.insert(data.end(), v.begin(), v.end());
    }
    return HistorySegment(theta, steps, dim, std::move(data));
  }
  if (spec.contains("piecewise")) {
    // knot list [[s, [..]], ...] on [-theta, 0], linearly interpolated
    const auto& knots = spec["piecewise"];
    if (!knots.is_array() || knots.size() < 2)
      throw ConfigError("history piecewise: need at least two knots");
    std::vector<double> ss;
    std::vector<std::vector<double>> vs;
    for (const auto& k : knots) {
      if (!k.is_array() || k.size() != 2)
        throw ConfigError("history piecewise: knots are [s, [components]]");
      ss.push_back(k[0].get<double>());
      vs.push_back(to_vector(k[1], "history knot"));
      if (int(vs.back().size()) != dim)
        throw ConfigError("history knot: wrong dimension");
    }
    return HistorySegment::from_function(
        theta, steps, dim, [&](double s, std::span<double> out) {
          size_t hi = 0;
          while (hi + 1 < ss.size() && ss[hi + 1] < s) ++hi;
          size_t lo = hi;
          if (hi + 1 < ss.size()) hi = hi + 1;
          double w = (ss[hi] == ss[lo]) ? 0
                                        : (s - ss[lo]) / (ss[hi] - ss[lo]);
          w = std::clamp(w, 0.0, 1.0);
          for (int c = 0; c < int(out.size()); ++c)
            out[c] = (1 - w) * vs[lo][c] + w * vs[hi][c];
        });
  }
  throw ConfigError("history literal: expected const, samples, or piecewise");
}

InputSignal parse_input_literal(const nlohmann::json& spec, int dim,
                                double horizon, double dt) {
  if (spec.contains("const")) {
    auto v = to_vector(spec["const"], "input const");
    if (int(v.size()) != dim)
      throw ConfigError("input const: expected " + std::to_string(dim) +
                        " components");
    return InputSignal::constant(std::move(v), horizon);
  }
  if (spec.contains("piecewise")) {
    const auto& pieces = spec["piecewise"];
    if (!pieces.is_array() || pieces.empty())
      throw ConfigError("input piecewise: need at least one [t, level] pair");
    std::vector<double> times;
    std::vector<std::vector<double>> levels;
    for (const auto& p : pieces) {
      if (!p.is_array() || p.size() != 2)
        throw ConfigError("input piecewise: entries are [t, [level]]");
      double t = p[0].get<double>();
      // discontinuities snap to the integration grid
      if (dt > 0) t = std::round(t / dt) * dt;
      times.push_back(t);
      levels.push_back(to_vector(p[1], "input level"));
      if (int(levels.back().size()) != dim)
        throw ConfigError("input level: wrong dimension");
    }
    return InputSignal(std::move(times), std::move(levels), horizon);
  }
  throw ConfigError("input literal: expected const or piecewise");
}

}  // namespace dios
