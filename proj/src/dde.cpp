#include "dios/dde.hpp"

#include <algorithm>
#include <cmath>

#include "dios/errors.hpp"
#include "dios/linalg.hpp"

namespace dios {

namespace {

struct Stepper {
  const SystemModel& model;
  Trajectory& traj;
  const int n, N;
  const double dt, guard;
  std::vector<double> mid;           // interpolated half-step window
  std::vector<double> k1, k2, k3, k4, head;

  Stepper(const SystemModel& m, Trajectory& t, double blowup)
      : model(m), traj(t), n(m.n), N(t.steps_per_delay()), dt(t.dt()),
        guard(blowup), mid(size_t(N + 1) * n), k1(n), k2(n), k3(n), k4(n),
        head(n) {}

  // Midpoint of the segment between rows r0 and r0+1: cubic Hermite on the
  // computed part, chord average on the initial data. Histories are linear
  // between samples by definition, and the solution's derivative jumps at
  // t = 0, so initial segments never borrow computed slopes.
  void fill_midpoints(long base_row) {
    for (int j = 0; j < N; ++j) {
      long r0 = base_row - N + j;
      auto x0 = traj.state_row(r0), x1 = traj.state_row(r0 + 1);
      double* out = mid.data() + size_t(j) * n;
      if (r0 + 1 <= N) {
        for (int c = 0; c < n; ++c) out[c] = 0.5 * (x0[c] + x1[c]);
      } else {
        auto d0 = traj.derivative_row(r0), d1 = traj.derivative_row(r0 + 1);
        for (int c = 0; c < n; ++c)
          out[c] = 0.5 * (x0[c] + x1[c]) + 0.125 * dt * (d0[c] - d1[c]);
      }
    }
  }

  // One RK4 step from base_row with frozen input u; writes x_{k+1} into
  // `x_next` (size n) and the base derivative into the trajectory. The
  // half-step window is interpolated after k1 lands so the newest segment
  // carries the current slope.
  void step(long base_row, std::span<const double> u, std::span<double> x_next) {
    const double theta = traj.theta();
    auto xb = traj.state_row(base_row);

    HistoryView base(traj.state_row(base_row - N).data(), n, N + 1, theta);
    model.f(base, u, k1);
    std::copy(k1.begin(), k1.end(), traj.mutable_derivative_row(base_row).begin());
    fill_midpoints(base_row);

    for (int c = 0; c < n; ++c) head[c] = xb[c] + 0.5 * dt * k1[c];
    HistoryView half(mid.data(), n, N + 1, theta, head.data());
    model.f(half, u, k2);

    for (int c = 0; c < n; ++c) head[c] = xb[c] + 0.5 * dt * k2[c];
    model.f(half, u, k3);

    for (int c = 0; c < n; ++c) head[c] = xb[c] + dt * k3[c];
    HistoryView full(traj.state_row(base_row - N + 1).data(), n, N + 1, theta,
                     head.data());
    model.f(full, u, k4);

    for (int c = 0; c < n; ++c)
      x_next[c] = xb[c] + dt / 6.0 * (k1[c] + 2 * k2[c] + 2 * k3[c] + k4[c]);
  }

  // left-limit slope at the final node, needed by window quadrature helpers
  void fill_final_derivative(std::span<const double> u) {
    long last = traj.row_count() - 1;
    HistoryView endw(traj.state_row(last - N).data(), n, N + 1, traj.theta());
    model.f(endw, u, k1);
    std::copy(k1.begin(), k1.end(), traj.mutable_derivative_row(last).begin());
  }

  // |y| at the step end for a candidate next state (greedy adversaries)
  double end_output_norm(long base_row, std::span<const double> x_next) {
    HistoryView endw(traj.state_row(base_row - N + 1).data(), n, N + 1,
                     traj.theta(), x_next.data());
    std::vector<double> y(model.p);
    model.h(endw, y);
    return euclid_norm(y);
  }

  void check_blowup(std::span<const double> x, double t) const {
    double nrm = euclid_norm(x);
    if (!(nrm <= guard)) throw BlowUp(t);
  }
};

Trajectory prepare(const SystemModel& model, const HistorySegment& xi,
                   const SimConfig& cfg, long& steps_out) {
  if (xi.dim() != model.n)
    throw ConfigMismatch("initial history dimension does not match the model");
  if (std::abs(xi.theta() - model.theta) > 1e-12 * std::max(1.0, model.theta))
    throw ConfigMismatch("initial history delay does not match the model");
  if (xi.steps() != cfg.steps_per_delay)
    throw ConfigMismatch("initial history grid does not match steps_per_delay");
  if (!(cfg.blowup_guard > 0)) throw ConfigMismatch("blow-up guard must be positive");
  double dt = model.theta / cfg.steps_per_delay;
  steps_out = snap_to_grid(cfg.horizon, dt);
  if (steps_out < 0) throw ConfigMismatch("horizon must be nonnegative");

  Trajectory traj(model.theta, cfg.steps_per_delay, model.n, model.p, steps_out,
                  model.delay_free_output());
  const int N = cfg.steps_per_delay;
  for (int i = 0; i <= N; ++i) {
    auto src = xi.sample(i);
    std::copy(src.begin(), src.end(), traj.mutable_state_row(i).begin());
  }
  return traj;
}

void finalize_outputs(const SystemModel& model, Trajectory& traj) {
  const int N = traj.steps_per_delay();
  if (model.delay_free_output()) {
    for (long row = 0; row < N; ++row)
      model.h0(traj.state_row(row), traj.mutable_output_row(row));
  }
  for (long row = N; row < traj.row_count(); ++row)
    model.h(traj.window_at_row(row), traj.mutable_output_row(row));
}

Trajectory run(const SystemModel& model, const HistorySegment& xi,
               const std::function<std::vector<double>(double, const HistoryView&)>&
                   choose,
               const SimConfig& cfg) {
  long steps = 0;
  Trajectory traj = prepare(model, xi, cfg, steps);
  Stepper st(model, traj, cfg.blowup_guard);
  const int N = cfg.steps_per_delay;
  std::vector<double> x_next(model.n), u_last;
  for (long k = 0; k < steps; ++k) {
    long base = N + k;
    double t = k * traj.dt();
    auto u = choose(t, HistoryView(traj.state_row(base - N).data(), model.n,
                                   N + 1, model.theta));
    st.step(base, u, x_next);
    st.check_blowup(x_next, t + traj.dt());
    std::copy(x_next.begin(), x_next.end(),
              traj.mutable_state_row(base + 1).begin());
    u_last = std::move(u);
  }
  if (steps > 0) st.fill_final_derivative(u_last);
  finalize_outputs(model, traj);
  return traj;
}

}  // namespace

Trajectory simulate(const SystemModel& model, const HistorySegment& xi,
                    const InputSignal& u, const SimConfig& cfg) {
  if (u.dim() != model.m)
    throw ConfigMismatch("input dimension does not match the model");
  double dt = model.theta / cfg.steps_per_delay;
  // piecewise-constant inputs sampled at the stage midpoint of each step
  return run(model, xi,
             [&u, dt](double t, const HistoryView&) {
               auto v = u.value(t + 0.5 * dt);
               return std::vector<double>(v.begin(), v.end());
             },
             cfg);
}

Trajectory simulate_with_feedback(
    const SystemModel& model, const HistorySegment& xi,
    const std::function<std::vector<double>(double, const HistoryView&)>& choose,
    const SimConfig& cfg) {
  return run(model, xi, choose, cfg);
}

Trajectory simulate_greedy(
    const SystemModel& model, const HistorySegment& xi,
    const std::vector<std::vector<double>>& candidates,
    const std::function<std::vector<double>(double, const HistoryView&,
                                            std::span<const double>)>& shape,
    const SimConfig& cfg) {
  if (candidates.empty())
    throw ConfigError("greedy simulation needs at least one candidate");
  long steps = 0;
  Trajectory traj = prepare(model, xi, cfg, steps);
  Stepper st(model, traj, cfg.blowup_guard);
  const int N = cfg.steps_per_delay;
  std::vector<double> x_next(model.n), u_best;
  for (long k = 0; k < steps; ++k) {
    long base = N + k;
    double t = k * traj.dt();
    HistoryView base_view(traj.state_row(base - N).data(), model.n, N + 1,
                          model.theta);
    double best = -1.0;
    for (const auto& cand : candidates) {
      auto u = shape(t, base_view, cand);
      st.step(base, u, x_next);
      double score = st.end_output_norm(base, x_next);
      if (score > best) {
        best = score;
        u_best = std::move(u);
      }
    }
    // replay the winner so the stored base derivative matches the applied input
    st.step(base, u_best, x_next);
    st.check_blowup(x_next, t + traj.dt());
    std::copy(x_next.begin(), x_next.end(),
              traj.mutable_state_row(base + 1).begin());
  }
  if (steps > 0) st.fill_final_derivative(u_best);
  finalize_outputs(model, traj);
  return traj;
}

std::vector<double> output_of(const SystemModel& model, const HistorySegment& xi) {
  std::vector<double> y(model.p);
  model.h(xi.view(), y);
  return y;
}

double output_norm_of(const SystemModel& model, const HistorySegment& xi) {
  return euclid_norm(output_of(model, xi));
}

double output_history_norm_of(const SystemModel& model,
                              const HistorySegment& xi) {
  if (!model.delay_free_output())
    throw NoDelayFreeOutput("H(xi) requires a delay-free output map");
  std::vector<double> y(model.p);
  double best = 0;
  for (int i = 0; i <= xi.steps(); ++i) {
    model.h0(xi.sample(i), y);
    best = std::max(best, euclid_norm(y));
  }
  return best;
}

}  // namespace dios
