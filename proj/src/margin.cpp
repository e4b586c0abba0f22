#include "dios/margin.hpp"

#include <algorithm>
#include <cmath>

#include "dios/errors.hpp"
#include "dios/linalg.hpp"
#include "dios/parallel.hpp"

namespace dios {

std::string to_string(RobustVariant v) {
  switch (v) {
    case RobustVariant::RGAOS: return "RGAOS";
    case RobustVariant::OL_RGAOS: return "OL-RGAOS";
    case RobustVariant::SI_RGAOS: return "SI-RGAOS";
  }
  return "?";
}

RobustVariant parse_variant(const std::string& name) {
  if (name == "RGAOS") return RobustVariant::RGAOS;
  if (name == "OL-RGAOS") return RobustVariant::OL_RGAOS;
  if (name == "SI-RGAOS") return RobustVariant::SI_RGAOS;
  throw ConfigError("unknown robust variant '" + name + "'");
}

ComparisonFunction normalize_margin_gain(const ComparisonFunction& sigma,
                                         const ComparisonFunction& gamma) {
  ComparisonFunction out = ComparisonFunction::pointwise_max(
      sigma, parse_comparison("id"));
  if (gamma.valid()) out = ComparisonFunction::pointwise_max(out, gamma);
  return ComparisonFunction::make("normalized[" + sigma.name() + "]",
                                  FunctionClass::Kinf,
                                  [out](double r) { return out(r); });
}

ClosedLoopModel build_closed_loop(const SystemModel& model,
                                  const ComparisonFunction& sigma) {
  ClosedLoopModel closed;
  closed.base = model;
  closed.sigma = sigma;
  closed.lambda = synthesize_margin(sigma);
  return closed;
}

namespace {

std::vector<double> feedback_input(const ClosedLoopModel& closed,
                                   std::span<const double> d,
                                   const HistoryView& window) {
  std::vector<double> y(closed.base.p);
  closed.base.h(window, y);
  double gain = closed.lambda(euclid_norm(y));
  std::vector<double> u(d.begin(), d.end());
  for (auto& x : u) x *= gain;
  return u;
}

std::vector<std::vector<double>> extreme_directions(int m) {
  std::vector<std::vector<double>> dirs{std::vector<double>(m, 0.0)};
  for (int i = 0; i < m; ++i)
    for (double sgn : {1.0, -1.0}) {
      std::vector<double> e(m, 0.0);
      e[i] = sgn;
      dirs.push_back(std::move(e));
    }
  return dirs;
}

}  // namespace

Trajectory simulate_closed_loop(const ClosedLoopModel& closed,
                                const HistorySegment& xi,
                                const DisturbanceSignal& d,
                                const SimConfig& cfg) {
  double dt = closed.base.theta / cfg.steps_per_delay;
  return simulate_with_feedback(
      closed.base, xi,
      [&](double t, const HistoryView& window) {
        return feedback_input(closed, d.value(t + 0.5 * dt), window);
      },
      cfg);
}

Trajectory simulate_closed_loop_greedy(const ClosedLoopModel& closed,
                                       const HistorySegment& xi,
                                       const SimConfig& cfg) {
  return simulate_greedy(
      closed.base, xi, extreme_directions(closed.base.m),
      [&](double, const HistoryView& window, std::span<const double> dir) {
        return feedback_input(closed, dir, window);
      },
      cfg);
}

namespace {

struct RunOut {
  double arg = 0;       // |xi| or |h(xi)| depending on the variant
  double xi_norm = 0;
  double h_norm = 0;
  bool zero_output = false;
  bool blowup = false;
  bool touched_zero_set = false;  // |y| reached 0: RK4 silently selects one
                                  // of the possibly non-unique continuations
  std::vector<double> t, y, x;  // subsampled traces
  double peak_y = 0;
  double robust_ol_slack = std::numeric_limits<double>::infinity();
  double lagrange_slack = std::numeric_limits<double>::infinity();
};

}  // namespace

nlohmann::json RobustReport::to_json() const {
  nlohmann::json w{{"member", witness.member},
                   {"t", witness.t},
                   {"value", witness.value},
                   {"bound", witness.bound},
                   {"xi", witness.xi},
                   {"u", witness.u}};
  return {{"model", model_id},
          {"variant", to_string(variant)},
          {"verdict", satisfied ? "satisfied-on-ensemble" : "violated"},
          {"fitted_beta",
           {{"amplitude", fitted_amplitude}, {"rate", fitted_rate}}},
          {"checks",
           {{"decay", decay_ok},
            {"lagrange", lagrange_ok},
            {"robust_ol", robust_ol_ok},
            {"invariance", invariance_ok},
            {"rfc", rfc_ok},
            {"milestones", milestones_ok}}},
          {"worst_robust_ol_slack", worst_robust_ol_slack},
          {"invariance_peak", invariance_peak},
          {"worst_rfc_slack", worst_rfc_slack},
          {"blowups", blowups},
          {"witness", w},
          {"adversaries", adversaries},
          {"ensemble", ensemble},
          {"extra", extra}};
}

RobustReport verify_robust(const ClosedLoopModel& closed, RobustVariant variant,
                           const AdversarySpec& adversaries,
                           const EnsembleSpec& ensemble, int threads) {
  if (threads <= 0) threads = default_thread_count();
  const SystemModel& model = closed.base;
  const int subsample = std::max(1, ensemble.steps_per_delay / 8);

  // adversary list: (class, index within class)
  struct Task { std::string cls; int member; int variant_index; };
  std::vector<Task> tasks;
  auto const_dirs = extreme_directions(model.m);
  for (const auto& cls : adversaries.classes) {
    if (cls != "bang-bang" && cls != "greedy" && cls != "const")
      throw ConfigError("unknown adversary class '" + cls + "'");
    int variants = cls == "const" ? int(const_dirs.size()) : 1;
    for (int mem = 0; mem < ensemble.count; ++mem)
      for (int v = 0; v < variants; ++v) tasks.push_back({cls, mem, v});
  }

  ComparisonFunction sigma = closed.sigma, lambda = closed.lambda;

  auto runs = parallel_map<RunOut>(int(tasks.size()), threads, [&](int ti) {
    const Task& task = tasks[ti];
    EnsembleSpec espec = ensemble;
    espec.radius_u = 1.0;  // disturbances live in the unit ball
    EnsembleMember mem = make_member(model, espec, task.member);
    SimConfig cfg{ensemble.horizon, ensemble.steps_per_delay,
                  ensemble.blowup_guard};

    RunOut out;
    out.xi_norm = mem.xi.sup_norm();
    out.h_norm = output_norm_of(model, mem.xi);
    out.zero_output = mem.zero_output;
    out.arg = variant == RobustVariant::RGAOS ? out.xi_norm : out.h_norm;

    Trajectory traj;
    try {
      if (task.cls == "bang-bang") {
        traj = simulate_closed_loop(closed, mem.xi, make_disturbance(mem.u), cfg);
      } else if (task.cls == "greedy") {
        traj = simulate_closed_loop_greedy(closed, mem.xi, cfg);
      } else {
        DisturbanceSignal d =
            InputSignal::constant(const_dirs[task.variant_index], cfg.horizon);
        traj = simulate_closed_loop(closed, mem.xi, d, cfg);
      }
    } catch (const BlowUp&) {
      out.blowup = true;
      return out;
    }

    const int N = ensemble.steps_per_delay;
    double half_h = 0.5 * out.h_norm;
    for (long row = N; row < traj.row_count(); row += subsample) {
      double t = traj.time_of_row(row);
      double ynorm = traj.output_norm(row);
      out.t.push_back(t);
      out.y.push_back(ynorm);
      out.x.push_back(traj.state_norm(row));
      out.peak_y = std::max(out.peak_y, ynorm);
      if (ynorm <= 1e-12 && !out.zero_output) out.touched_zero_set = true;
      out.robust_ol_slack =
          std::min(out.robust_ol_slack, half_h - sigma(lambda(ynorm)));
      if (variant == RobustVariant::OL_RGAOS)
        out.lagrange_slack =
            std::min(out.lagrange_slack, sigma(out.h_norm) - ynorm);
    }
    return out;
  });

  RobustReport rep;
  rep.model_id = model.id;
  rep.variant = variant;
  rep.ensemble = ensemble.describe();
  rep.adversaries = {{"classes", adversaries.classes}};

  const double tol = 1e-6;
  int worst_run = -1;
  double worst_metric = std::numeric_limits<double>::infinity();

  for (const auto& r : runs)
    if (r.blowup) ++rep.blowups;
  if (rep.blowups > 0) rep.satisfied = false;

  // fitted decay envelope over all non-invariance runs
  auto rates = log_grid(1e-3, 10.0, 40);
  auto amplitude_for = [&](double c) {
    double a = 0;
    for (const auto& r : runs) {
      if (r.blowup || r.zero_output) continue;
      if (r.arg <= 0) {
        if (r.peak_y > 1e-9) return std::numeric_limits<double>::infinity();
        continue;
      }
      for (size_t i = 0; i < r.t.size(); ++i)
        if (r.y[i] > 1e-9)
          a = std::max(a, r.y[i] * std::exp(c * r.t[i]) / r.arg);
    }
    return a;
  };
  double a_min = std::numeric_limits<double>::infinity();
  for (double c : rates) a_min = std::min(a_min, amplitude_for(c));
  if (!std::isfinite(a_min)) {
    rep.decay_ok = false;
    rep.satisfied = false;
    rep.fitted_rate = 0;
    rep.fitted_amplitude = 0;
  } else {
    double best_c = rates.front(), best_a = amplitude_for(rates.front());
    for (double c : rates) {
      double a = amplitude_for(c);
      if (a <= 1.5 * a_min) {
        best_c = c;
        best_a = a;
      }
    }
    rep.fitted_rate = best_c;
    rep.fitted_amplitude = best_a * 1.05 + 1e-12;
  }

  // per-run checks + reachability samples
  std::vector<RfcSample> samples;
  for (int ri = 0; ri < int(runs.size()); ++ri) {
    const auto& r = runs[ri];
    if (r.blowup) continue;
    for (size_t i = 0; i < r.t.size(); ++i)
      samples.push_back({r.t[i], r.xi_norm, 0.0, r.x[i]});

    if (r.robust_ol_slack < rep.worst_robust_ol_slack)
      rep.worst_robust_ol_slack = r.robust_ol_slack;
    if (r.robust_ol_slack < -tol) rep.robust_ol_ok = false;

    if (variant == RobustVariant::OL_RGAOS && !r.zero_output &&
        r.lagrange_slack < -tol)
      rep.lagrange_ok = false;

    if (r.zero_output) {
      rep.invariance_peak = std::max(rep.invariance_peak, r.peak_y);
      if (r.peak_y > 1e-9) rep.invariance_ok = false;
    }

    double metric = std::min(r.robust_ol_slack,
                             r.zero_output ? 1e-9 - r.peak_y : 1e9);
    if (metric < worst_metric) {
      worst_metric = metric;
      worst_run = ri;
    }
  }

  // decay re-check with the fitted envelope and halving milestones
  RfcEnvelope rfc;
  if (!samples.empty()) rfc = build_rfc_envelope(samples);
  for (const auto& r : runs) {
    if (r.blowup) continue;
    for (size_t i = 0; i < r.t.size(); ++i) {
      if (!samples.empty()) {
        double slack = rfc.bound(r.t[i], r.xi_norm, 0.0) - r.x[i];
        rep.worst_rfc_slack = std::min(rep.worst_rfc_slack, slack);
        if (slack < -tol) rep.rfc_ok = false;
      }
      if (std::isfinite(a_min) && !r.zero_output && r.arg > 0) {
        double bound = rep.fitted_amplitude * r.arg *
                       std::exp(-rep.fitted_rate * r.t[i]);
        if (r.y[i] > bound + tol) rep.decay_ok = false;
      }
    }
  }

  if (std::isfinite(a_min) && rep.decay_ok) {
    KLFunction fitted = KLFunction::make(
        "fitted", [a = rep.fitted_amplitude, c = rep.fitted_rate](
                      double r, double t) { return a * r * std::exp(-c * t); });
    DecayTimeFamily decay(fitted);
    for (const auto& r : runs) {
      if (r.blowup || r.zero_output || r.arg <= 0) continue;
      double s1 = model.pi.valid() ? std::max(model.pi(r.xi_norm), r.h_norm)
                                   : std::max(r.xi_norm, r.h_norm);
      if (s1 <= 1e-9) continue;
      double Tk = 0, rk = r.xi_norm, sk = s1;
      double prev_tail = std::numeric_limits<double>::infinity();
      for (int k = 1; k <= 4; ++k) {
        Tk += decay(rk, sk);
        sk /= 2;
        if (Tk > 0.9 * ensemble.horizon) break;
        double tail = 0;
        for (size_t i = 0; i < r.t.size(); ++i)
          if (r.t[i] >= Tk) tail = std::max(tail, r.y[i]);
        if (tail > sk + tol) rep.milestones_ok = false;
        if (tail > prev_tail + tol) rep.milestones_ok = false;
        prev_tail = tail;
        rk = std::max(r.xi_norm, rfc.bound(Tk, r.xi_norm, 0.0));
      }
    }
  }

  if (worst_run >= 0) {
    EnsembleMember mem = make_member(model, ensemble, tasks[worst_run].member);
    rep.witness = {tasks[worst_run].member, 0, runs[worst_run].peak_y,
                   runs[worst_run].h_norm, mem.xi.to_json(),
                   nlohmann::json{{"adversary", tasks[worst_run].cls}}};
  }
  rep.satisfied = rep.satisfied && rep.decay_ok && rep.lagrange_ok &&
                  rep.robust_ol_ok && rep.invariance_ok && rep.rfc_ok &&
                  rep.milestones_ok;
  int zero_touches = 0;
  for (const auto& r : runs)
    if (r.touched_zero_set) ++zero_touches;
  rep.extra = {{"fit_points", int(samples.size())},
               {"zero_set_touching_runs", zero_touches}};
  return rep;
}

}  // namespace dios
