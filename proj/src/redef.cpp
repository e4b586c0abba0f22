#include "dios/redef.hpp"

#include <algorithm>
#include <cmath>

#include "dios/errors.hpp"
#include "dios/linalg.hpp"
#include "dios/parallel.hpp"

namespace dios {

namespace {

// radial level grid of the admissible input ball, always including zero
std::vector<std::vector<double>> level_grid(int m, double cap, int magnitudes,
                                            int directions, Rng& rng) {
  std::vector<std::vector<double>> dirs;
  if (m == 1) {
    dirs = {{1.0}, {-1.0}};
  } else if (m == 2) {
    for (int k = 0; k < directions; ++k) {
      double a = 2 * 3.14159265358979323846 * k / directions;
      dirs.push_back({std::cos(a), std::sin(a)});
    }
  } else {
    for (int k = 0; k < directions; ++k)
      dirs.push_back(random_unit_vector(rng, m));
  }
  std::vector<std::vector<double>> levels{std::vector<double>(m, 0.0)};
  for (int q = 1; q < magnitudes; ++q) {
    double mag = cap * q / (magnitudes - 1);
    for (const auto& d : dirs) {
      auto lv = d;
      for (auto& x : lv) x *= mag;
      levels.push_back(std::move(lv));
    }
  }
  return levels;
}

struct SearchContext {
  const SystemModel& model;
  const HistorySegment& xi;
  const RedefinitionSpec& spec;
  double horizon = 0;  // grid-aligned
  double dt = 0;
  int evaluations = 0;

  // J(u) = max_t (|y(t)| - gamma(|u|)), with the maximizing time
  std::pair<double, double> objective(const InputSignal& u) {
    ++evaluations;
    SimConfig cfg{horizon, spec.steps_per_delay, spec.blowup_guard};
    Trajectory traj = simulate(model, xi, u, cfg);
    double penalty = spec.gamma(u.sup_norm());
    double best = -std::numeric_limits<double>::infinity(), best_t = 0;
    for (long row = spec.steps_per_delay; row < traj.row_count(); ++row) {
      double v = traj.output_norm(row) - penalty;
      if (v > best) {
        best = v;
        best_t = traj.time_of_row(row);
      }
    }
    return {best, best_t};
  }

  InputSignal assemble(const std::vector<int>& pick,
                       const std::vector<std::vector<double>>& levels) const {
    int K = int(pick.size());
    std::vector<double> times;
    std::vector<std::vector<double>> lv;
    for (int k = 0; k < K; ++k) {
      double t = std::round(horizon * k / K / dt) * dt;
      if (!times.empty() && t <= times.back()) continue;
      times.push_back(t);
      lv.push_back(levels[pick[k]]);
    }
    return InputSignal(std::move(times), std::move(lv), horizon);
  }
};

}  // namespace

nlohmann::json HbarEstimate::to_json() const {
  return {{"value", value},
          {"lower", lower},
          {"upper", upper},
          {"t_star", t_star},
          {"u_star", u_star.to_json()},
          {"horizon_used", horizon_used},
          {"evaluations", evaluations}};
}

HbarEstimate estimate_hbar(const SystemModel& model, const HistorySegment& xi,
                           const RedefinitionSpec& spec, int threads) {
  if (!spec.beta.valid() || !spec.gamma.valid())
    throw NoCertificate("estimate_hbar requires a (beta, gamma) certificate");
  (void)threads;

  HbarEstimate est;
  est.u_star = InputSignal::zero(model.m, 0);
  double xi_norm = xi.sup_norm();
  double beta0 = spec.beta(xi_norm, 0.0);
  est.upper = beta0;
  est.lower = est.value = output_norm_of(model, xi);  // t=0, u=0 candidate
  if (xi_norm == 0.0) return est;

  double u_cap = invert(spec.gamma, beta0);
  double dt = model.theta / spec.steps_per_delay;
  Rng rng = Rng::stream(spec.seed, 0x9e11);
  auto levels = level_grid(model.m, u_cap, spec.magnitudes, spec.directions, rng);
  DecayTimeFamily decay(spec.beta);

  SearchContext ctx{model, xi, spec};
  ctx.dt = dt;

  // horizon floor keeps T(r, s/2) finite when |h(xi)| = 0
  double floor = 1e-6 * std::max(1.0, beta0);
  double prev_horizon = -1;
  for (int round = 0; round < spec.max_horizon_rounds; ++round) {
    double s = std::max(est.value, floor) / 2;
    double horizon = std::min(decay(xi_norm, s), spec.horizon_cap);
    horizon = std::max(dt, std::ceil(horizon / dt) * dt);
    if (horizon == prev_horizon) break;
    // keep the longest horizon encountered so the search domain never shrinks
    ctx.horizon = std::max(horizon, ctx.horizon);
    prev_horizon = horizon;

    auto consider = [&](const InputSignal& u) {
      auto [J, t] = ctx.objective(u);
      if (J > est.value) {
        est.value = J;
        est.t_star = t;
        est.u_star = u;
        return true;
      }
      return false;
    };

    // deterministic candidates: constant inputs at each level
    for (const auto& lv : levels) consider(InputSignal::constant(lv, ctx.horizon));

    // multi-start coordinate ascent over segment levels
    int K = std::max(1, spec.segments);
    int L = int(levels.size());
    for (int start = 0; start < spec.restarts; ++start) {
      Rng srng = Rng::stream(spec.seed, 0x5eed + start);
      std::vector<int> pick(K);
      for (auto& p : pick) p = srng.uniform_int(0, L - 1);
      auto current = ctx.objective(ctx.assemble(pick, levels));
      for (int sweep = 0; sweep < 4; ++sweep) {
        bool improved = false;
        for (int k = 0; k < K; ++k) {
          int best_l = pick[k];
          for (int l = 0; l < L; ++l) {
            if (l == pick[k]) continue;
            std::vector<int> trial = pick;
            trial[k] = l;
            auto J = ctx.objective(ctx.assemble(trial, levels));
            if (J.first > current.first) {
              current = J;
              best_l = l;
              improved = true;
            }
          }
          pick[k] = best_l;
        }
        if (!improved) break;
      }
      if (current.first > est.value) {
        est.value = current.first;
        est.t_star = current.second;
        est.u_star = ctx.assemble(pick, levels);
      }
    }
  }

  est.lower = est.value;
  est.horizon_used = ctx.horizon;
  est.evaluations = ctx.evaluations;
  return est;
}

HbarEstimate brute_force_hbar(const SystemModel& model, const HistorySegment& xi,
                              const RedefinitionSpec& spec) {
  HbarEstimate est;
  est.u_star = InputSignal::zero(model.m, 0);
  double xi_norm = xi.sup_norm();
  double beta0 = spec.beta(xi_norm, 0.0);
  est.upper = beta0;
  est.lower = est.value = output_norm_of(model, xi);
  if (xi_norm == 0.0) return est;

  double u_cap = invert(spec.gamma, beta0);
  double dt = model.theta / spec.steps_per_delay;
  Rng rng = Rng::stream(spec.seed, 0xb0fe);
  auto levels = level_grid(model.m, u_cap, spec.magnitudes, spec.directions, rng);
  DecayTimeFamily decay(spec.beta);

  SearchContext ctx{model, xi, spec};
  ctx.dt = dt;
  double s = std::max(est.value, 1e-6 * std::max(1.0, beta0)) / 2;
  ctx.horizon = std::min(decay(xi_norm, s), spec.horizon_cap);
  ctx.horizon = std::max(dt, std::ceil(ctx.horizon / dt) * dt);

  int K = std::max(1, spec.segments);
  int L = int(levels.size());
  std::vector<int> pick(K, 0);
  for (;;) {
    auto [J, t] = ctx.objective(ctx.assemble(pick, levels));
    if (J > est.value) {
      est.value = J;
      est.t_star = t;
      est.u_star = ctx.assemble(pick, levels);
    }
    int k = 0;
    while (k < K && ++pick[k] == L) pick[k++] = 0;
    if (k == K) break;
  }
  est.lower = est.value;
  est.horizon_used = ctx.horizon;
  est.evaluations = ctx.evaluations;
  return est;
}

HbarModulus hbar_difference_quotient(const SystemModel& model,
                                     const HistorySegment& xi,
                                     const RedefinitionSpec& spec, double eps,
                                     int directions) {
  if (!(eps > 0)) throw ConfigError("modulus probe requires eps > 0");
  HbarModulus mod;
  mod.eps = eps;
  mod.directions = directions;
  double base = estimate_hbar(model, xi, spec).value;
  Rng rng = Rng::stream(spec.seed, 0x0d1f);
  for (int k = 0; k < directions; ++k) {
    auto dir = random_unit_vector(rng, xi.dim());
    HistorySegment shifted = xi;
    for (int i = 0; i <= shifted.steps(); ++i) {
      auto row = shifted.mutable_sample(i);
      for (int c = 0; c < xi.dim(); ++c) row[c] += eps * dir[c];
    }
    double value = estimate_hbar(model, shifted, spec).value;
    mod.max_quotient = std::max(mod.max_quotient, std::abs(value - base) / eps);
  }
  return mod;
}

nlohmann::json RedefValidationReport::to_json() const {
  nlohmann::json w{{"member", witness.member},
                   {"t", witness.t},
                   {"value", witness.value},
                   {"bound", witness.bound},
                   {"xi", witness.xi},
                   {"u", witness.u}};
  return {{"model", model_id},
          {"verdict", satisfied ? "satisfied-on-ensemble" : "violated"},
          {"worst_ios_slack", worst_ios_slack},
          {"worst_ol_slack", worst_ol_slack},
          {"worst_sandwich_slack", worst_sandwich_slack},
          {"tolerance", tolerance},
          {"witness", w},
          {"ensemble", ensemble},
          {"config", config}};
}

RedefValidationReport validate_redefinition(const SystemModel& model,
                                            const RedefinitionSpec& spec,
                                            const EnsembleSpec& ensemble,
                                            const std::vector<double>& check_times,
                                            int threads) {
  if (threads <= 0) threads = default_thread_count();

  struct MemberOut {
    double ios = std::numeric_limits<double>::infinity();
    double ol = std::numeric_limits<double>::infinity();
    double sandwich = std::numeric_limits<double>::infinity();
    double worst_t = 0, worst_value = 0, worst_bound = 0;
  };

  auto results = parallel_map<MemberOut>(
      ensemble.count, threads, [&](int index) {
        EnsembleMember mem = make_member(model, ensemble, index);
        SimConfig cfg{ensemble.horizon, ensemble.steps_per_delay,
                      ensemble.blowup_guard};
        Trajectory traj = simulate(model, mem.xi, mem.u, cfg);

        RedefinitionSpec local = spec;
        HbarEstimate at_xi = estimate_hbar(
            model, resample_history(mem.xi, local.steps_per_delay), local);
        double xi_norm = mem.xi.sup_norm();
        double u_norm = mem.u.sup_norm();

        MemberOut out;
        auto note = [&](double slack, double& worst, double tau, double value,
                        double bound) {
          if (slack < worst) worst = slack;
          if (slack < std::min({out.ios, out.ol, out.sandwich})) {
            out.worst_t = tau;
            out.worst_value = value;
            out.worst_bound = bound;
          }
        };

        for (double tau : check_times) {
          if (tau > ensemble.horizon) continue;
          double tau_snapped =
              std::round(tau / traj.dt()) * traj.dt();
          HistorySegment eta = traj.history_at(tau_snapped);
          // validation runs on the search grid; resample when they differ
          HbarEstimate at_tau = estimate_hbar(
              model, resample_history(eta, local.steps_per_delay), local);

          // (i) certified lower bound against the exactly evaluable bound
          double rhs_ios = spec.beta(xi_norm, tau_snapped) +
                           spec.gamma(mem.u.sup_norm(0, tau_snapped));
          note(rhs_ios - at_tau.lower, out.ios, tau_snapped, at_tau.lower,
               rhs_ios);

          // (ii) output-Lagrange bound: right side bracketed from above
          double rhs_ol = at_xi.upper + spec.gamma(u_norm);
          note(rhs_ol - at_tau.lower, out.ol, tau_snapped, at_tau.lower, rhs_ol);

          // sandwich |h| <= hbar <= beta0(|xi|) at the checked history
          double h_eta = output_norm_of(model, eta);
          note(at_tau.value - h_eta, out.sandwich, tau_snapped, h_eta,
               at_tau.value);
          note(at_tau.upper - at_tau.lower, out.sandwich, tau_snapped,
               at_tau.lower, at_tau.upper);
        }
        return out;
      });

  RedefValidationReport rep;
  rep.model_id = model.id;
  rep.ensemble = ensemble.describe();
  rep.config = {{"segments", spec.segments},
                {"magnitudes", spec.magnitudes},
                {"directions", spec.directions},
                {"restarts", spec.restarts},
                {"horizon_cap", spec.horizon_cap},
                {"check_times", check_times}};
  int worst_member = -1;
  double worst_overall = std::numeric_limits<double>::infinity();
  for (int i = 0; i < int(results.size()); ++i) {
    rep.worst_ios_slack = std::min(rep.worst_ios_slack, results[i].ios);
    rep.worst_ol_slack = std::min(rep.worst_ol_slack, results[i].ol);
    rep.worst_sandwich_slack =
        std::min(rep.worst_sandwich_slack, results[i].sandwich);
    double m = std::min({results[i].ios, results[i].ol, results[i].sandwich});
    if (m < worst_overall) {
      worst_overall = m;
      worst_member = i;
    }
  }
  if (worst_member >= 0) {
    EnsembleMember mem = make_member(model, ensemble, worst_member);
    const auto& r = results[worst_member];
    rep.witness = {worst_member, r.worst_t, r.worst_value, r.worst_bound,
                   mem.xi.to_json(), mem.u.to_json()};
  }
  rep.satisfied = worst_overall >= -rep.tolerance;
  return rep;
}

}  // namespace dios
