#include "dios/certify.hpp"

#include <algorithm>
#include <cmath>

#include "dios/errors.hpp"
#include "dios/linalg.hpp"
#include "dios/parallel.hpp"

namespace dios {

// ------------------------------------------------------------------- forms

namespace {

const std::map<std::string, EstimateForm> kForms = {
    {"IOS", EstimateForm::IOS},
    {"IOS-max", EstimateForm::IOS_MAX},
    {"OL-GS", EstimateForm::OL_GS},
    {"SI-IOS", EstimateForm::SI_IOS},
    {"SI-IOS-max", EstimateForm::SI_IOS_MAX},
    {"OLIOS-compact", EstimateForm::OLIOS_COMPACT},
    {"OLIOS-compact-max", EstimateForm::OLIOS_COMPACT_MAX},
    {"GS", EstimateForm::GS},
    {"UBIBS", EstimateForm::UBIBS},
    {"RFC", EstimateForm::RFC},
    {"OAG", EstimateForm::OAG},
    {"OGS", EstimateForm::OGS},
    {"RAZ-IOS", EstimateForm::RAZ_IOS},
    {"RAZ-OL", EstimateForm::RAZ_OL},
    {"RAZ-SI", EstimateForm::RAZ_SI},
};

}  // namespace

std::string to_string(EstimateForm form) {
  for (const auto& [name, f] : kForms)
    if (f == form) return name;
  return "?";
}

EstimateForm parse_form(const std::string& name) {
  auto it = kForms.find(name);
  if (it == kForms.end()) throw ConfigError("unknown estimate form '" + name + "'");
  return it->second;
}

bool is_razumikhin(EstimateForm form) {
  return form == EstimateForm::RAZ_IOS || form == EstimateForm::RAZ_OL ||
         form == EstimateForm::RAZ_SI;
}

void EstimateCandidate::validate() const {
  auto need = [&](bool present, const char* what) {
    if (!present)
      throw MissingFunction(to_string(form) + " requires " + std::string(what));
  };
  switch (form) {
    case EstimateForm::IOS:
    case EstimateForm::IOS_MAX:
    case EstimateForm::SI_IOS:
    case EstimateForm::SI_IOS_MAX:
      need(beta.valid(), "beta");
      need(gamma.valid(), "gamma");
      break;
    case EstimateForm::OLIOS_COMPACT:
    case EstimateForm::OLIOS_COMPACT_MAX:
      need(beta.valid(), "beta");
      need(gamma.valid(), "gamma");
      need(rho.valid(), "rho");
      break;
    case EstimateForm::OL_GS:
      need(sigma.valid(), "sigma");
      break;
    case EstimateForm::OGS:
      need(sigma.valid(), "sigma");
      need(gamma.valid(), "gamma");
      break;
    case EstimateForm::GS:
    case EstimateForm::UBIBS:
      need(sigma.valid(), "sigma");
      need(mu.valid() || gamma.valid(), "mu (or gamma)");
      break;
    case EstimateForm::RFC:
      need(chi.valid(), "chi");
      break;
    case EstimateForm::OAG:
      need(gamma.valid(), "gamma");
      break;
    case EstimateForm::RAZ_IOS:
    case EstimateForm::RAZ_SI:
      need(beta.valid(), "beta");
      need(kappa.valid(), "kappa");
      need(gamma.valid(), "gamma");
      break;
    case EstimateForm::RAZ_OL:
      need(beta.valid(), "beta");
      need(rho.valid(), "rho");
      need(kappa.valid(), "kappa");
      need(gamma.valid(), "gamma");
      break;
  }
  if (is_razumikhin(form)) {
    for (double s : log_grid(1e-6, 1e6, 100))
      if (!(kappa(s) < s))
        throw ConfigError("kappa(s) < s fails at s=" + std::to_string(s));
  }
}

nlohmann::json EstimateCandidate::describe() const {
  nlohmann::json j{{"form", to_string(form)}};
  if (beta.valid()) j["beta"] = beta.describe();
  if (gamma.valid()) j["gamma"] = gamma.describe();
  if (sigma.valid()) j["sigma"] = sigma.describe();
  if (rho.valid()) j["rho"] = rho.describe();
  if (kappa.valid()) j["kappa"] = kappa.describe();
  if (mu.valid()) j["mu"] = mu.describe();
  if (chi.valid()) j["chi"] = chi.describe();
  if (c != 0) j["c"] = c;
  return j;
}

// ---------------------------------------------------------------- ensemble

nlohmann::json EnsembleSpec::describe() const {
  nlohmann::json fixed = nlohmann::json::object();
  for (const auto& [k, v] : fixed_components) fixed[std::to_string(k)] = v;
  return {{"count", count},
          {"radius_xi", radius_xi},
          {"radius_u", radius_u},
          {"seed", seed},
          {"horizon", horizon},
          {"steps_per_delay", steps_per_delay},
          {"xi_knots", xi_knots},
          {"u_switches", u_switches},
          {"zero_output_members", zero_output_members},
          {"fixed_components", fixed}};
}

EnsembleMember make_member(const SystemModel& model, const EnsembleSpec& spec,
                           int index) {
  EnsembleMember mem;
  Rng rng = Rng::stream(spec.seed, uint64_t(index));
  mem.member_seed = spec.seed;

  // random piecewise-linear history: knots drawn in the radius ball; the
  // norm stays inside the ball along chords by convexity
  int knots = std::max(2, spec.xi_knots);
  std::vector<std::vector<double>> kv(knots);
  for (auto& v : kv) v = random_in_ball(rng, model.n, spec.radius_xi);
  int steps = spec.steps_per_delay;
  mem.xi = HistorySegment::from_function(
      model.theta, steps, model.n, [&](double s, std::span<double> out) {
        double pos = (s + model.theta) / model.theta * (knots - 1);
        int lo = std::min(knots - 2, int(pos));
        double w = pos - lo;
        for (int c = 0; c < model.n; ++c)
          out[c] = (1 - w) * kv[lo][c] + w * kv[lo + 1][c];
      });
  for (const auto& [comp, value] : spec.fixed_components) {
    if (comp < 0 || comp >= model.n)
      throw ConfigError("fixed component index out of range");
    for (int i = 0; i <= steps; ++i) mem.xi.mutable_sample(i)[comp] = value;
  }

  // bang-bang input: full-amplitude random directions, switch times snapped
  double dt = model.theta / spec.steps_per_delay;
  std::vector<double> times{0.0};
  for (int s = 0; s < spec.u_switches; ++s) {
    double t = std::round(rng.uniform(0, spec.horizon) / dt) * dt;
    if (t > 0) times.push_back(t);
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  std::vector<std::vector<double>> levels;
  for (size_t i = 0; i < times.size(); ++i) {
    auto dir = random_unit_vector(rng, model.m);
    for (auto& x : dir) x *= spec.radius_u;
    levels.push_back(std::move(dir));
  }
  mem.u = InputSignal(std::move(times), std::move(levels), spec.horizon);

  if (model.zero_output_projector && index < spec.zero_output_members) {
    mem.xi = model.zero_output_projector(mem.xi);
    mem.zero_output = true;
    if (index == 0) mem.u = InputSignal::zero(model.m, spec.horizon);
  }
  return mem;
}

// ------------------------------------------------------------------ checks

namespace {

struct MemberResult {
  double worst_slack = std::numeric_limits<double>::infinity();
  double worst_t = 0, worst_value = 0, worst_bound = 0;
  bool blowup = false;
  double blowup_time = 0;
};

struct CheckContext {
  const SystemModel& model;
  const EstimateCandidate& cand;
  const EnsembleSpec& spec;
  bool history_norm;  // A = H(xi) instead of |h(xi)|
};

void track(MemberResult& res, double slack, double t, double value, double bound) {
  if (slack < res.worst_slack) {
    res.worst_slack = slack;
    res.worst_t = t;
    res.worst_value = value;
    res.worst_bound = bound;
  }
}

MemberResult run_member(const CheckContext& ctx, int index) {
  const auto& cand = ctx.cand;
  EnsembleMember mem = make_member(ctx.model, ctx.spec, index);
  MemberResult res;

  SimConfig cfg{ctx.spec.horizon, ctx.spec.steps_per_delay, ctx.spec.blowup_guard};
  Trajectory traj;
  try {
    traj = simulate(ctx.model, mem.xi, mem.u, cfg);
  } catch (const BlowUp& b) {
    res.blowup = true;
    res.blowup_time = b.time;
    res.worst_slack = -std::numeric_limits<double>::infinity();
    res.worst_t = b.time;
    return res;
  }

  const double xi_norm = mem.xi.sup_norm();
  const double u_norm = mem.u.sup_norm();
  const double h_xi = output_norm_of(ctx.model, mem.xi);
  const double A =
      ctx.history_norm ? output_history_norm_of(ctx.model, mem.xi) : h_xi;
  const int N = ctx.spec.steps_per_delay;

  double runmax = 0;
  if (is_razumikhin(cand.form)) {
    for (long row = 0; row < N; ++row)
      runmax = std::max(runmax, traj.output_norm(row));
  }

  const ComparisonFunction& state_gain_mu =
      cand.mu.valid() ? cand.mu : cand.gamma;

  double tail_start = 0.8 * ctx.spec.horizon;
  double tail_max = 0;

  for (long row = N; row < traj.row_count(); ++row) {
    double t = traj.time_of_row(row);
    double value = 0, bound = 0;
    switch (cand.form) {
      case EstimateForm::IOS:
        value = traj.output_norm(row);
        bound = cand.beta(xi_norm, t) + cand.gamma(u_norm);
        break;
      case EstimateForm::IOS_MAX:
        value = traj.output_norm(row);
        bound = std::max(cand.beta(xi_norm, t), cand.gamma(u_norm));
        break;
      case EstimateForm::OL_GS:
        value = traj.output_norm(row);
        bound = std::max(cand.sigma(A), cand.sigma(u_norm));
        break;
      case EstimateForm::SI_IOS:
        value = traj.output_norm(row);
        bound = cand.beta(A, t) + cand.gamma(u_norm);
        break;
      case EstimateForm::SI_IOS_MAX:
        value = traj.output_norm(row);
        bound = std::max(cand.beta(A, t), cand.gamma(u_norm));
        break;
      case EstimateForm::OLIOS_COMPACT:
        value = traj.output_norm(row);
        bound = cand.beta(A, t / (1 + cand.rho(xi_norm))) + cand.gamma(u_norm);
        break;
      case EstimateForm::OLIOS_COMPACT_MAX:
        value = traj.output_norm(row);
        bound = std::max(cand.beta(A, t / (1 + cand.rho(xi_norm))),
                         cand.gamma(u_norm));
        break;
      case EstimateForm::OGS:
        value = traj.output_norm(row);
        bound = std::max(cand.sigma(xi_norm), cand.gamma(u_norm));
        break;
      case EstimateForm::GS:
        value = traj.state_norm(row);
        bound = cand.sigma(xi_norm) + state_gain_mu(u_norm);
        break;
      case EstimateForm::UBIBS:
        value = traj.state_norm(row);
        bound = cand.sigma(xi_norm) + state_gain_mu(u_norm) + cand.c;
        break;
      case EstimateForm::RFC:
        value = traj.state_norm(row);
        bound = cand.chi(t) + cand.chi(xi_norm) + cand.chi(u_norm) + cand.c;
        break;
      case EstimateForm::OAG:
        if (t >= tail_start)
          tail_max = std::max(tail_max, traj.output_norm(row));
        continue;
      case EstimateForm::RAZ_IOS:
        value = traj.output_norm(row);
        runmax = std::max(runmax, value);
        bound = std::max({cand.beta(xi_norm, t), cand.kappa(runmax),
                          cand.gamma(u_norm)});
        break;
      case EstimateForm::RAZ_OL:
        value = traj.output_norm(row);
        runmax = std::max(runmax, value);
        bound = std::max({cand.beta(A, t / (1 + cand.rho(xi_norm))),
                          cand.kappa(runmax), cand.gamma(u_norm)});
        break;
      case EstimateForm::RAZ_SI:
        value = traj.output_norm(row);
        runmax = std::max(runmax, value);
        bound = std::max({cand.beta(A, t), cand.kappa(runmax),
                          cand.gamma(u_norm)});
        break;
    }
    track(res, bound - value, t, value, bound);
  }

  if (cand.form == EstimateForm::OAG) {
    double bound = 1.05 * cand.gamma(u_norm) + 1e-6;
    track(res, bound - tail_max, ctx.spec.horizon, tail_max, bound);
  }
  return res;
}

CertificationReport reduce(const CheckContext& ctx,
                           const std::vector<MemberResult>& results) {
  CertificationReport rep;
  rep.model_id = ctx.model.id;
  rep.form = ctx.cand.form;
  rep.used_history_norm = ctx.history_norm;
  rep.ensemble = ctx.spec.describe();
  int worst = -1;
  for (int i = 0; i < int(results.size()); ++i) {
    if (results[i].blowup) ++rep.blowups;
    if (results[i].worst_slack < rep.worst_slack) {
      rep.worst_slack = results[i].worst_slack;
      worst = i;
    }
  }
  if (worst >= 0) {
    const auto& r = results[worst];
    EnsembleMember mem = make_member(ctx.model, ctx.spec, worst);
    rep.witness = {worst, r.worst_t, r.worst_value, r.worst_bound,
                   mem.xi.to_json(), mem.u.to_json()};
  }
  rep.satisfied = rep.worst_slack >= -rep.tolerance && rep.blowups == 0;
  return rep;
}

bool use_history_norm(const SystemModel& model, EstimateForm form) {
  // the initial-output argument switches to H(xi) for delay-free outputs
  switch (form) {
    case EstimateForm::OL_GS:
    case EstimateForm::SI_IOS:
    case EstimateForm::SI_IOS_MAX:
    case EstimateForm::OLIOS_COMPACT:
    case EstimateForm::OLIOS_COMPACT_MAX:
    case EstimateForm::RAZ_OL:
    case EstimateForm::RAZ_SI:
      return model.delay_free_output();
    default:
      return false;
  }
}

}  // namespace

CertificationReport check_estimate(const SystemModel& model,
                                   const EstimateCandidate& candidate,
                                   const EnsembleSpec& ensemble, int threads) {
  if (is_razumikhin(candidate.form))
    return check_razumikhin(model, candidate, ensemble, threads);
  candidate.validate();
  CheckContext ctx{model, candidate, ensemble,
                   use_history_norm(model, candidate.form)};
  if (threads <= 0) threads = default_thread_count();
  auto results = parallel_map<MemberResult>(
      ensemble.count, threads, [&](int i) { return run_member(ctx, i); });
  return reduce(ctx, results);
}

CertificationReport check_razumikhin(const SystemModel& model,
                                     const EstimateCandidate& candidate,
                                     const EnsembleSpec& ensemble, int threads) {
  if (!is_razumikhin(candidate.form))
    throw ConfigError("check_razumikhin expects a RAZ-* form");
  if (!model.delay_free_output())
    throw NoDelayFreeOutput("Razumikhin checks require a delay-free output map");
  candidate.validate();
  CheckContext ctx{model, candidate, ensemble,
                   use_history_norm(model, candidate.form)};
  if (threads <= 0) threads = default_thread_count();
  auto results = parallel_map<MemberResult>(
      ensemble.count, threads, [&](int i) { return run_member(ctx, i); });
  return reduce(ctx, results);
}

nlohmann::json CertificationReport::to_json() const {
  nlohmann::json w{{"member", witness.member},
                   {"t", witness.t},
                   {"value", witness.value},
                   {"bound", witness.bound},
                   {"xi", witness.xi},
                   {"u", witness.u}};
  return {{"model", model_id},
          {"form", to_string(form)},
          {"verdict", satisfied ? "satisfied-on-ensemble" : "violated"},
          {"worst_slack", worst_slack},
          {"tolerance", tolerance},
          {"used_history_norm", used_history_norm},
          {"blowups", blowups},
          {"witness", w},
          {"ensemble", ensemble},
          {"extra", extra}};
}

// ------------------------------------------------------------- derivations

EstimateCandidate derive_olgs_from_si(const EstimateCandidate& si) {
  if (si.form != EstimateForm::SI_IOS_MAX)
    throw ConfigError("derive_olgs_from_si expects a max-form SI-IOS candidate");
  EstimateCandidate out;
  out.form = EstimateForm::OL_GS;
  out.sigma = ComparisonFunction::pointwise_max(
      kl_time_slice(si.beta, 0.0, "beta0[" + si.beta.name() + "]"), si.gamma);
  return out;
}

EstimateCandidate derive_ios_from_si(const EstimateCandidate& si,
                                     const ComparisonFunction& pi) {
  if (si.form != EstimateForm::SI_IOS_MAX)
    throw ConfigError("derive_ios_from_si expects a max-form SI-IOS candidate");
  if (!pi.valid()) throw MissingFunction("model output bound pi is required");
  EstimateCandidate out;
  out.form = EstimateForm::IOS_MAX;
  KLFunction beta = si.beta;
  ComparisonFunction bound = pi;
  out.beta = KLFunction::make(
      "composed[" + si.beta.name() + "]",
      [beta, bound](double r, double t) { return beta(bound(r), t); });
  out.gamma = si.gamma;
  return out;
}

// ---------------------------------------------------------------- lift

KLFunction lift_to_history_norm(const KLFunction& beta, double theta,
                                const SamplingGrid& grid) {
  if (!(theta >= 0)) throw ConfigError("lift requires theta >= 0");
  SontagFactorization fac = sontag_factorize(beta, grid);
  ComparisonFunction p = fac.p, q = fac.q;
  double scale = std::exp(theta);
  return KLFunction::make(
      "lift[" + beta.name() + "]", [p, q, scale](double r, double t) {
        return invert(p, scale * q(r) * std::exp(-t));
      });
}

// ---------------------------------------------------------------- gain

ComparisonFunction estimate_asymptotic_gain(const SystemModel& model,
                                            const std::vector<double>& amplitudes,
                                            const EnsembleSpec& ensemble,
                                            int threads) {
  if (amplitudes.empty()) throw ConfigError("no amplitude levels given");
  if (threads <= 0) threads = default_thread_count();
  double clamp = 1e-8 * std::max(1.0, ensemble.radius_xi);

  std::vector<std::pair<double, double>> knots;
  for (double a : amplitudes) {
    EnsembleSpec level_spec = ensemble;
    level_spec.radius_u = a;
    level_spec.zero_output_members = 0;
    level_spec.seed = ensemble.seed ^ std::hash<double>{}(a);
    auto tails = parallel_map<double>(
        level_spec.count, threads, [&](int i) {
          EnsembleMember mem = make_member(model, level_spec, i);
          if (a == 0.0) mem.u = InputSignal::zero(model.m, level_spec.horizon);
          SimConfig cfg{level_spec.horizon, level_spec.steps_per_delay,
                        level_spec.blowup_guard};
          Trajectory traj = simulate(model, mem.xi, mem.u, cfg);
          double tail = 0;
          for (long row = ensemble.steps_per_delay; row < traj.row_count(); ++row)
            if (traj.time_of_row(row) >= 0.8 * level_spec.horizon)
              tail = std::max(tail, traj.output_norm(row));
          return tail;
        });
    double peak = 0;
    for (double t : tails) peak = std::max(peak, t);
    if (peak < clamp) peak = 0;
    knots.emplace_back(a, peak);
  }
  std::sort(knots.begin(), knots.end());
  auto stair = std::make_shared<std::vector<std::pair<double, double>>>();
  double running = 0;
  nlohmann::json table = nlohmann::json::array();
  for (auto& [a, g] : knots) {
    running = std::max(running, g);
    stair->emplace_back(a, running);
    table.push_back({a, running});
  }
  return ComparisonFunction::make_with_payload(
      "empirical-gain[" + model.id + "]", FunctionClass::N,
      [stair](double a) {
        double v = 0;
        for (const auto& [lvl, g] : *stair) {
          if (lvl > a) break;
          v = g;
        }
        return v;
      },
      {{"staircase", table}});
}

// ---------------------------------------------------------------- fitting

EstimateCandidate fit_kl_candidate(const SystemModel& model,
                                   const EnsembleSpec& ensemble,
                                   const FitSpec& fit, int threads) {
  bool compact = fit.form == EstimateForm::OLIOS_COMPACT_MAX;
  bool si = fit.form == EstimateForm::SI_IOS_MAX || compact;
  if (fit.form != EstimateForm::IOS_MAX && !si)
    throw ConfigError("fit_kl_candidate supports max-form IOS / SI-IOS / "
                      "OLIOS-compact only");
  if (!fit.gamma.valid()) throw MissingFunction("fit requires gamma");
  if (compact && !fit.rho.valid()) throw MissingFunction("fit requires rho");
  if (threads <= 0) threads = default_thread_count();

  struct Point { double arg, tau, value; };
  bool history_norm = si && model.delay_free_output();

  auto collect = parallel_map<std::vector<Point>>(
      ensemble.count, threads, [&](int i) {
        EnsembleMember mem = make_member(model, ensemble, i);
        SimConfig cfg{ensemble.horizon, ensemble.steps_per_delay,
                      ensemble.blowup_guard};
        Trajectory traj = simulate(model, mem.xi, mem.u, cfg);
        double u_norm = mem.u.sup_norm();
        double xi_norm = mem.xi.sup_norm();
        double arg = xi_norm;
        if (si)
          arg = history_norm ? output_history_norm_of(model, mem.xi)
                             : output_norm_of(model, mem.xi);
        double dilate = compact ? 1.0 / (1 + fit.rho(xi_norm)) : 1.0;
        std::vector<Point> pts;
        for (long row = ensemble.steps_per_delay; row < traj.row_count(); ++row) {
          double value = traj.output_norm(row);
          if (value <= fit.gamma(u_norm) || value < 1e-9) continue;
          pts.push_back({arg, traj.time_of_row(row) * dilate, value});
        }
        return pts;
      });

  std::vector<Point> pts;
  for (auto& v : collect) pts.insert(pts.end(), v.begin(), v.end());

  auto rates = fit.rate_grid.empty() ? log_grid(1e-3, 10.0, 40) : fit.rate_grid;
  auto amplitude_for = [&](double c) {
    double a = 0;
    for (const auto& p : pts) {
      if (p.arg <= 0) return std::numeric_limits<double>::infinity();
      a = std::max(a, p.value * std::exp(c * p.tau) / p.arg);
    }
    return a;
  };
  double a_min = std::numeric_limits<double>::infinity();
  for (double c : rates) a_min = std::min(a_min, amplitude_for(c));
  if (!std::isfinite(a_min))
    throw NonConvergent("fit infeasible: output nonzero where the initial "
                        "argument vanishes");
  double best_c = rates.front(), best_a = amplitude_for(rates.front());
  for (double c : rates) {
    double a = amplitude_for(c);
    if (a <= fit.rate_slack * a_min) {
      best_c = c;
      best_a = a;
    }
  }
  if (pts.empty()) {  // nothing above the gain: any decaying envelope works
    best_c = 1.0;
    best_a = 1.0;
  }

  double a_fit = best_a * fit.margin + 1e-12;
  EstimateCandidate out;
  out.form = fit.form;
  char buf[64];
  std::snprintf(buf, sizeof buf, "powexp-kl:%.12g,1,%.12g", a_fit, best_c);
  out.beta = parse_kl(buf);
  out.gamma = fit.gamma;
  if (compact) out.rho = fit.rho;
  return out;
}

}  // namespace dios
