// Acceptance suite: end-to-end reproduction of the worked examples plus the
// property suites, one verdict line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "dios/certify.hpp"
#include "dios/cli.hpp"
#include "dios/dde.hpp"
#include "dios/errors.hpp"
#include "dios/funclib.hpp"
#include "dios/linalg.hpp"
#include "dios/margin.hpp"
#include "dios/redef.hpp"

using namespace dios;

namespace {

int g_failures = 0;

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

void criterion(int num, const std::string& name, double runtime_cap_s,
               const std::function<void(Check&)>& body) {
  auto t0 = std::chrono::steady_clock::now();
  Check chk;
  try {
    body(chk);
  } catch (const std::exception& e) {
    chk.require(false, std::string("exception: ") + e.what());
  }
  double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  if (runtime_cap_s > 0)
    chk.require(secs < runtime_cap_s,
                "runtime " + std::to_string(secs) + "s exceeded cap");
  if (!chk.ok) ++g_failures;
  std::printf("[%s] criterion %d: %s (%.1fs)%s%s\n", chk.ok ? "PASS" : "FAIL",
              num, name.c_str(), secs, chk.ok ? "" : " -- ",
              chk.ok ? "" : chk.detail.c_str());
  std::fflush(stdout);
}

double component_sup(const HistorySegment& xi, int comp) {
  double best = 0;
  for (int i = 0; i <= xi.steps(); ++i)
    best = std::max(best, std::abs(xi.sample(i)[comp]));
  return best;
}

double w1_energy(const Trajectory& traj, long row) {
  double head = traj.state_row(row)[0];
  return 0.5 * head * head + 0.5 * trailing_square_integral(traj, 0, row);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------- criteria

void c1_redef_example(Check& chk) {
  SystemModel mdl = make_model("ex-redef-w2", 0.5);
  EnsembleSpec spec;
  spec.count = 100;
  spec.radius_xi = 2.0;
  spec.radius_u = 1.0;
  spec.horizon = 20.0;
  spec.steps_per_delay = 64;
  spec.seed = 20260810;
  spec.zero_output_members = 0;
  const double c = std::sqrt(1.5);

  for (int k = 0; k < spec.count && chk.ok; ++k) {
    EnsembleMember mem = make_member(mdl, spec, k);
    Trajectory traj = simulate(mdl, mem.xi, mem.u,
                               {spec.horizon, spec.steps_per_delay, 1e12});
    double xi1 = component_sup(mem.xi, 0);
    double w2_0 = output_norm_of(mdl, mem.xi);
    double un = mem.u.sup_norm();

    double prev_w1 = w1_energy(traj, 64);
    for (long row = 64; row < traj.row_count(); ++row) {
      double t = traj.time_of_row(row);
      double w1 = w1_energy(traj, row);
      chk.require(w1 <= prev_w1 + 1e-6, "W1 increased at t=" + std::to_string(t));
      prev_w1 = w1;
      chk.require(std::abs(traj.state_row(row)[0]) <= c * xi1 + 1e-6,
                  "|x1| bound failed at t=" + std::to_string(t));
      double w2_bound = w2_0 * std::exp(-t / (2 * (1 + c * xi1 * xi1))) + un * un;
      chk.require(traj.output_norm(row) <= w2_bound + 1e-4,
                  "W2 decay bound failed at t=" + std::to_string(t));
      if (!chk.ok) break;
    }
  }

  // (d) the x3 output escapes zero although h(xi) = 0
  SystemModel raw = make_model("ex-redef", 0.5);
  auto xi = HistorySegment::from_function(
      0.5, 64, 3, [](double, std::span<double> out) {
        out[0] = 0.0;
        out[1] = 1.0;
        out[2] = 0.0;
      });
  Trajectory esc = simulate(raw, xi, InputSignal::zero(1), {20.0, 64, 1e12});
  double peak = 0;
  for (long row = 64; row < esc.row_count(); ++row)
    peak = std::max(peak, esc.output_norm(row));
  chk.require(peak >= 1e-3, "x3 output did not escape from the zero-output set");
}

void c2_razumikhin_example(Check& chk) {
  const double theta = 0.1;
  SystemModel mdl = make_model("ex-raz-v", theta);

  EstimateCandidate premise;
  premise.form = EstimateForm::RAZ_OL;
  premise.beta = parse_kl("exp-kl:3,1");
  premise.rho = parse_comparison("power:2");
  premise.kappa = parse_comparison("linear:0.6");  // 6*theta
  premise.gamma = parse_comparison("scaled-power:3.3,2");  // 3*(1+theta)*r^2

  for (double p0 : {0.0, 2.0, 5.0}) {
    EnsembleSpec spec;
    spec.count = 200;
    spec.radius_xi = 2.0;
    spec.radius_u = 1.0;
    spec.horizon = 15.0;
    spec.steps_per_delay = 32;
    spec.seed = 42;
    spec.fixed_components[0] = p0;

    auto rep = check_razumikhin(mdl, premise, spec);
    chk.require(rep.satisfied, "Razumikhin premise failed at p0=" +
                                   std::to_string(p0) + " (slack " +
                                   std::to_string(rep.worst_slack) + ")");

    FitSpec fit;
    fit.form = EstimateForm::OLIOS_COMPACT_MAX;
    fit.gamma = premise.gamma;
    fit.rho = premise.rho;
    EstimateCandidate fitted = fit_kl_candidate(mdl, spec, fit);
    auto fitted_rep = check_estimate(mdl, fitted, spec);
    chk.require(fitted_rep.satisfied,
                "fitted compact candidate failed at p0=" + std::to_string(p0));
  }

  // decay slowdown signature: threshold-crossing times scale like 1+p0^2
  auto crossing_time = [&](double p0) {
    auto xi = HistorySegment::constant(theta, 64, {p0, 1.0});
    Trajectory traj =
        simulate(mdl, xi, InputSignal::zero(1), {250.0, 64, 1e12});
    double v0 = output_norm_of(mdl, xi);
    for (long row = 64; row < traj.row_count(); ++row)
      if (traj.output_norm(row) < 0.01 * v0) return traj.time_of_row(row);
    return -1.0;
  };
  double t0 = crossing_time(0), t2 = crossing_time(2), t5 = crossing_time(5);
  chk.require(t0 > 0 && t2 > 0 && t5 > 0, "threshold crossing not reached");
  chk.require(t0 < t2 && t2 < t5, "crossing times not monotone in p0");
  for (auto [tp, p0] : {std::pair{t2, 2.0}, std::pair{t5, 5.0}}) {
    double ratio = tp / t0, scale = 1 + p0 * p0;
    chk.require(ratio >= 0.5 * scale && ratio <= 2.0 * scale,
                "crossing ratio " + std::to_string(ratio) +
                    " outside [0.5, 2] x " + std::to_string(scale));
  }
}

void c3_integrator_oracle(Check& chk) {
  SystemModel mdl = make_model("linear-dde", 0.5);
  auto xi64 = HistorySegment::constant(0.5, 64, {1.0});
  Trajectory traj = simulate(mdl, xi64, InputSignal::zero(1), {1.0, 64, 1e12});
  struct { double t, want; } pts[] = {{0.25, 0.75}, {0.5, 0.5}, {1.0, 0.125}};
  for (auto [t, want] : pts)
    chk.require(std::abs(traj.state_row(traj.row_of_time(t))[0] - want) < 1e-8,
                "closed form mismatch at t=" + std::to_string(t));

  auto at = [&](int steps) {
    auto xi = HistorySegment::constant(0.5, steps, {1.0});
    Trajectory tr = simulate(mdl, xi, InputSignal::zero(1), {5.0, steps, 1e12});
    return tr.state_row(tr.row_count() - 1)[0];
  };
  double c1 = at(8), c2 = at(16), c3 = at(32);
  double ratio = std::abs(c1 - c2) / std::abs(c2 - c3);
  chk.require(ratio >= 8.0 && ratio <= 32.0,
              "step-halving ratio " + std::to_string(ratio));
}

void c4_funclib_suite(Check& chk) {
  // Lagrange conversion inequality at 1e4 random points
  auto sigma = parse_comparison("id");
  auto beta = parse_kl("exp-kl:1,1");
  auto conv = lagrange_convert(sigma, beta);
  Rng rng(404);
  int violations = 0;
  for (int i = 0; i < 10000; ++i) {
    double r = rng.uniform(0.0, 10.0), s = rng.uniform(0.0, 10.0),
           t = rng.uniform(0.0, 10.0);
    double lhs = std::min(sigma(s), beta(r, t));
    if (lhs > conv.beta_hat(s, t / (1 + conv.rho_hat(r))) * (1 + 1e-9) + 1e-12)
      ++violations;
  }
  chk.require(violations == 0,
              std::to_string(violations) + " Lagrange violations");

  // margin predicate on the declared grid
  for (const char* expr : {"id", "linear:2"}) {
    auto sg = parse_comparison(expr);
    auto lam = synthesize_margin(sg);
    for (double s : log_grid(1e-6, 1e6, 200))
      chk.require(sg(lam(sg(s))) <= 0.99 * s / 4,
                  std::string("margin predicate failed for ") + expr);
  }
  auto sq = normalize_margin_gain(parse_comparison("power:2"));
  auto lam_sq = synthesize_margin(sq);
  for (double s : log_grid(1e-6, 1e6, 200))
    chk.require(sq(lam_sq(sq(s))) <= 0.99 * s / 4,
                "margin predicate failed for normalized power:2");

  // decay-time family: post-T decay on ~1e3 sampled (r, s)
  DecayTimeFamily fam = decay_time_family(beta);
  for (double r : log_grid(1e-2, 10, 32))
    for (double s : log_grid(1e-2, 10, 32))
      for (double d : {0.0, 0.1, 1.0})
        chk.require(beta(r, fam(r, s) + d) < s, "post-T decay failed");

  // history-norm lift dominance
  KLFunction lifted = lift_to_history_norm(beta, 0.5);
  for (double r : log_grid(1e-3, 10, 24))
    for (double t : linear_grid(0.5, 25, 40))
      chk.require(beta(r, t - 0.5) <= lifted(r, t) * (1 + 1e-9),
                  "lift dominance failed");
}

void c5_redefinition_oracle(Check& chk) {
  SystemModel lin = make_model("delay-free-lin", 0.25);
  RedefinitionSpec spec;
  spec.beta = parse_kl("exp-kl:2,1");
  spec.gamma = parse_comparison("linear:2");
  spec.segments = 5;
  spec.magnitudes = 6;  // 11 signed levels on the admissible interval
  spec.restarts = 2;
  spec.steps_per_delay = 16;
  spec.seed = 505;

  Rng rng(505);
  for (int k = 0; k < 50; ++k) {
    auto a = random_in_ball(rng, 1, 2.0);
    auto b = random_in_ball(rng, 1, 2.0);
    auto xi = HistorySegment::from_function(
        0.25, 16, 1, [&](double s, std::span<double> out) {
          double w = (s + 0.25) / 0.25;
          out[0] = (1 - w) * a[0] + w * b[0];
        });
    auto est = estimate_hbar(lin, xi, spec);
    double expect = std::abs(xi.sample(16)[0]);
    chk.require(std::abs(est.value - expect) <= 1e-6,
                "hbar estimate off by " + std::to_string(est.value - expect));
    chk.require(output_norm_of(lin, xi) <= est.value + 1e-12 &&
                    est.value <= est.upper + 1e-9,
                "hbar sandwich failed");
    if (k < 3) {
      auto brute = brute_force_hbar(lin, xi, spec);
      chk.require(brute.value <= est.value + 1e-6,
                  "brute force beat the estimate by " +
                      std::to_string(brute.value - est.value));
    }
    if (!chk.ok) return;
  }

  // bracket-aware validation on the three-state example
  SystemModel redef = make_model("ex-redef", 0.5);
  RedefinitionSpec rspec;
  rspec.beta = parse_kl("slowdown-kl:2,0.25,1.2247448713915889");
  rspec.gamma = parse_comparison("linear:2.8284271247461903");
  rspec.segments = 3;
  rspec.magnitudes = 4;
  rspec.restarts = 1;
  rspec.steps_per_delay = 16;
  rspec.horizon_cap = 20.0;
  rspec.seed = 606;

  EnsembleSpec ens;
  ens.count = 100;
  ens.radius_xi = 1.5;
  ens.radius_u = 0.5;
  ens.horizon = 8.0;
  ens.steps_per_delay = 32;
  ens.seed = 707;
  auto rep = validate_redefinition(redef, rspec, ens, {0.0, 2.0, 5.0});
  chk.require(rep.satisfied, "bracket-aware validation failed (ios " +
                                 std::to_string(rep.worst_ios_slack) + ", ol " +
                                 std::to_string(rep.worst_ol_slack) + ")");
}

void c6_margin_suite(Check& chk) {
  // scalar loop: decay under all three adversary classes
  SystemModel lin = make_model("delay-free-lin", 0.25);
  ClosedLoopModel lin_loop =
      build_closed_loop(lin, normalize_margin_gain(parse_comparison("linear:2")));
  EnsembleSpec ens;
  ens.count = 20;
  ens.radius_xi = 2.0;
  ens.horizon = 12.0;
  ens.steps_per_delay = 32;
  ens.seed = 808;
  RobustReport lin_rep =
      verify_robust(lin_loop, RobustVariant::RGAOS, AdversarySpec{}, ens);
  chk.require(lin_rep.satisfied, "scalar closed loop not robustly stable");
  chk.require(lin_rep.fitted_rate >= 0.9,
              "fitted rate " + std::to_string(lin_rep.fitted_rate) + " < 0.9");
  chk.require(lin_rep.worst_robust_ol_slack >= -1e-6, "robust OL bound failed");
  chk.require(lin_rep.rfc_ok, "closed-loop reachability envelope failed");

  // energy-output loop: invariance of the zero-output set
  SystemModel w2 = make_model("ex-redef-w2", 0.5);
  auto w2_gain = ComparisonFunction::make(
      "2r+2r^2", FunctionClass::Kinf,
      [](double r) { return 2 * r + 2 * r * r; });
  ClosedLoopModel w2_loop = build_closed_loop(w2, normalize_margin_gain(w2_gain));

  EnsembleSpec zens = ens;
  zens.count = 20;
  zens.zero_output_members = 20;
  zens.seed = 909;
  zens.horizon = 8.0;
  RobustReport zrep =
      verify_robust(w2_loop, RobustVariant::OL_RGAOS, AdversarySpec{}, zens);
  chk.require(zrep.invariance_ok && zrep.invariance_peak <= 1e-9,
              "zero-output invariance peak " +
                  std::to_string(zrep.invariance_peak));
  chk.require(zrep.worst_robust_ol_slack >= -1e-6,
              "robust OL bound failed on invariance runs");
  chk.require(zrep.rfc_ok, "reachability envelope failed on invariance runs");

  EnsembleSpec gens = ens;
  gens.seed = 1010;
  gens.horizon = 8.0;
  RobustReport grep =
      verify_robust(w2_loop, RobustVariant::OL_RGAOS, AdversarySpec{}, gens);
  chk.require(grep.worst_robust_ol_slack >= -1e-6,
              "robust OL slack " + std::to_string(grep.worst_robust_ol_slack));
  chk.require(grep.rfc_ok, "reachability envelope failed");
  chk.require(grep.satisfied, "energy-output robust verification failed");
}

void c7_determinism(Check& chk) {
  using Args = std::vector<std::string>;
  auto reports = std::vector<std::pair<std::string, Args>>{
      {"certify",
       {"certify", "--model", "delay-free-lin", "--form", "IOS-max", "--beta",
        "exp-kl:2,1", "--gamma", "linear:2", "--seed", "5", "--ensemble-size",
        "12", "--horizon", "6", "--steps-per-delay", "16"}},
      {"razumikhin",
       {"razumikhin", "--model", "ex-raz-v", "--form", "RAZ-OL", "--beta",
        "exp-kl:3,1", "--rho", "power:2", "--kappa", "linear:0.6", "--gamma",
        "scaled-power:3.3,2", "--seed", "11", "--ensemble-size", "12",
        "--horizon", "6", "--steps-per-delay", "16"}},
      {"redefine",
       {"redefine", "--model", "delay-free-lin", "--xi", "const:1.5", "--beta",
        "exp-kl:2,1", "--gamma", "linear:2", "--seed", "3", "--segments", "3",
        "--levels", "5", "--restarts", "2"}},
      {"margin",
       {"margin", "--model", "delay-free-lin", "--sigma", "linear:2",
        "--variant", "RGAOS", "--seed", "9", "--ensemble-size", "8",
        "--horizon", "8", "--steps-per-delay", "16"}},
      {"simulate",
       {"simulate", "--model", "linear-dde", "--xi", "const:1", "--T", "2"}},
  };
  for (auto& [name, args] : reports) {
    // identical config both times; only the worker count changes
    std::string out = "/tmp/dios_acc_" + name;     // simulate takes a prefix
    if (name != "simulate") out += ".json";
    std::string report = name == "simulate" ? out + ".json" : out;
    Args a = args;
    a.insert(a.end(), {"--out", out});
    setenv("DIOS_THREADS", "1", 1);
    int c1 = run(a);
    std::string b1 = slurp(report);
    setenv("DIOS_THREADS", "4", 1);
    int c2 = run(a);
    std::string b2 = slurp(report);
    unsetenv("DIOS_THREADS");
    chk.require(c1 == c2, name + ": exit codes differ");
    chk.require(c1 == 0, name + ": run failed");
    chk.require(!b1.empty() && b1 == b2, name + ": reports differ across "
                                                "thread counts");
  }
}

}  // namespace

int main() {
  criterion(1, "three-state example reproduction", 60, c1_redef_example);
  criterion(2, "parameterized Razumikhin example", 120, c2_razumikhin_example);
  criterion(3, "integrator closed-form oracle and convergence", 0,
            c3_integrator_oracle);
  criterion(4, "comparison-function property suite", 30, c4_funclib_suite);
  criterion(5, "output-redefinition oracle", 0, c5_redefinition_oracle);
  criterion(6, "feedback-margin suite", 0, c6_margin_suite);
  criterion(7, "byte-identical reports across thread counts", 0,
            c7_determinism);
  if (g_failures) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all acceptance criteria passed\n");
  return 0;
}
