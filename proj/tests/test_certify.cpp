#include <cmath>

#include "dios/certify.hpp"
#include "dios/errors.hpp"
#include "dios/linalg.hpp"
#include "doctest.h"

using namespace dios;

namespace {

EnsembleSpec small_ensemble(uint64_t seed, int count = 40) {
  EnsembleSpec spec;
  spec.count = count;
  spec.seed = seed;
  spec.radius_xi = 2.0;
  spec.radius_u = 1.0;
  spec.horizon = 8.0;
  spec.steps_per_delay = 32;
  return spec;
}

}  // namespace

TEST_CASE("check_estimate: analytic IOS certificate for the scalar ODE") {
  SystemModel mdl = make_model("delay-free-lin", 0.25);
  EstimateCandidate cand;
  cand.form = EstimateForm::IOS_MAX;
  cand.beta = parse_kl("exp-kl:2,1");
  cand.gamma = parse_comparison("linear:2");
  auto rep = check_estimate(mdl, cand, small_ensemble(3));
  CHECK(rep.satisfied);
  CHECK(rep.worst_slack >= 0.0);
}

TEST_CASE("check_estimate: zero ensemble is satisfied with nonnegative slack") {
  SystemModel mdl = make_model("delay-free-lin", 0.25);
  EstimateCandidate cand;
  cand.form = EstimateForm::IOS;
  cand.beta = parse_kl("exp-kl:2,1");
  cand.gamma = parse_comparison("linear:2");
  EnsembleSpec spec = small_ensemble(4, 10);
  spec.radius_xi = 0.0;
  spec.radius_u = 0.0;
  auto rep = check_estimate(mdl, cand, spec);
  CHECK(rep.satisfied);
  CHECK(rep.worst_slack >= 0.0);
}

TEST_CASE("check_estimate: OL-GS is falsified from the zero-output set") {
  SystemModel mdl = make_model("ex-redef", 0.5);
  EstimateCandidate cand;
  cand.form = EstimateForm::OL_GS;
  cand.sigma = parse_comparison("linear:1000");
  EnsembleSpec spec = small_ensemble(7, 20);
  spec.horizon = 12.0;
  auto rep = check_estimate(mdl, cand, spec);
  CHECK_FALSE(rep.satisfied);
  CHECK(rep.worst_slack < 0.0);
  CHECK(rep.witness.member >= 0);
  CHECK(rep.used_history_norm);  // delay-free output switches to H(xi)
}

TEST_CASE("check_estimate: missing functions are reported") {
  SystemModel mdl = make_model("delay-free-lin", 0.25);
  EstimateCandidate cand;
  cand.form = EstimateForm::IOS;
  cand.beta = parse_kl("exp-kl:2,1");
  CHECK_THROWS_AS(check_estimate(mdl, cand, small_ensemble(1, 2)),
                  MissingFunction);
}

TEST_CASE("check_razumikhin: premise from the parameterized example") {
  SystemModel mdl = make_model("ex-raz-v", 0.1);
  EstimateCandidate cand;
  cand.form = EstimateForm::RAZ_OL;
  cand.beta = parse_kl("exp-kl:3,1");
  cand.rho = parse_comparison("power:2");
  cand.kappa = parse_comparison("linear:0.6");  // 6*theta, theta = 0.1
  cand.gamma = parse_comparison("scaled-power:3.3,2");
  EnsembleSpec spec = small_ensemble(42, 60);
  spec.horizon = 12.0;
  auto rep = check_razumikhin(mdl, cand, spec);
  CHECK(rep.satisfied);

  // a larger frozen parameter within |p0| <= 3 still passes
  spec.fixed_components[0] = 3.0;
  auto rep3 = check_razumikhin(mdl, cand, spec);
  CHECK(rep3.satisfied);
}

TEST_CASE("check_razumikhin: vacuous and falsified candidates") {
  SystemModel mdl = make_model("ex-raz-v", 0.1);
  EstimateCandidate vac;
  vac.form = EstimateForm::RAZ_SI;
  vac.beta = parse_kl("exp-kl:1000,0.001");
  vac.kappa = parse_comparison("zero");
  vac.gamma = parse_comparison("linear:1000");
  auto rep = check_razumikhin(mdl, vac, small_ensemble(5, 15));
  CHECK(rep.satisfied);

  EstimateCandidate bad;
  bad.form = EstimateForm::RAZ_IOS;
  bad.beta = parse_kl("exp-kl:0.0001,5");
  bad.kappa = parse_comparison("linear:0.01");
  bad.gamma = parse_comparison("linear:0.0001");
  auto repb = check_razumikhin(mdl, bad, small_ensemble(5, 15));
  CHECK_FALSE(repb.satisfied);
  CHECK(repb.witness.member >= 0);

  EstimateCandidate expanding;
  expanding.form = EstimateForm::RAZ_IOS;
  expanding.beta = parse_kl("exp-kl:1,1");
  expanding.kappa = parse_comparison("linear:1.5");  // not a contraction
  expanding.gamma = parse_comparison("linear:1");
  CHECK_THROWS_AS(check_razumikhin(mdl, expanding, small_ensemble(5, 5)),
                  ConfigError);

  SystemModel delayed = make_model("ex-redef", 0.5);
  delayed.h0 = nullptr;  // no delay-free output map
  CHECK_THROWS_AS(check_razumikhin(delayed, vac, small_ensemble(5, 5)),
                  NoDelayFreeOutput);
}

TEST_CASE("lift_to_history_norm dominates the shifted function") {
  auto beta = parse_kl("exp-kl:1,1");
  double theta = 0.5;
  KLFunction lifted = lift_to_history_norm(beta, theta);
  Rng rng(77);
  for (int i = 0; i < 500; ++i) {
    double r = rng.uniform(1e-3, 10.0), t = rng.uniform(theta, 25.0);
    CHECK(beta(r, t - theta) <= lifted(r, t) * (1 + 1e-9));
  }
  CHECK(lifted(0.0, 1.0) == doctest::Approx(0.0).epsilon(1e-12));
  // exponential case: lift is the exact shift up to envelope slack
  KLFunction tight = lift_to_history_norm(beta, 1e-9);
  CHECK(tight(1.0, 1.0) <= 2.0 * beta(1.0, 1.0));
}

TEST_CASE("estimate_asymptotic_gain: scalar ODE tail gain") {
  SystemModel mdl = make_model("delay-free-lin", 0.25);
  EnsembleSpec spec = small_ensemble(9, 12);
  spec.horizon = 24.0;  // about 24 decay time constants
  auto gain = estimate_asymptotic_gain(mdl, {0.0, 0.5, 1.0, 2.0}, spec);
  CHECK(gain(0.0) == 0.0);
  CHECK(gain(2.0) <= 2.0 + 1e-6);
  double prev = 0;
  for (double a : {0.0, 0.5, 1.0, 2.0, 3.0}) {
    CHECK(gain(a) >= prev);
    prev = gain(a);
  }
}

TEST_CASE("implication chain: SI-IOS candidates derive OL-GS and IOS") {
  SystemModel mdl = make_model("delay-free-lin", 0.25);
  EstimateCandidate si;
  si.form = EstimateForm::SI_IOS_MAX;
  si.beta = parse_kl("exp-kl:2,1");
  si.gamma = parse_comparison("linear:2");
  EnsembleSpec spec = small_ensemble(13, 30);

  auto rep_si = check_estimate(mdl, si, spec);
  CHECK(rep_si.satisfied);

  auto rep_ol = check_estimate(mdl, derive_olgs_from_si(si), spec);
  CHECK(rep_ol.satisfied);

  auto rep_ios = check_estimate(mdl, derive_ios_from_si(si, mdl.pi), spec);
  CHECK(rep_ios.satisfied);
}

TEST_CASE("razumikhin soundness: premise + GS yields a passing fitted IOS") {
  SystemModel mdl = make_model("ex-raz", 0.1);
  EnsembleSpec spec = small_ensemble(21, 60);
  spec.horizon = 12.0;

  EstimateCandidate raz;
  raz.form = EstimateForm::RAZ_IOS;
  raz.beta = parse_kl("powexp-kl:1.7321,1,0.1");
  raz.kappa = parse_comparison("linear:0.775");
  raz.gamma = parse_comparison("linear:2.6");
  CHECK(check_razumikhin(mdl, raz, spec).satisfied);

  EstimateCandidate gs;
  gs.form = EstimateForm::GS;
  gs.sigma = parse_comparison("linear:3");
  gs.mu = parse_comparison("linear:3");
  CHECK(check_estimate(mdl, gs, spec).satisfied);

  FitSpec fit;
  fit.form = EstimateForm::IOS_MAX;
  fit.gamma = parse_comparison("linear:3");
  EstimateCandidate fitted = fit_kl_candidate(mdl, spec, fit);
  auto rep = check_estimate(mdl, fitted, spec);
  CHECK(rep.satisfied);
}

TEST_CASE("worst slack is reproducible for a fixed seed") {
  SystemModel mdl = make_model("ex-raz-v", 0.1);
  EstimateCandidate cand;
  cand.form = EstimateForm::OGS;
  cand.sigma = parse_comparison("scaled-power:4,2");
  cand.gamma = parse_comparison("scaled-power:4,2");
  EnsembleSpec spec = small_ensemble(33, 25);
  auto a = check_estimate(mdl, cand, spec, 1);
  auto b = check_estimate(mdl, cand, spec, 4);
  CHECK(a.worst_slack == b.worst_slack);
  CHECK(a.witness.member == b.witness.member);
  CHECK(a.witness.t == b.witness.t);
}

TEST_CASE("UBIBS accepts an additive constant, GS does not") {
  SystemModel mdl = make_model("delay-free-lin", 0.25);
  EstimateCandidate cand;
  cand.form = EstimateForm::UBIBS;
  cand.sigma = parse_comparison("linear:1.2");
  cand.mu = parse_comparison("linear:1.2");
  cand.c = 0.5;
  CHECK(check_estimate(mdl, cand, small_ensemble(2, 20)).satisfied);
}

TEST_CASE("OAG form: tail window against the declared gain") {
  SystemModel mdl = make_model("delay-free-lin", 0.25);
  EstimateCandidate cand;
  cand.form = EstimateForm::OAG;
  cand.gamma = parse_comparison("id");
  EnsembleSpec spec = small_ensemble(15, 20);
  spec.horizon = 24.0;  // >= 20 decay time constants before the tail window
  auto rep = check_estimate(mdl, cand, spec);
  CHECK(rep.satisfied);

  cand.gamma = parse_comparison("linear:0.01");  // gain far too small
  auto bad = check_estimate(mdl, cand, spec);
  CHECK_FALSE(bad.satisfied);
}

TEST_CASE("empirical gain serializes its staircase") {
  SystemModel mdl = make_model("delay-free-lin", 0.25);
  EnsembleSpec spec = small_ensemble(16, 6);
  spec.horizon = 24.0;
  auto gain = estimate_asymptotic_gain(mdl, {0.0, 1.0}, spec);
  auto desc = gain.describe();
  CHECK(desc.contains("payload"));
  CHECK(desc["payload"]["staircase"].size() == 2);
}

TEST_CASE("RFC form consumes an envelope from funclib") {
  SystemModel mdl = make_model("linear-dde", 0.5);
  EnsembleSpec spec = small_ensemble(6, 25);
  // generous affine envelope: |x| stays below max(|xi|, |u|) for this system
  EstimateCandidate cand;
  cand.form = EstimateForm::RFC;
  cand.chi = parse_comparison("linear:2");
  cand.c = 0.1;
  auto rep = check_estimate(mdl, cand, spec);
  CHECK(rep.satisfied);
}
