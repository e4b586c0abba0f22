#include <cmath>

#include "dios/errors.hpp"
#include "dios/linalg.hpp"
#include "dios/redef.hpp"
#include "doctest.h"

using namespace dios;

namespace {

RedefinitionSpec lin_spec(uint64_t seed) {
  RedefinitionSpec spec;
  spec.beta = parse_kl("exp-kl:2,1");
  spec.gamma = parse_comparison("linear:2");
  spec.segments = 3;
  spec.magnitudes = 5;
  spec.restarts = 2;
  spec.steps_per_delay = 16;
  spec.seed = seed;
  return spec;
}

HistorySegment random_history(Rng& rng, double theta, int steps, int dim,
                              double radius) {
  auto a = random_in_ball(rng, dim, radius);
  auto b = random_in_ball(rng, dim, radius);
  return HistorySegment::from_function(
      theta, steps, dim, [&](double s, std::span<double> out) {
        double w = (s + theta) / theta;
        for (int c = 0; c < dim; ++c) out[c] = (1 - w) * a[c] + w * b[c];
      });
}

}  // namespace

TEST_CASE("estimate_hbar: zero state gives zero") {
  SystemModel mdl = make_model("delay-free-lin", 0.25);
  auto est = estimate_hbar(mdl, HistorySegment::constant(0.25, 16, {0.0}),
                           lin_spec(1));
  CHECK(est.value == 0.0);
  CHECK(est.upper == 0.0);
}

TEST_CASE("estimate_hbar: scalar ODE maximizer is the initial output") {
  SystemModel mdl = make_model("delay-free-lin", 0.25);
  Rng rng(41);
  for (int rep = 0; rep < 8; ++rep) {
    auto xi = random_history(rng, 0.25, 16, 1, 2.0);
    auto est = estimate_hbar(mdl, xi, lin_spec(7 + rep));
    double expect = std::abs(xi.sample(16)[0]);
    CHECK(est.value == doctest::Approx(expect).epsilon(1e-6));
    CHECK(est.value >= expect - 1e-12);         // never below |h(xi)|
    CHECK(est.value <= est.upper + 1e-9);       // bracket validity
  }
}

TEST_CASE("estimate_hbar: brute force over the level grid never beats it") {
  SystemModel mdl = make_model("delay-free-lin", 0.25);
  Rng rng(43);
  auto xi = random_history(rng, 0.25, 16, 1, 2.0);
  RedefinitionSpec spec = lin_spec(3);
  auto est = estimate_hbar(mdl, xi, spec);
  auto brute = brute_force_hbar(mdl, xi, spec);
  CHECK(brute.value <= est.value + 1e-6);
  CHECK(brute.evaluations > 100);
}

TEST_CASE("estimate_hbar: more restarts or segments never lose ground") {
  SystemModel mdl = make_model("ex-redef", 0.5);
  RedefinitionSpec base;
  base.beta = parse_kl("slowdown-kl:2,0.25,1.2247448713915889");
  base.gamma = parse_comparison("linear:2.8284271247461903");
  base.segments = 1;
  base.magnitudes = 4;
  base.restarts = 1;
  base.steps_per_delay = 8;
  base.horizon_cap = 15.0;
  base.seed = 5;

  Rng rng(47);
  auto xi = random_history(rng, 0.5, 8, 3, 1.5);
  auto v1 = estimate_hbar(mdl, xi, base);

  RedefinitionSpec more = base;
  more.restarts = 3;
  auto v2 = estimate_hbar(mdl, xi, more);
  CHECK(v2.value >= v1.value - 1e-12);

  RedefinitionSpec wide = more;
  wide.segments = 3;
  auto v3 = estimate_hbar(mdl, xi, wide);
  CHECK(v3.value >= v1.value - 1e-12);
}

TEST_CASE("estimate_hbar: zero-set consistency through the bracket") {
  SystemModel mdl = make_model("delay-free-lin", 0.25);
  auto xi = HistorySegment::from_function(
      0.25, 16, 1, [](double s, std::span<double> out) { out[0] = -s; });
  // upper bracket below tol forces |h(xi)| below tol
  auto est = estimate_hbar(mdl, xi, lin_spec(9));
  if (est.upper < 1e-9) CHECK(output_norm_of(mdl, xi) < 1e-9);
  CHECK(output_norm_of(mdl, xi) <= est.value + 1e-12);
}

TEST_CASE("estimate_hbar requires a certificate") {
  SystemModel mdl = make_model("delay-free-lin", 0.25);
  RedefinitionSpec spec;  // no beta/gamma
  CHECK_THROWS_AS(
      estimate_hbar(mdl, HistorySegment::constant(0.25, 16, {1.0}), spec),
      NoCertificate);
}

TEST_CASE("hbar difference quotient: scalar ODE has unit modulus") {
  // hbar(xi) = |xi(0)| there, so constant shifts move it at unit rate
  SystemModel mdl = make_model("delay-free-lin", 0.25);
  auto xi = HistorySegment::constant(0.25, 16, {1.0});
  auto mod = hbar_difference_quotient(mdl, xi, lin_spec(13), 0.05, 3);
  CHECK(mod.max_quotient == doctest::Approx(1.0).epsilon(1e-6));
  CHECK_THROWS_AS(hbar_difference_quotient(mdl, xi, lin_spec(13), 0.0),
                  ConfigError);
}

TEST_CASE("validate_redefinition: scalar ODE passes bracket-aware checks") {
  SystemModel mdl = make_model("delay-free-lin", 0.25);
  RedefinitionSpec spec = lin_spec(11);
  EnsembleSpec ens;
  ens.count = 10;
  ens.seed = 19;
  ens.radius_xi = 1.5;
  ens.radius_u = 0.5;
  ens.horizon = 4.0;
  ens.steps_per_delay = 16;
  auto rep = validate_redefinition(mdl, spec, ens, {0.0, 1.0, 2.0});
  CHECK(rep.satisfied);
  CHECK(rep.worst_sandwich_slack >= -rep.tolerance);
}
