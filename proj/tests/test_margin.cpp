#include <cmath>
#include <cstring>

#include "dios/errors.hpp"
#include "dios/linalg.hpp"
#include "dios/margin.hpp"
#include "doctest.h"

using namespace dios;

TEST_CASE("build_closed_loop: doubled identity gives the 1/32 margin") {
  SystemModel mdl = make_model("delay-free-lin", 0.25);
  auto sigma = normalize_margin_gain(parse_comparison("linear:2"));
  ClosedLoopModel closed = build_closed_loop(mdl, sigma);
  for (double v : {0.1, 1.0, 10.0})
    CHECK(closed.lambda(v) == doctest::Approx(v / 32).epsilon(1e-6));
  for (double s : log_grid(1e-4, 1e4, 50))
    CHECK(sigma(closed.lambda(sigma(s))) < s / 4);
}

TEST_CASE("normalize_margin_gain enforces sigma >= id and sigma >= gamma") {
  auto weak = parse_comparison("linear:0.5");  // wait: slope must be positive but < 1
  auto gamma = parse_comparison("linear:3");
  auto sigma = normalize_margin_gain(weak, gamma);
  for (double s : {0.1, 1.0, 5.0}) {
    CHECK(sigma(s) >= s);
    CHECK(sigma(s) >= gamma(s));
  }
}

TEST_CASE("closed loop on the zero-output set matches the zero-input system") {
  SystemModel mdl = make_model("ex-redef-w2", 0.5);
  auto sigma = normalize_margin_gain(parse_comparison("linear:2"));
  ClosedLoopModel closed = build_closed_loop(mdl, sigma);
  auto xi = HistorySegment::from_function(
      0.5, 32, 3, [](double s, std::span<double> out) {
        out[0] = std::sin(2 * s);
        out[1] = 0.0;
        out[2] = 0.0;
      });
  SimConfig cfg{6.0, 32, 1e12};
  Trajectory loop = simulate_closed_loop(
      closed, xi, InputSignal::constant({1.0}, 6.0), cfg);
  Trajectory open = simulate(mdl, xi, InputSignal::zero(1), cfg);
  for (long row = 0; row < loop.row_count(); ++row)
    CHECK(std::memcmp(loop.state_row(row).data(), open.state_row(row).data(),
                      sizeof(double) * 3) == 0);
}

TEST_CASE("closed-loop contraction oracle for the scalar ODE") {
  SystemModel mdl = make_model("delay-free-lin", 0.25);
  auto sigma = normalize_margin_gain(parse_comparison("linear:2"));
  ClosedLoopModel closed = build_closed_loop(mdl, sigma);
  SimConfig cfg{10.0, 64, 1e12};
  auto xi = HistorySegment::constant(0.25, 64, {1.5});
  double rate = 1.0 - 1.0 / 32.0;

  auto check_traj = [&](const Trajectory& traj) {
    for (long row = 64; row < traj.row_count(); ++row) {
      double t = traj.time_of_row(row);
      // per-step freezing of |y| costs O(dt) in the comparison; 0.1% covers it
      CHECK(std::abs(traj.state_row(row)[0]) <=
            1.5 * std::exp(-rate * t) * 1.001 + 1e-9);
    }
  };
  for (double d : {1.0, -1.0})
    check_traj(simulate_closed_loop(closed, xi,
                                    InputSignal::constant({d}, 10.0), cfg));
  check_traj(simulate_closed_loop_greedy(closed, xi, cfg));
}

TEST_CASE("verify_robust: scalar ODE under all adversary classes") {
  SystemModel mdl = make_model("delay-free-lin", 0.25);
  auto sigma = normalize_margin_gain(parse_comparison("linear:2"));
  ClosedLoopModel closed = build_closed_loop(mdl, sigma);
  EnsembleSpec ens;
  ens.count = 12;
  ens.seed = 91;
  ens.radius_xi = 2.0;
  ens.horizon = 10.0;
  ens.steps_per_delay = 32;
  AdversarySpec adv;
  RobustReport rep = verify_robust(closed, RobustVariant::RGAOS, adv, ens);
  CHECK(rep.satisfied);
  CHECK(rep.fitted_rate >= 0.9);
  CHECK(rep.worst_robust_ol_slack >= -1e-6);
  CHECK(rep.rfc_ok);
  CHECK(rep.milestones_ok);

  RobustReport ol = verify_robust(closed, RobustVariant::OL_RGAOS, adv, ens);
  CHECK(ol.satisfied);
  RobustReport si = verify_robust(closed, RobustVariant::SI_RGAOS, adv, ens);
  CHECK(si.satisfied);
}

TEST_CASE("verify_robust: energy-output system, invariance and robust OL") {
  SystemModel mdl = make_model("ex-redef-w2", 0.5);
  auto w2_gain = ComparisonFunction::make(
      "2r+2r^2", FunctionClass::Kinf, [](double r) { return 2 * r + 2 * r * r; });
  ClosedLoopModel closed = build_closed_loop(mdl, normalize_margin_gain(w2_gain));
  EnsembleSpec ens;
  ens.count = 8;
  ens.seed = 77;
  ens.radius_xi = 1.5;
  ens.horizon = 8.0;
  ens.steps_per_delay = 32;
  ens.zero_output_members = 4;
  RobustReport rep = verify_robust(closed, RobustVariant::OL_RGAOS,
                                   AdversarySpec{}, ens);
  CHECK(rep.invariance_ok);
  CHECK(rep.invariance_peak <= 1e-9);
  CHECK(rep.worst_robust_ol_slack >= -1e-6);
  CHECK(rep.satisfied);
}
