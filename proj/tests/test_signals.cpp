#include <cmath>
#include <cstring>

#include "dios/dde.hpp"
#include "dios/errors.hpp"
#include "dios/linalg.hpp"
#include "dios/signals.hpp"
#include "doctest.h"

using namespace dios;

TEST_CASE("history norm") {
  CHECK(HistorySegment::constant(1.0, 4, {3.0, 4.0}).sup_norm() == 5.0);
  CHECK(HistorySegment::constant(1.0, 4, {0.0, 0.0}).sup_norm() == 0.0);
  auto ramp = HistorySegment::from_function(
      1.0, 4, 1, [](double s, std::span<double> out) { out[0] = s; });
  CHECK(ramp.sup_norm() == 1.0);  // max over {1, .75, .5, .25, 0}
}

TEST_CASE("history invariants: grid alignment and finiteness") {
  CHECK_THROWS_AS(HistorySegment(1.0, 4, 1, std::vector<double>(4, 0.0)),
                  ConfigMismatch);
  std::vector<double> bad(5, 0.0);
  bad[2] = std::nan("");
  CHECK_THROWS_AS(HistorySegment(1.0, 4, 1, bad), ConfigMismatch);
}

TEST_CASE("input signals: values and exact window norms") {
  InputSignal u({0.0, 2.0}, {{1.0}, {3.0}}, 4.0);
  CHECK(u.value(0.0)[0] == 1.0);
  CHECK(u.value(1.999)[0] == 1.0);
  CHECK(u.value(2.0)[0] == 3.0);  // right-continuous
  CHECK(u.value(100.0)[0] == 3.0);
  CHECK(u.sup_norm() == 3.0);
  CHECK(u.sup_norm(0, 2) == 1.0);
  CHECK(u.sup_norm(0, 2.5) == 3.0);
}

TEST_CASE("concat: construction examples") {
  InputSignal v = InputSignal::constant({3.0}, 2.0);
  InputSignal u = InputSignal::constant({1.0}, 2.0);

  InputSignal shifted = concat_input(u, 0.0, v);
  CHECK(shifted.value(0.0)[0] == 3.0);  // tau = 0 returns shifted v

  InputSignal joined = concat_input(u, 2.0, v);
  CHECK(joined.value(1.0)[0] == 1.0);
  CHECK(joined.value(2.0)[0] == 3.0);
  CHECK(joined.value(5.0)[0] == 3.0);
}

TEST_CASE("concat: sup norm decomposes as a max (property)") {
  Rng rng(31);
  for (int rep = 0; rep < 40; ++rep) {
    int nu = rng.uniform_int(1, 4), nv = rng.uniform_int(1, 4);
    std::vector<double> ut{0.0}, vt{0.0};
    std::vector<std::vector<double>> ul, vl;
    for (int i = 1; i < nu; ++i) ut.push_back(ut.back() + rng.uniform(0.1, 2.0));
    for (int i = 1; i < nv; ++i) vt.push_back(vt.back() + rng.uniform(0.1, 2.0));
    for (int i = 0; i < nu; ++i) ul.push_back({rng.uniform(-3, 3)});
    for (int i = 0; i < nv; ++i) vl.push_back({rng.uniform(-3, 3)});
    InputSignal u(ut, ul, ut.back() + 1), v(vt, vl, vt.back() + 1);
    double tau = rng.uniform(0.0, 5.0);
    InputSignal joined = concat_input(u, tau, v);

    double expect = std::max(tau > 0 ? u.sup_norm(0, tau) : 0.0, v.sup_norm());
    CHECK(joined.sup_norm() == doctest::Approx(expect).epsilon(1e-12));

    // gamma(max(a,b)) <= gamma(a) + gamma(b) for an increasing gamma
    auto gamma = [](double r) { return r * r + 2 * r; };
    CHECK(gamma(joined.sup_norm()) <=
          gamma(tau > 0 ? joined.sup_norm(0, tau) : 0.0) +
              gamma(joined.sup_norm(tau)) + 1e-12);
  }
}

TEST_CASE("trajectory: nesting returns stored samples exactly") {
  SystemModel model = make_model("linear-dde", 0.5);
  auto xi = HistorySegment::from_function(
      0.5, 16, 1, [](double s, std::span<double> out) { out[0] = 1 + s; });
  Trajectory traj = simulate(model, xi, InputSignal::zero(1), {4.0, 16, 1e12});

  for (double t : {0.5, 1.0, 2.5}) {
    HistorySegment h = traj.history_at(t);
    long row = traj.row_of_time(t);
    for (int i = 0; i <= h.steps(); ++i) {
      auto stored = traj.state_row(row - h.steps() + i);
      CHECK(std::memcmp(h.sample(i).data(), stored.data(),
                        sizeof(double) * stored.size()) == 0);
    }
  }
}

TEST_CASE("output history norm: window max with a scan oracle") {
  SystemModel model = make_model("linear-dde", 0.5);
  auto xi = HistorySegment::from_function(
      0.5, 16, 1,
      [](double s, std::span<double> out) { out[0] = std::sin(8 * s) + 0.3; });
  Trajectory traj = simulate(model, xi, InputSignal::constant({0.5}, 6.0),
                             {6.0, 16, 1e12});
  for (double t : {0.0, 1.5, 3.0}) {
    long row = traj.row_of_time(t);
    double direct = 0;
    for (long r = row - 16; r <= row; ++r)
      direct = std::max(direct, std::abs(traj.output_row(r)[0]));
    CHECK(traj.output_history_norm(t) == doctest::Approx(direct));
  }
  CHECK(HistorySegment::constant(0.5, 16, {0.0}).sup_norm() == 0.0);
}

TEST_CASE("output history of a stored window: direct maxima") {
  // window values {1, -2, 0.5} -> max |y| = 2, through the V-output model
  SystemModel mdl = make_model("ex-raz", 0.1);
  auto xi = HistorySegment::from_function(
      0.1, 2, 2, [](double s, std::span<double> out) {
        out[0] = 0.0;
        out[1] = s < -0.075 ? 1.0 : (s < -0.025 ? -2.0 : 0.5);
      });
  CHECK(output_history_norm_of(mdl, xi) == 2.0);

  SystemModel vm = make_model("ex-raz-v", 0.1);
  double direct = 0;
  for (int i = 0; i <= xi.steps(); ++i) {
    double x = xi.sample(i)[1];
    direct = std::max(direct, 0.5 * x * x);
  }
  CHECK(output_history_norm_of(vm, xi) == doctest::Approx(direct));
}

TEST_CASE("literals: parse and round-trip") {
  auto xi = parse_history_literal(nlohmann::json::parse(R"({"const":[1,2]})"),
                                  0.5, 8, 2);
  CHECK(xi.sup_norm() == doctest::Approx(std::sqrt(5.0)));

  auto pw = parse_history_literal(
      nlohmann::json::parse(R"({"piecewise":[[-0.5,[0]],[0,[1]]]})"), 0.5, 8, 1);
  CHECK(pw.sample(0)[0] == doctest::Approx(0.0));
  CHECK(pw.sample(8)[0] == doctest::Approx(1.0));
  CHECK(pw.sample(4)[0] == doctest::Approx(0.5));

  auto u = parse_input_literal(
      nlohmann::json::parse(R"({"piecewise":[[0,[1]],[2,[3]]]})"), 1, 4.0, 0.25);
  CHECK(u.value(1.0)[0] == 1.0);
  CHECK(u.value(3.0)[0] == 3.0);
  CHECK_THROWS_AS(
      parse_history_literal(nlohmann::json::parse(R"({"oops":[]})"), 0.5, 8, 1),
      ConfigError);
}

TEST_CASE("resample preserves endpoints") {
  auto xi = HistorySegment::from_function(
      1.0, 32, 1, [](double s, std::span<double> out) { out[0] = s * s; });
  auto re = resample_history(xi, 8);
  CHECK(re.steps() == 8);
  CHECK(re.sample(0)[0] == doctest::Approx(1.0));
  CHECK(re.sample(8)[0] == doctest::Approx(0.0));
}

TEST_CASE("disturbances live in the unit ball") {
  CHECK_THROWS_AS(make_disturbance(InputSignal::constant({1.5}, 1.0)),
                  ConfigMismatch);
  CHECK_NOTHROW(make_disturbance(InputSignal::constant({-1.0}, 1.0)));
}
