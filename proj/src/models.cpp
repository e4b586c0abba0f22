#include <cmath>

#include "dios/dde.hpp"
#include "dios/errors.hpp"

namespace dios {

namespace {

// zeroes one state component over the whole window, placing the history in
// the zero-output set of both the pointwise and the history-norm output
HistorySegment shift_component_to_zero(const HistorySegment& xi, int comp) {
  HistorySegment out = xi;
  for (int i = 0; i <= out.steps(); ++i) out.mutable_sample(i)[comp] = 0.0;
  return out;
}

SystemModel make_linear_dde(double theta) {
  SystemModel mdl;
  mdl.id = "linear-dde";
  mdl.n = mdl.m = mdl.p = 1;
  mdl.theta = theta;
  mdl.f = [](const HistoryView& xt, std::span<const double> u,
             std::span<double> dx) { dx[0] = -xt.delayed()[0] + u[0]; };
  mdl.h = [](const HistoryView& xt, std::span<double> y) { y[0] = xt.head()[0]; };
  mdl.h0 = [](std::span<const double> x, std::span<double> y) { y[0] = x[0]; };
  mdl.pi = parse_comparison("id");
  mdl.zero_output_projector = [](const HistorySegment& xi) {
    return shift_component_to_zero(xi, 0);
  };
  return mdl;
}

SystemModel make_delay_free_lin(double theta) {
  SystemModel mdl = make_linear_dde(theta);
  mdl.id = "delay-free-lin";
  mdl.f = [](const HistoryView& xt, std::span<const double> u,
             std::span<double> dx) { dx[0] = -xt.head()[0] + u[0]; };
  return mdl;
}

// augmented parameterized system: state (p, x) with dp = 0
SystemModel make_ex_raz(double theta, bool v_output) {
  SystemModel mdl;
  mdl.id = v_output ? "ex-raz-v" : "ex-raz";
  mdl.n = 2;
  mdl.m = 1;
  mdl.p = 1;
  mdl.theta = theta;
  mdl.f = [](const HistoryView& xt, std::span<const double> u,
             std::span<double> dx) {
    double p = xt.head()[0];
    double xd = xt.delayed()[1];
    dx[0] = 0.0;
    dx[1] = (-xd + u[0]) / (1 + p * p);
  };
  if (v_output) {
    mdl.h0 = [](std::span<const double> x, std::span<double> y) {
      y[0] = 0.5 * x[1] * x[1];
    };
    mdl.pi = parse_comparison("scaled-power:0.5,2");
  } else {
    mdl.h0 = [](std::span<const double> x, std::span<double> y) { y[0] = x[1]; };
    mdl.pi = parse_comparison("id");
  }
  auto h0 = mdl.h0;
  mdl.h = [h0](const HistoryView& xt, std::span<double> y) { h0(xt.head(), y); };
  mdl.zero_output_projector = [](const HistorySegment& xi) {
    return shift_component_to_zero(xi, 1);
  };
  return mdl;
}

// three-state system whose x2/x3 rotation is driven by the squared history
// norm; x1 feeds only the damping rate
SystemModel make_ex_redef(double theta, bool w2_output) {
  SystemModel mdl;
  mdl.id = w2_output ? "ex-redef-w2" : "ex-redef";
  mdl.n = 3;
  mdl.m = 1;
  mdl.p = 1;
  mdl.theta = theta;
  mdl.f = [](const HistoryView& xt, std::span<const double> u,
             std::span<double> dx) {
    auto x = xt.head();
    double x1d = xt.delayed()[0];
    double nrm = xt.sup_norm();
    double nrm2 = nrm * nrm;
    double damp = 1.0 / (1 + x[0] * x[0]);
    dx[0] = -x[0] + x1d;
    dx[1] = -x[1] * damp - x[2] * nrm2;
    dx[2] = -x[2] * damp + x[1] * nrm2 + u[0] * damp;
  };
  if (w2_output) {
    mdl.h0 = [](std::span<const double> x, std::span<double> y) {
      y[0] = 0.5 * (x[1] * x[1] + x[2] * x[2]);
    };
    mdl.pi = parse_comparison("scaled-power:1,2");
    mdl.zero_output_projector = [](const HistorySegment& xi) {
      return shift_component_to_zero(shift_component_to_zero(xi, 1), 2);
    };
  } else {
    mdl.h0 = [](std::span<const double> x, std::span<double> y) { y[0] = x[2]; };
    mdl.pi = parse_comparison("id");
    mdl.zero_output_projector = [](const HistorySegment& xi) {
      return shift_component_to_zero(xi, 2);
    };
  }
  auto h0 = mdl.h0;
  mdl.h = [h0](const HistoryView& xt, std::span<double> y) { h0(xt.head(), y); };
  return mdl;
}

}  // namespace

const std::map<std::string, ModelFactory>& builtin_models() {
  static const std::map<std::string, ModelFactory> registry = {
      {"linear-dde", [](double th) { return make_linear_dde(th > 0 ? th : 0.5); }},
      {"delay-free-lin",
       [](double th) { return make_delay_free_lin(th > 0 ? th : 0.25); }},
      {"ex-raz", [](double th) { return make_ex_raz(th > 0 ? th : 0.1, false); }},
      {"ex-raz-v", [](double th) { return make_ex_raz(th > 0 ? th : 0.1, true); }},
      {"ex-redef",
       [](double th) { return make_ex_redef(th > 0 ? th : 0.5, false); }},
      {"ex-redef-w2",
       [](double th) { return make_ex_redef(th > 0 ? th : 0.5, true); }},
  };
  return registry;
}

SystemModel make_model(const std::string& id, double theta) {
  auto it = builtin_models().find(id);
  if (it == builtin_models().end())
    throw ConfigError("unknown model '" + id + "'");
  return it->second(theta);
}

}  // namespace dios
