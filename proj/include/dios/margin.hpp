#pragma once

#include "dios/certify.hpp"
#include "dios/dde.hpp"
#include "dios/funclib.hpp"

namespace dios {

/// Output feedback closed loop: dx = f(x_t, d(t) * lambda(|y(t)|)) with
/// disturbances d in the closed unit ball. |y| is frozen over each step
/// (evaluated on the step-base history), preserving RK4 determinism.
struct ClosedLoopModel {
  SystemModel base;
  ComparisonFunction sigma;   // normalized gain the margin was built from
  ComparisonFunction lambda;  // synthesized Kinf margin
};

/// Normalizes a candidate gain so sigma(s) >= s and sigma >= gamma (the
/// margin construction assumes both).
ComparisonFunction normalize_margin_gain(const ComparisonFunction& sigma,
                                         const ComparisonFunction& gamma = {});

/// lambda = synthesize_margin(sigma); sigma must already be normalized.
ClosedLoopModel build_closed_loop(const SystemModel& model,
                                  const ComparisonFunction& sigma);

Trajectory simulate_closed_loop(const ClosedLoopModel& closed,
                                const HistorySegment& xi,
                                const DisturbanceSignal& d, const SimConfig& cfg);

/// Greedy sign-chasing adversary: each step tries the unit-ball extreme
/// directions and keeps the one maximizing |y| at the step end.
Trajectory simulate_closed_loop_greedy(const ClosedLoopModel& closed,
                                       const HistorySegment& xi,
                                       const SimConfig& cfg);

enum class RobustVariant { RGAOS, OL_RGAOS, SI_RGAOS };
std::string to_string(RobustVariant v);
RobustVariant parse_variant(const std::string& name);

/// Adversary classes: "bang-bang" (random unit-sphere switching),
/// "greedy" (sign chasing), "const" (extreme constants and zero).
struct AdversarySpec {
  std::vector<std::string> classes{"bang-bang", "greedy", "const"};
  int bang_bang_switches = 6;
};

struct RobustReport {
  std::string model_id;
  RobustVariant variant = RobustVariant::RGAOS;
  bool satisfied = true;
  double fitted_amplitude = 0, fitted_rate = 0;  // beta(r,t) = a r e^{-ct}
  bool decay_ok = true, lagrange_ok = true, robust_ol_ok = true,
       invariance_ok = true, rfc_ok = true, milestones_ok = true;
  double worst_robust_ol_slack = std::numeric_limits<double>::infinity();
  double invariance_peak = 0;
  double worst_rfc_slack = std::numeric_limits<double>::infinity();
  int blowups = 0;
  Witness witness;
  nlohmann::json adversaries, ensemble, extra;

  nlohmann::json to_json() const;
};

/// Simulates the closed loop against every adversary class over the
/// ensemble and checks, per variant:
///   - a fitted decay envelope |y| <= a*arg*e^{-ct} (arg = |xi| or |h(xi)|),
///   - the robust output-Lagrange bound sigma(lambda(|y|)) <= |h(xi)|/2,
///   - OL-RGAOS additionally |y(t)| <= sigma(|h(xi)|),
///   - forward invariance of the zero-output set,
///   - a reachability envelope |x| <= chi(t)+chi(|xi|)+c on all samples,
///   - iterative halving milestones |y(t)| <= s1/2^k for t >= T_k.
RobustReport verify_robust(const ClosedLoopModel& closed, RobustVariant variant,
                           const AdversarySpec& adversaries,
                           const EnsembleSpec& ensemble, int threads = 0);

}  // namespace dios
