#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "dios/comparison.hpp"
#include "dios/signals.hpp"

namespace dios {

/// One finite-delay system dx/dt = f(x_t, u(t)), y = h(x_t). The output map
/// must satisfy h(0) = 0 and |h(xi)| <= pi(|xi|); f(0,0) = 0 is not assumed.
struct SystemModel {
  std::string id;
  int n = 0, m = 0, p = 0;
  double theta = 0;

  std::function<void(const HistoryView&, std::span<const double>,
                     std::span<double>)>
      f;  // (x_t, u) -> dx/dt
  std::function<void(const HistoryView&, std::span<double>)> h;  // x_t -> y
  /// Delay-free output map h(xi) = h0(xi(0)), when one exists.
  std::function<void(std::span<const double>, std::span<double>)> h0;
  ComparisonFunction pi;  // class N output bound

  /// Maps a history onto the zero-output set (used by falsification
  /// ensembles and invariance checks); optional.
  std::function<HistorySegment(const HistorySegment&)> zero_output_projector;

  bool delay_free_output() const { return bool(h0); }
};

struct SimConfig {
  double horizon = 10.0;       // must be a multiple of theta/steps_per_delay
  int steps_per_delay = 64;    // grid step = theta / N; delayed lookups exact
  double blowup_guard = 1e12;
};

/// Fixed-step RK4 with the grid aligned to the delay: stage lookups of past
/// state use stored samples (cubic Hermite between nodes for the half-step
/// stages). Deterministic: identical inputs give bit-identical trajectories.
/// Throws BlowUp when |x(t)| crosses the guard.
Trajectory simulate(const SystemModel& model, const HistorySegment& xi,
                    const InputSignal& u, const SimConfig& cfg);

/// As simulate(), but the input is chosen per step by `choose` from the step
/// base time and the current window, then frozen across the four stages.
/// Used for output feedback, where u depends on the state.
Trajectory simulate_with_feedback(
    const SystemModel& model, const HistorySegment& xi,
    const std::function<std::vector<double>(double, const HistoryView&)>& choose,
    const SimConfig& cfg);

/// Per-step adversarial input: `candidates` are tried with one trial RK step
/// each; the candidate maximizing |y| at the step end wins.
Trajectory simulate_greedy(
    const SystemModel& model, const HistorySegment& xi,
    const std::vector<std::vector<double>>& candidates,
    const std::function<std::vector<double>(double, const HistoryView&,
                                            std::span<const double>)>& shape,
    const SimConfig& cfg);

/// Evaluate y = h(x_t); convenience for initial states.
std::vector<double> output_of(const SystemModel& model, const HistorySegment& xi);
double output_norm_of(const SystemModel& model, const HistorySegment& xi);

/// H(xi) = max over the delay window of |h0(xi(s))| (delay-free outputs).
double output_history_norm_of(const SystemModel& model, const HistorySegment& xi);

// ---- model registry ----

using ModelFactory = std::function<SystemModel(double theta)>;

/// Built-in models:
///   linear-dde       dx = -x(t-theta) + u, y = x
///   delay-free-lin   dx = -x + u (history ignored), y = x
///   ex-raz           states (p, x); dp = 0, dx = (-x(t-theta)+u)/(1+p^2), y = x
///   ex-raz-v         same dynamics, y = x^2/2
///   ex-redef         3-state system with rotation driven by the history
///                    norm; y = x3
///   ex-redef-w2      same dynamics, y = (x2^2 + x3^2)/2
const std::map<std::string, ModelFactory>& builtin_models();

/// Instantiate by id; theta <= 0 selects the model's default delay.
SystemModel make_model(const std::string& id, double theta = 0);

}  // namespace dios
