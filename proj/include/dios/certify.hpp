#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dios/dde.hpp"
#include "dios/funclib.hpp"
#include "json.hpp"

namespace dios {

/// Trajectory estimate forms. Sum-and-max variants of the same estimate are
/// both accepted (a+b <= max{2a,2b} makes them interconvertible).
enum class EstimateForm {
  IOS,            // |y(t)| <= beta(|xi|, t) + gamma(|u|)
  IOS_MAX,        // |y(t)| <= max{beta(|xi|, t), gamma(|u|)}
  OL_GS,          // |y(t)| <= max{sigma(A), sigma(|u|)}
  SI_IOS,         // |y(t)| <= beta(A, t) + gamma(|u|)
  SI_IOS_MAX,
  OLIOS_COMPACT,  // |y(t)| <= beta(A, t/(1+rho(|xi|))) + gamma(|u|)
  OLIOS_COMPACT_MAX,
  GS,             // |x(t)| <= sigma(|xi|) + mu(|u|)
  UBIBS,          // |x(t)| <= sigma(|xi|) + mu(|u|) + c
  RFC,            // |x(t)| <= chi(t) + chi(|xi|) + chi(|u|) + c
  OAG,            // tail max of |y| <= 1.05*gamma(|u|) + 1e-6
  OGS,            // |y(t)| <= max{sigma(|xi|), gamma(|u|)}
  RAZ_IOS,        // premise: |y(t)| <= max{beta(|xi|,t), kappa(runmax), gamma(|u|)}
  RAZ_OL,         // premise: |y(t)| <= max{beta(|y_0|, t/(1+rho(|xi|))), ...}
  RAZ_SI,         // premise: |y(t)| <= max{beta(|y_0|, t), kappa(runmax), gamma(|u|)}
};

std::string to_string(EstimateForm form);
EstimateForm parse_form(const std::string& name);
bool is_razumikhin(EstimateForm form);

/// A candidate collection of comparison functions for one estimate form.
/// `A` in the form table is |h(xi)|, replaced by the output-history norm
/// H(xi) when the model has a delay-free output map.
struct EstimateCandidate {
  EstimateForm form = EstimateForm::IOS;
  KLFunction beta;
  ComparisonFunction gamma, sigma, rho, kappa, mu, chi;
  double c = 0;

  /// Throws MissingFunction when a required component is absent, and
  /// ConfigError when kappa fails the contraction requirement kappa(s) < s.
  void validate() const;
  nlohmann::json describe() const;
};

struct EnsembleSpec {
  int count = 200;
  double radius_xi = 2.0;
  double radius_u = 2.0;
  uint64_t seed = 1;
  double horizon = 10.0;
  int steps_per_delay = 64;
  double blowup_guard = 1e12;
  int xi_knots = 4;    // random piecewise-linear histories
  int u_switches = 4;  // bang-bang switch count
  /// Members projected onto the zero-output set (when the model provides a
  /// projector); member 0 of those additionally gets u = 0.
  int zero_output_members = 4;
  std::map<int, double> fixed_components;  // state component -> constant value

  nlohmann::json describe() const;
};

struct EnsembleMember {
  HistorySegment xi;
  InputSignal u;
  uint64_t member_seed = 0;
  bool zero_output = false;
};

EnsembleMember make_member(const SystemModel& model, const EnsembleSpec& spec,
                           int index);

struct Witness {
  int member = -1;
  double t = 0;
  double value = 0;
  double bound = 0;
  nlohmann::json xi, u;
};

struct CertificationReport {
  std::string model_id;
  EstimateForm form = EstimateForm::IOS;
  bool satisfied = true;
  double worst_slack = std::numeric_limits<double>::infinity();
  Witness witness;
  double tolerance = 1e-9;
  bool used_history_norm = false;
  int blowups = 0;
  nlohmann::json ensemble, extra;

  nlohmann::json to_json() const;
};

/// Evaluates the candidate inequality pointwise along every simulated
/// ensemble trajectory; worst_slack = min(bound - value). Verdict is
/// `violated` iff worst_slack < -tolerance. Reproducible given the seed.
CertificationReport check_estimate(const SystemModel& model,
                                   const EstimateCandidate& candidate,
                                   const EnsembleSpec& ensemble,
                                   int threads = 0);

/// Razumikhin premise check (RAZ_* forms): the delayed-output influence
/// enters as a running max over [-theta, t], computed incrementally.
/// Records the premise verdict only.
CertificationReport check_razumikhin(const SystemModel& model,
                                     const EstimateCandidate& candidate,
                                     const EnsembleSpec& ensemble,
                                     int threads = 0);

/// beta_1(r,t) = p^{-1}(e^theta q(r) e^{-t}) from the exponential
/// factorization of beta; dominates beta(r, t-theta) for t >= theta.
KLFunction lift_to_history_norm(const KLFunction& beta, double theta,
                                const SamplingGrid& grid = SamplingGrid::defaults());

/// Empirical asymptotic-gain staircase: for each input amplitude, the max
/// of |y| over the final 20% of the horizon across the ensemble, clamped to
/// zero below 1e-8*max(1, radius) and made nondecreasing. A lower-bound
/// estimate by construction.
ComparisonFunction estimate_asymptotic_gain(const SystemModel& model,
                                            const std::vector<double>& amplitudes,
                                            const EnsembleSpec& ensemble,
                                            int threads = 0);

// ---- candidate derivation helpers ----

/// OL-GS candidate derived from a max-form SI-IOS candidate:
/// sigma(r) = max{beta(r,0), gamma(r)}.
EstimateCandidate derive_olgs_from_si(const EstimateCandidate& si);

/// IOS candidate derived from a max-form SI-IOS candidate through the
/// output bound: beta'(r,t) = beta(pi(r), t).
EstimateCandidate derive_ios_from_si(const EstimateCandidate& si,
                                     const ComparisonFunction& pi);

struct FitSpec {
  EstimateForm form = EstimateForm::IOS_MAX;  // max-form IOS / SI / compact
  ComparisonFunction gamma;  // fixed input gain
  ComparisonFunction rho;    // for the compact form
  double margin = 1.05;
  double rate_slack = 1.5;   // prefer the fastest rate within this envelope factor
  std::vector<double> rate_grid;  // defaults to log grid [1e-3, 10]
};

/// Fits beta(r,t) = a * r * exp(-c t) over the ensemble so the requested
/// max-form estimate holds on every sampled point, with a multiplicative
/// margin. Throws NonConvergent when no rate on the grid is feasible.
EstimateCandidate fit_kl_candidate(const SystemModel& model,
                                   const EnsembleSpec& ensemble,
                                   const FitSpec& fit, int threads = 0);

}  // namespace dios
