#pragma once

#include <vector>

#include "dios/comparison.hpp"

namespace dios {

/// Sampling domain on which numerically constructed envelopes are validated.
/// Universal quantifiers are not machine-checkable; grid plus safety margin
/// is the testable surrogate, and reports declare the grid used.
struct SamplingGrid {
  std::vector<double> r;  // increasing, r.front() > 0
  std::vector<double> t;  // increasing from 0

  static SamplingGrid defaults();
  double r_min() const { return r.front(); }
  double r_max() const { return r[r.size() - 2]; }  // last knot backs the shift
  double t_max() const { return t.back(); }
};

/// Exponential factorization of a KL function: p(beta(r,t)) <= q(r)*exp(-t)
/// on the construction grid. p is a power map v^k (exactly invertible), q a
/// monotone spline envelope with a multiplicative safety margin.
struct SontagFactorization {
  ComparisonFunction p;
  ComparisonFunction q;
  int power = 0;
  SamplingGrid grid;
};

SontagFactorization sontag_factorize(const KLFunction& beta,
                                     const SamplingGrid& grid = SamplingGrid::defaults(),
                                     int k_max = 8);

/// min{sigma(s), beta(r,t)} <= beta_hat(s, t/(1+rho_hat(r))) on the sampled
/// domain. Built from the factorization of (r,t) -> beta(r, t/3):
/// sigma_tilde(s) = max{sqrt(p(sigma(s))), e*p(sigma(s))},
/// beta_hat(s,tau) = p^{-1}(sigma_tilde(s) e^{-tau}), rho_hat = ln(1+q).
struct LagrangeConversion {
  KLFunction beta_hat;
  ComparisonFunction rho_hat;
  SontagFactorization factor;
};

LagrangeConversion lagrange_convert(const ComparisonFunction& sigma,
                                    const KLFunction& beta,
                                    const SamplingGrid& grid = SamplingGrid::defaults());

/// Decay-time family T(r,s): beta(r,t) < s for every t >= T(r,s); T(0,s)=0,
/// T strictly increasing in r and strictly decreasing in s.
class DecayTimeFamily {
 public:
  DecayTimeFamily() = default;
  explicit DecayTimeFamily(KLFunction beta, double t_cap = 1e6);
  double operator()(double r, double s) const;
  bool valid() const { return beta_.valid(); }

 private:
  KLFunction beta_;
  double t_cap_ = 1e6;
};

DecayTimeFamily decay_time_family(const KLFunction& beta);

/// Smooth Kinf margin: lambda(v) = 0.5*sigma^{-1}(sigma^{-1}(v)/4) through
/// monotone C1 interpolation of numeric inverses, so that
/// sigma(lambda(sigma(s))) < s/4. Requires sigma in Kinf with sigma(s) >= s
/// (caller normalizes). The predicate is validated on a 200-point log grid
/// over [1e-6, 1e6] at construction.
ComparisonFunction synthesize_margin(const ComparisonFunction& sigma);

/// One trajectory sample used for reachability envelopes.
struct RfcSample {
  double t = 0, xi_norm = 0, u_norm = 0, x_norm = 0;
};

/// Staircase reachability envelope: |x| <= chi(t)+chi(|xi|)+chi(|u|)+c on
/// every input sample, chi continuous nondecreasing with chi(0)=0.
struct RfcEnvelope {
  ComparisonFunction chi;
  double c = 0;
  double bound(double t, double xi_norm, double u_norm) const {
    return chi(t) + chi(xi_norm) + chi(u_norm) + c;
  }
};

RfcEnvelope build_rfc_envelope(const std::vector<RfcSample>& samples);

}  // namespace dios
