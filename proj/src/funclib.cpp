#include "dios/funclib.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "dios/errors.hpp"

namespace dios {

namespace {
constexpr double kEnvelopeMargin = 1.05;
}

SamplingGrid SamplingGrid::defaults() {
  SamplingGrid g;
  g.r = log_grid(1e-12, 20.0, 180);
  g.t = linear_grid(0.0, 30.0, 241);
  return g;
}

// -------------------------------------------------------- sontag_factorize

SontagFactorization sontag_factorize(const KLFunction& beta,
                                     const SamplingGrid& grid, int k_max) {
  const size_t nr = grid.r.size(), nt = grid.t.size();
  if (nr < 3 || nt < 3) throw ConfigError("sontag_factorize: grid too small");
  constexpr double kOverflow = 1e100;

  // Prefer the smallest power whose envelope stops growing at the grid's
  // right edge (it then extends past t_max); otherwise fall back to the
  // smallest power that stays representable, which is still valid on the
  // sampled domain.
  auto envelope_of = [&](int k, std::vector<double>& env) {
    bool tail_flat = true, representable = true;
    for (size_t i = 0; i < nr; ++i) {
      double best = 0;
      size_t best_j = 0;
      for (size_t j = 0; j < nt; ++j) {
        double v = std::exp(grid.t[j]) * std::pow(beta(grid.r[i], grid.t[j]), k);
        if (v > best) {
          best = v;
          best_j = j;
        }
      }
      if (best > kOverflow || !std::isfinite(best)) representable = false;
      if (best_j == nt - 1 && best > 0) {
        double prev = std::exp(grid.t[nt - 2]) *
                      std::pow(beta(grid.r[i], grid.t[nt - 2]), k);
        if (best > prev * (1 + 1e-9)) tail_flat = false;
      }
      env[i] = best;
    }
    return std::pair{tail_flat, representable};
  };

  std::vector<double> envelope(nr);
  int chosen = 0, fallback = 0;
  for (int k = 1; k <= k_max && chosen == 0; ++k) {
    auto [tail_flat, representable] = envelope_of(k, envelope);
    if (representable && fallback == 0) fallback = k;
    if (representable && tail_flat) chosen = k;
  }
  if (chosen == 0 && fallback == 0)
    throw EnvelopeDiverged("sontag_factorize: no power map up to k=" +
                           std::to_string(k_max) +
                           " gives a finite envelope on the grid");
  if (chosen == 0) {
    chosen = fallback;
    envelope_of(chosen, envelope);
  }

  // Knot i carries the envelope of the next grid abscissa so the spline
  // dominates the (r-monotone) envelope between knots; e^{dt_max} covers the
  // growth of e^t between t nodes (p(beta(r,.)) is nonincreasing), and the
  // margin absorbs residual interpolation slack.
  double dt_max = 0;
  for (size_t j = 1; j < nt; ++j)
    dt_max = std::max(dt_max, grid.t[j] - grid.t[j - 1]);
  const double lift = kEnvelopeMargin * std::exp(dt_max);
  std::vector<double> kx, ky;
  kx.reserve(nr);
  ky.reserve(nr);
  kx.push_back(0.0);
  ky.push_back(0.0);
  for (size_t i = 0; i + 1 < nr; ++i) {
    kx.push_back(grid.r[i]);
    ky.push_back(lift * envelope[i + 1]);
  }
  MonotoneSpline q_spline(std::move(kx), std::move(ky), true,
                          MonotoneSpline::Left::through_zero);

  SontagFactorization out;
  out.power = chosen;
  out.p = ComparisonFunction::power(double(chosen));
  out.q = ComparisonFunction::from_spline("sontag-q[" + beta.name() + "]",
                                          FunctionClass::Kinf,
                                          std::move(q_spline));
  out.grid = grid;
  return out;
}

// -------------------------------------------------------- lagrange_convert

LagrangeConversion lagrange_convert(const ComparisonFunction& sigma,
                                    const KLFunction& beta,
                                    const SamplingGrid& grid) {
  // alpha_bar(beta(r,t)) <= rho(r) e^{-3t} via factorizing the time-dilated
  // function; the t grid is stretched to cover the dilation.
  KLFunction dilated = KLFunction::make(
      "dilated[" + beta.name() + "]",
      [beta](double r, double t) { return beta(r, t / 3.0); });
  SamplingGrid stretched = grid;
  for (auto& t : stretched.t) t *= 3.0;
  SontagFactorization fac = sontag_factorize(dilated, stretched);

  const double k = double(fac.power);
  ComparisonFunction alpha_bar = fac.p;
  ComparisonFunction rho = fac.q;
  ComparisonFunction sig = sigma;

  KLFunction beta_hat = KLFunction::make(
      "lagrange-beta-hat[" + beta.name() + "]",
      [alpha_bar, sig, k](double s, double tau) {
        double as = alpha_bar(sig(s));
        double sigma_tilde = std::max(std::sqrt(as), std::exp(1.0) * as);
        return std::pow(sigma_tilde * std::exp(-tau), 1.0 / k);
      });
  ComparisonFunction rho_hat = ComparisonFunction::make(
      "lagrange-rho-hat[" + beta.name() + "]", FunctionClass::K,
      [rho](double r) { return std::log1p(rho(r)); });

  return {std::move(beta_hat), std::move(rho_hat), std::move(fac)};
}

// ------------------------------------------------------- decay_time_family

DecayTimeFamily::DecayTimeFamily(KLFunction beta, double t_cap)
    : beta_(std::move(beta)), t_cap_(t_cap) {}

double DecayTimeFamily::operator()(double r, double s) const {
  if (!(s > 0)) throw NonConvergent("decay time requires s > 0");
  if (r <= 0) return 0.0;
  const double target = s / 2;
  double t0 = 0.0;
  if (beta_(r, 0.0) > target) {
    double lo = 0, hi = 1;
    while (beta_(r, hi) > target) {
      hi *= 2;
      if (hi > t_cap_)
        throw NonConvergent("decay time bracket not found below t=" +
                            std::to_string(t_cap_));
      lo = hi / 2;
    }
    for (int i = 0; i < 200 && hi - lo > 1e-9 * std::max(1.0, hi); ++i) {
      double mid = 0.5 * (lo + hi);
      (beta_(r, mid) > target ? lo : hi) = mid;
    }
    t0 = hi;  // upper end of the bracket keeps beta(r, t0) <= s/2
  }
  // smoothing term enforces strict monotonicity in both arguments
  return t0 + r / (1 + s);
}

DecayTimeFamily decay_time_family(const KLFunction& beta) {
  return DecayTimeFamily(beta);
}

// ------------------------------------------------------- synthesize_margin

ComparisonFunction synthesize_margin(const ComparisonFunction& sigma) {
  if (sigma.function_class() != FunctionClass::Kinf)
    throw ConfigError("synthesize_margin requires a Kinf function");

  auto s_grid = log_grid(1e-8, 1e8, 400);
  std::vector<double> kx, ky;
  kx.reserve(s_grid.size());
  ky.reserve(s_grid.size());
  for (double s : s_grid) {
    double v = sigma(s);                       // knot abscissa = sigma(s)
    double lam = 0.5 * invert(sigma, s / 4);   // 0.5*sigma^{-1}(sigma^{-1}(v)/4)
    if (!kx.empty() && v <= kx.back()) continue;
    kx.push_back(v);
    ky.push_back(lam);
  }
  if (kx.size() < 8)
    throw ConfigError("synthesize_margin: degenerate sigma (too few knots)");
  MonotoneSpline spline(std::move(kx), std::move(ky), true,
                        MonotoneSpline::Left::through_zero);
  ComparisonFunction lambda = ComparisonFunction::from_spline(
      "margin[" + sigma.name() + "]", FunctionClass::Kinf, std::move(spline));

  for (double s : log_grid(1e-6, 1e6, 200)) {
    double lhs = sigma(lambda(sigma(s)));
    if (!(lhs <= 0.99 * s / 4))
      throw Error("synthesize_margin: predicate sigma(lambda(sigma(s))) < s/4 "
                  "failed at s=" + std::to_string(s));
  }
  return lambda;
}

// ------------------------------------------------------- build_rfc_envelope

namespace {

/// Right-continuous nondecreasing staircase of peak |x| per box radius.
struct Staircase {
  std::vector<double> key;   // sorted thresholds m = max(t, |xi|, |u|)
  std::vector<double> peak;  // prefix max of |x|

  double value(double r) const {
    auto it = std::upper_bound(key.begin(), key.end(), r);
    if (it == key.begin()) return 0.0;
    return peak[size_t(it - key.begin()) - 1];
  }

  // exact integral over [a, a+1] of the piecewise-constant staircase
  double integral_unit(double a) const {
    double b = a + 1.0, acc = 0.0, cur = a, v = value(a);
    auto it = std::upper_bound(key.begin(), key.end(), a);
    for (; it != key.end() && *it < b; ++it) {
      acc += v * (*it - cur);
      cur = *it;
      v = peak[size_t(it - key.begin())];
    }
    acc += v * (b - cur);
    return acc;
  }
};

}  // namespace

RfcEnvelope build_rfc_envelope(const std::vector<RfcSample>& samples) {
  if (samples.empty()) throw EmptySampleSet("build_rfc_envelope: no samples");

  std::vector<std::pair<double, double>> pts;
  pts.reserve(samples.size());
  for (const auto& s : samples)
    pts.emplace_back(std::max({s.t, s.xi_norm, s.u_norm}), s.x_norm);
  std::sort(pts.begin(), pts.end());

  auto stair = std::make_shared<Staircase>();
  stair->key.reserve(pts.size());
  stair->peak.reserve(pts.size());
  double running = 0;
  for (const auto& [m, x] : pts) {
    running = std::max(running, x);
    if (!stair->key.empty() && stair->key.back() == m)
      stair->peak.back() = running;
    else {
      stair->key.push_back(m);
      stair->peak.push_back(running);
    }
  }

  // rho1(r) = integral of rho over [r, r+1] dominates rho (rho nondecreasing);
  // anchoring at rho1(0) keeps chi(0) = 0 exactly.
  double c = stair->integral_unit(0.0);
  nlohmann::json knots = nlohmann::json::array();
  for (size_t i = 0; i < stair->key.size(); ++i)
    knots.push_back({stair->key[i], stair->peak[i]});
  RfcEnvelope env;
  env.c = c;
  env.chi = ComparisonFunction::make_with_payload(
      "rfc-chi", FunctionClass::N,
      [stair, c](double r) {
        if (r <= 0) return 0.0;
        return std::max(0.0, stair->integral_unit(r) - c);
      },
      {{"staircase", knots}, {"c", c}});
  return env;
}

}  // namespace dios
