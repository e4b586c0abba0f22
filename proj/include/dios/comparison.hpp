#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dios/spline.hpp"
#include "json.hpp"

namespace dios {

enum class FunctionClass { N, K, Kinf };

std::string to_string(FunctionClass cls);

/// Scalar comparison function on the nonnegative reals with eval(0) = 0.
/// Immutable after construction and freely shareable across threads.
///
/// Class N functions are nondecreasing, class K strictly increasing, and
/// class Kinf additionally unbounded. Monotonicity of numerically
/// constructed instances is enforced on sampled grids, never proved.
class ComparisonFunction {
 public:
  ComparisonFunction() = default;

  static ComparisonFunction make(std::string name, FunctionClass cls,
                                 std::function<double(double)> eval,
                                 std::optional<double> domain_cap = std::nullopt);

  /// As make(), with a serialization payload (e.g. a knot table) attached
  /// for describe().
  static ComparisonFunction make_with_payload(std::string name, FunctionClass cls,
                                              std::function<double(double)> eval,
                                              nlohmann::json payload);

  /// Like make() but with a closed-form inverse, used by invert().
  static ComparisonFunction make_invertible(std::string name, FunctionClass cls,
                                            std::function<double(double)> eval,
                                            std::function<double(double)> inverse);

  /// r^k with exact inverse.
  static ComparisonFunction power(double exponent);

  static ComparisonFunction from_spline(std::string name, FunctionClass cls,
                                        MonotoneSpline spline);

  /// Pointwise max of two comparison functions (class of the stronger tag).
  static ComparisonFunction pointwise_max(const ComparisonFunction& a,
                                          const ComparisonFunction& b);

  double operator()(double r) const;
  FunctionClass function_class() const;
  const std::string& name() const;
  std::optional<double> domain_cap() const;
  bool valid() const { return impl_ != nullptr; }
  bool has_exact_inverse() const;
  double exact_inverse(double y) const;

  /// Name plus knot table when spline-backed; serializable to CLI reports.
  nlohmann::json describe() const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

/// Numeric inverse of a class K / Kinf function: bisection with bracket
/// expansion doubling from [0,1], relative tolerance 1e-10. Throws
/// UnreachableTarget when y exceeds the validated range.
double invert(const ComparisonFunction& f, double y);

/// Two-argument comparison function: class K in r for fixed t, decreasing
/// to zero in t for fixed r (validated on grids at a finite horizon).
class KLFunction {
 public:
  KLFunction() = default;
  static KLFunction make(std::string name,
                         std::function<double(double, double)> eval);
  double operator()(double r, double t) const;
  const std::string& name() const;
  bool valid() const { return impl_ != nullptr; }
  nlohmann::json describe() const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

/// beta(., t0) as a comparison function (class N view of a KL slice).
ComparisonFunction kl_time_slice(const KLFunction& beta, double t0,
                                 const std::string& name);

// ---- named-function registry (CLI-facing expressions) ----
//
//   zero | id | linear:a | power:p | scaled-power:a,p
//   exp-kl:a,b          a*r*exp(-b*t)
//   powexp-kl:a,p,b     a*r^p*exp(-b*t)
//   ratio-kl:a          a*r/(1+t)
//   slowdown-kl:a,b,c   a*r*exp(-b*t/(1+c*r^2))

ComparisonFunction parse_comparison(const std::string& expr);
KLFunction parse_kl(const std::string& expr);

// ---- grid validation helpers ----

std::vector<double> log_grid(double lo, double hi, int count);
std::vector<double> linear_grid(double lo, double hi, int count);

struct ClassCheck {
  bool ok = true;
  std::string detail;
};

ClassCheck check_class(const ComparisonFunction& f, FunctionClass cls,
                       const std::vector<double>& grid);

ClassCheck check_kl(const KLFunction& beta, const std::vector<double>& r_grid,
                    const std::vector<double>& t_grid,
                    double decay_fraction = 0.1);

}  // namespace dios
