#include "dios/comparison.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dios/errors.hpp"

namespace dios {

// ---------------------------------------------------------------- spline

std::vector<double> isotonic_projection(const std::vector<double>& y) {
  // pool adjacent violators with block averaging
  std::vector<double> level, weight;
  level.reserve(y.size());
  weight.reserve(y.size());
  for (double v : y) {
    level.push_back(v);
    weight.push_back(1.0);
    while (level.size() > 1 && level[level.size() - 2] > level.back()) {
      double w = weight[weight.size() - 2] + weight.back();
      double m = (level[level.size() - 2] * weight[weight.size() - 2] +
                  level.back() * weight.back()) /
                 w;
      level.pop_back();
      weight.pop_back();
      level.back() = m;
      weight.back() = w;
    }
  }
  std::vector<double> out;
  out.reserve(y.size());
  for (size_t b = 0; b < level.size(); ++b)
    for (int k = 0; k < int(weight[b] + 0.5); ++k) out.push_back(level[b]);
  return out;
}

MonotoneSpline::MonotoneSpline(std::vector<double> x, std::vector<double> y,
                               bool strictly_increasing, Left left)
    : left_(left) {
  if (x.size() != y.size() || x.size() < 2)
    throw Error("MonotoneSpline: need matching knot arrays, size >= 2");
  for (size_t i = 1; i < x.size(); ++i)
    if (!(x[i] > x[i - 1]))
      throw Error("MonotoneSpline: knot abscissae must be strictly increasing");

  y = isotonic_projection(y);
  if (strictly_increasing) {
    double yscale = std::max(1e-12, std::abs(y.back() - y.front()));
    double xspan = x.back() - x.front();
    for (size_t i = 1; i < y.size(); ++i) {
      double ramp = 1e-9 * yscale * (x[i] - x[i - 1]) / xspan;
      if (y[i] < y[i - 1] + ramp) y[i] = y[i - 1] + ramp;
    }
  }

  const size_t n = x.size();
  std::vector<double> d(n - 1), h(n - 1);
  for (size_t i = 0; i + 1 < n; ++i) {
    h[i] = x[i + 1] - x[i];
    d[i] = (y[i + 1] - y[i]) / h[i];
  }
  slope_.assign(n, 0.0);
  slope_[0] = d[0];
  slope_[n - 1] = d[n - 2];
  for (size_t i = 1; i + 1 < n; ++i) {
    if (d[i - 1] * d[i] <= 0) {
      slope_[i] = 0;
    } else {
      // Fritsch-Carlson weighted harmonic mean keeps the patch monotone
      double w1 = 2 * h[i] + h[i - 1];
      double w2 = h[i] + 2 * h[i - 1];
      slope_[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
    }
  }
  // limit end slopes (standard three-point guard)
  for (size_t e : {size_t(0), n - 1}) {
    size_t seg = (e == 0) ? 0 : n - 2;
    if (d[seg] == 0)
      slope_[e] = 0;
    else if (slope_[e] / d[seg] > 3)
      slope_[e] = 3 * d[seg];
    else if (slope_[e] / d[seg] < 0)
      slope_[e] = 0;
  }
  x_ = std::move(x);
  y_ = std::move(y);
}

double MonotoneSpline::operator()(double v) const {
  if (x_.empty()) throw Error("MonotoneSpline: empty");
  if (v <= x_.front()) {
    if (left_ == Left::through_zero && x_.front() > 0) {
      if (v <= 0) return 0;
      return y_.front() * (v / x_.front());
    }
    return y_.front() + slope_.front() * (v - x_.front());
  }
  if (v >= x_.back()) {
    double m = std::max(slope_.back(), 0.0);
    if (m == 0) {  // keep strictly increasing tails unbounded
      size_t n = x_.size();
      m = std::max((y_[n - 1] - y_[0]) / (x_[n - 1] - x_[0]), 1e-12);
    }
    return y_.back() + m * (v - x_.back());
  }
  size_t hi = size_t(std::upper_bound(x_.begin(), x_.end(), v) - x_.begin());
  size_t lo = hi - 1;
  double h = x_[hi] - x_[lo];
  double s = (v - x_[lo]) / h;
  double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
  double h10 = s * (1 - s) * (1 - s);
  double h01 = s * s * (3 - 2 * s);
  double h11 = s * s * (s - 1);
  return h00 * y_[lo] + h10 * h * slope_[lo] + h01 * y_[hi] +
         h11 * h * slope_[hi];
}

nlohmann::json MonotoneSpline::knots() const {
  nlohmann::json k = nlohmann::json::array();
  for (size_t i = 0; i < x_.size(); ++i) k.push_back({x_[i], y_[i]});
  return k;
}

// ------------------------------------------------------ ComparisonFunction

std::string to_string(FunctionClass cls) {
  switch (cls) {
    case FunctionClass::N: return "N";
    case FunctionClass::K: return "K";
    case FunctionClass::Kinf: return "Kinf";
  }
  return "?";
}

struct ComparisonFunction::Impl {
  std::string name;
  FunctionClass cls = FunctionClass::N;
  std::function<double(double)> eval;
  std::function<double(double)> inverse;  // optional closed form
  std::optional<double> domain_cap;
  nlohmann::json payload;  // knot table for spline-backed functions
};

ComparisonFunction ComparisonFunction::make(std::string name, FunctionClass cls,
                                            std::function<double(double)> eval,
                                            std::optional<double> domain_cap) {
  ComparisonFunction f;
  auto impl = std::make_shared<Impl>();
  impl->name = std::move(name);
  impl->cls = cls;
  impl->eval = std::move(eval);
  impl->domain_cap = domain_cap;
  f.impl_ = std::move(impl);
  return f;
}

ComparisonFunction ComparisonFunction::make_with_payload(
    std::string name, FunctionClass cls, std::function<double(double)> eval,
    nlohmann::json payload) {
  ComparisonFunction f = make(std::move(name), cls, std::move(eval));
  std::const_pointer_cast<Impl>(f.impl_)->payload = std::move(payload);
  return f;
}

ComparisonFunction ComparisonFunction::make_invertible(
    std::string name, FunctionClass cls, std::function<double(double)> eval,
    std::function<double(double)> inverse) {
  ComparisonFunction f = make(std::move(name), cls, std::move(eval));
  auto impl = std::const_pointer_cast<Impl>(f.impl_);
  impl->inverse = std::move(inverse);
  return f;
}

ComparisonFunction ComparisonFunction::power(double exponent) {
  if (!(exponent > 0)) throw ConfigError("power map requires exponent > 0");
  std::ostringstream name;
  name << "power:" << exponent;
  return make_invertible(
      name.str(), FunctionClass::Kinf,
      [exponent](double r) { return std::pow(r, exponent); },
      [exponent](double y) { return std::pow(y, 1.0 / exponent); });
}

ComparisonFunction ComparisonFunction::from_spline(std::string name,
                                                   FunctionClass cls,
                                                   MonotoneSpline spline) {
  auto sp = std::make_shared<MonotoneSpline>(std::move(spline));
  ComparisonFunction f = make(std::move(name), cls,
                              [sp](double r) { return std::max(0.0, (*sp)(r)); });
  auto impl = std::const_pointer_cast<Impl>(f.impl_);
  impl->payload = {{"knots", sp->knots()}};
  return f;
}

ComparisonFunction ComparisonFunction::pointwise_max(
    const ComparisonFunction& a, const ComparisonFunction& b) {
  FunctionClass cls = a.function_class();
  if (b.function_class() == FunctionClass::Kinf || cls == FunctionClass::Kinf)
    cls = FunctionClass::Kinf;
  else if (b.function_class() == FunctionClass::K || cls == FunctionClass::K)
    cls = FunctionClass::K;
  ComparisonFunction ca = a, cb = b;
  return make("max(" + a.name() + "," + b.name() + ")", cls,
              [ca, cb](double r) { return std::max(ca(r), cb(r)); });
}

double ComparisonFunction::operator()(double r) const {
  if (!impl_) throw Error("ComparisonFunction: empty");
  return impl_->eval(r);
}

FunctionClass ComparisonFunction::function_class() const {
  if (!impl_) throw Error("ComparisonFunction: empty");
  return impl_->cls;
}

const std::string& ComparisonFunction::name() const {
  static const std::string none = "<empty>";
  return impl_ ? impl_->name : none;
}

std::optional<double> ComparisonFunction::domain_cap() const {
  return impl_ ? impl_->domain_cap : std::nullopt;
}

bool ComparisonFunction::has_exact_inverse() const {
  return impl_ && impl_->inverse;
}

double ComparisonFunction::exact_inverse(double y) const {
  if (!has_exact_inverse()) throw Error("no exact inverse");
  return impl_->inverse(y);
}

nlohmann::json ComparisonFunction::describe() const {
  if (!impl_) return nullptr;
  nlohmann::json j{{"name", impl_->name}, {"class", to_string(impl_->cls)}};
  if (!impl_->payload.is_null()) j["payload"] = impl_->payload;
  return j;
}

double invert(const ComparisonFunction& f, double y) {
  if (y < 0) throw UnreachableTarget("inversion target must be nonnegative");
  if (f.has_exact_inverse()) return f.exact_inverse(y);
  if (y == 0) return 0;  // f(0) = 0 and f strictly increasing
  double cap = f.domain_cap().value_or(std::numeric_limits<double>::infinity());
  if (std::isfinite(cap) && y > f(cap) * (1 + 1e-12))
    throw UnreachableTarget(f.name() + ": target " + std::to_string(y) +
                            " above validated range");
  double lo = 0, hi = 1;
  if (std::isfinite(cap) && hi > cap) hi = cap;
  int guard = 0;
  while (f(hi) < y) {
    if (hi >= cap || hi > 1e300 || ++guard > 2100)
      throw UnreachableTarget(f.name() + ": bracket expansion failed for " +
                              std::to_string(y));
    lo = hi;
    hi = std::isfinite(cap) ? std::min(hi * 2, cap) : hi * 2;
  }
  for (int i = 0; i < 400 && hi - lo > 1e-10 * std::max(1e-300, hi); ++i) {
    double mid = 0.5 * (lo + hi);
    (f(mid) < y ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// -------------------------------------------------------------- KLFunction

struct KLFunction::Impl {
  std::string name;
  std::function<double(double, double)> eval;
};

KLFunction KLFunction::make(std::string name,
                            std::function<double(double, double)> eval) {
  KLFunction f;
  auto impl = std::make_shared<Impl>();
  impl->name = std::move(name);
  impl->eval = std::move(eval);
  f.impl_ = std::move(impl);
  return f;
}

double KLFunction::operator()(double r, double t) const {
  if (!impl_) throw Error("KLFunction: empty");
  return impl_->eval(r, t);
}

const std::string& KLFunction::name() const {
  static const std::string none = "<empty>";
  return impl_ ? impl_->name : none;
}

nlohmann::json KLFunction::describe() const {
  if (!impl_) return nullptr;
  return nlohmann::json{{"name", impl_->name}};
}

ComparisonFunction kl_time_slice(const KLFunction& beta, double t0,
                                 const std::string& name) {
  KLFunction b = beta;
  return ComparisonFunction::make(
      name, FunctionClass::N, [b, t0](double r) { return b(r, t0); });
}

// ---------------------------------------------------------------- registry

namespace {

std::vector<double> parse_args(const std::string& expr, size_t colon) {
  std::vector<double> out;
  if (colon == std::string::npos) return out;
  std::string rest = expr.substr(colon + 1);
  std::stringstream ss(rest);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      size_t used = 0;
      double v = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      out.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("bad numeric argument '" + tok + "' in '" + expr + "'");
    }
  }
  return out;
}

void need_args(const std::string& expr, const std::vector<double>& a, size_t n) {
  if (a.size() != n)
    throw ConfigError("'" + expr + "': expected " + std::to_string(n) +
                      " argument(s)");
}

}  // namespace

ComparisonFunction parse_comparison(const std::string& expr) {
  size_t colon = expr.find(':');
  std::string head = expr.substr(0, colon);
  auto args = parse_args(expr, colon);

  if (head == "zero") {
    return ComparisonFunction::make("zero", FunctionClass::N,
                                    [](double) { return 0.0; });
  }
  if (head == "id") {
    return ComparisonFunction::make_invertible(
        "id", FunctionClass::Kinf, [](double r) { return r; },
        [](double y) { return y; });
  }
  if (head == "linear") {
    need_args(expr, args, 1);
    double a = args[0];
    if (!(a > 0)) throw ConfigError("'" + expr + "': slope must be positive");
    return ComparisonFunction::make_invertible(
        expr, FunctionClass::Kinf, [a](double r) { return a * r; },
        [a](double y) { return y / a; });
  }
  if (head == "power") {
    need_args(expr, args, 1);
    return ComparisonFunction::power(args[0]);
  }
  if (head == "scaled-power") {
    need_args(expr, args, 2);
    double a = args[0], p = args[1];
    if (!(a > 0) || !(p > 0))
      throw ConfigError("'" + expr + "': coefficients must be positive");
    return ComparisonFunction::make_invertible(
        expr, FunctionClass::Kinf,
        [a, p](double r) { return a * std::pow(r, p); },
        [a, p](double y) { return std::pow(y / a, 1.0 / p); });
  }
  throw ConfigError("unknown comparison function '" + expr + "'");
}

KLFunction parse_kl(const std::string& expr) {
  size_t colon = expr.find(':');
  std::string head = expr.substr(0, colon);
  auto args = parse_args(expr, colon);

  if (head == "exp-kl") {
    need_args(expr, args, 2);
    double a = args[0], b = args[1];
    return KLFunction::make(expr, [a, b](double r, double t) {
      return a * r * std::exp(-b * t);
    });
  }
  if (head == "powexp-kl") {
    need_args(expr, args, 3);
    double a = args[0], p = args[1], b = args[2];
    return KLFunction::make(expr, [a, p, b](double r, double t) {
      return a * std::pow(r, p) * std::exp(-b * t);
    });
  }
  if (head == "ratio-kl") {
    need_args(expr, args, 1);
    double a = args[0];
    return KLFunction::make(
        expr, [a](double r, double t) { return a * r / (1 + t); });
  }
  if (head == "slowdown-kl") {
    need_args(expr, args, 3);
    double a = args[0], b = args[1], c = args[2];
    return KLFunction::make(expr, [a, b, c](double r, double t) {
      return a * r * std::exp(-b * t / (1 + c * r * r));
    });
  }
  throw ConfigError("unknown KL function '" + expr + "'");
}

// -------------------------------------------------------------- validation

std::vector<double> log_grid(double lo, double hi, int count) {
  std::vector<double> g(count);
  double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < count; ++i)
    g[i] = std::exp(llo + (lhi - llo) * i / double(count - 1));
  return g;
}

std::vector<double> linear_grid(double lo, double hi, int count) {
  std::vector<double> g(count);
  for (int i = 0; i < count; ++i)
    g[i] = lo + (hi - lo) * i / double(count - 1);
  return g;
}

ClassCheck check_class(const ComparisonFunction& f, FunctionClass cls,
                       const std::vector<double>& grid) {
  double at0 = f(0.0);
  if (std::abs(at0) > 1e-12)
    return {false, "eval(0) = " + std::to_string(at0)};
  double prev = at0;
  double prev_r = 0.0;
  for (double r : grid) {
    double v = f(r);
    if (v < prev - 1e-12 * std::max(1.0, std::abs(prev)))
      return {false, "decreasing at r=" + std::to_string(r)};
    if (cls != FunctionClass::N && !(v > prev) && r > prev_r)
      return {false, "not strictly increasing at r=" + std::to_string(r)};
    prev = v;
    prev_r = r;
  }
  return {};
}

ClassCheck check_kl(const KLFunction& beta, const std::vector<double>& r_grid,
                    const std::vector<double>& t_grid, double decay_fraction) {
  for (double t : t_grid) {
    double prev = beta(0.0, t);
    if (std::abs(prev) > 1e-12) return {false, "beta(0,t) != 0"};
    for (double r : r_grid) {
      double v = beta(r, t);
      if (!(v > prev))
        return {false, "beta(.,t) not strictly increasing at t=" +
                           std::to_string(t)};
      prev = v;
    }
  }
  for (double r : r_grid) {
    double prev = beta(r, t_grid.front());
    double first = prev;
    for (double t : t_grid) {
      double v = beta(r, t);
      if (v > prev + 1e-12 * std::max(1.0, prev))
        return {false, "beta(r,.) increasing at r=" + std::to_string(r)};
      prev = v;
    }
    if (first > 0 && prev > decay_fraction * first)
      return {false,
              "beta(r,.) did not decay below fraction at r=" + std::to_string(r)};
  }
  return {};
}

}  // namespace dios
