#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace dios {

inline double euclid_norm(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline double euclid_norm(const std::vector<double>& v) {
  return euclid_norm(std::span<const double>(v.data(), v.size()));
}

/// Deterministic splitmix64 generator. Standard-library distributions are
/// implementation-defined, so uniforms are derived directly from the raw
/// stream; reports seeded from the same (seed, index) reproduce bit-for-bit.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  /// Independent substream for ensemble member `index`.
  static Rng stream(uint64_t master, uint64_t index) {
    Rng r(master ^ (0x9e3779b97f4a7c15ULL * (index + 1)));
    r.next();
    r.next();
    return r;
  }

  uint64_t next() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  double uniform() { return double(next() >> 11) * 0x1.0p-53; }  // [0,1)
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + int(next() % uint64_t(hi - lo + 1));
  }

  double gaussian() {
    double u1 = 1.0 - uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

 private:
  uint64_t state_;
};

inline std::vector<double> random_unit_vector(Rng& rng, int dim) {
  std::vector<double> v(dim);
  double nrm = 0;
  do {
    for (auto& x : v) x = rng.gaussian();
    nrm = euclid_norm(v);
  } while (nrm < 1e-12);
  for (auto& x : v) x /= nrm;
  return v;
}

/// Uniform draw from the closed Euclidean ball of the given radius.
inline std::vector<double> random_in_ball(Rng& rng, int dim, double radius) {
  auto v = random_unit_vector(rng, dim);
  double r = radius * std::pow(rng.uniform(), 1.0 / dim);
  for (auto& x : v) x *= r;
  return v;
}

}  // namespace dios
