#pragma once

#include <vector>

#include "json.hpp"

namespace dios {

/// Monotone C1 interpolant (Fritsch-Carlson slopes) through nondecreasing
/// knots. Inputs are projected to nondecreasing order by pool-adjacent-
/// violators before slope construction, and strictified by a relative ramp
/// when strictness is requested.
class MonotoneSpline {
 public:
  enum class Left { linear, through_zero };

  MonotoneSpline() = default;
  MonotoneSpline(std::vector<double> x, std::vector<double> y,
                 bool strictly_increasing = false,
                 Left left = Left::through_zero);

  double operator()(double v) const;
  bool empty() const { return x_.empty(); }
  double min_knot() const { return x_.front(); }
  double max_knot() const { return x_.back(); }
  nlohmann::json knots() const;

 private:
  std::vector<double> x_, y_, slope_;
  Left left_ = Left::through_zero;
};

/// L2 projection onto nondecreasing sequences (pool adjacent violators).
std::vector<double> isotonic_projection(const std::vector<double>& y);

}  // namespace dios
