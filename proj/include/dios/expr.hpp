#pragma once

#include <memory>
#include <string>

#include "dios/dde.hpp"
#include "json.hpp"

namespace dios {

/// Compiled scalar expression over a history window and an input vector.
///
/// Grammar (right-assoc ^, usual precedence, parentheses):
///   x<i>          state component i (1-based) at s = 0
///   x<i>(-0.25)   state component i at lag s (constant, -theta <= s <= 0,
///                 snapped to the grid)
///   u<j>          input component j (1-based)
///   histnorm      sup over the window of the Euclidean state norm
///   winmax<i>     sup over the window of |x_i|
///   abs, min, max, exp, log, sqrt, sin, cos, tanh; numeric literals
class Expression {
 public:
  Expression() = default;
  /// Compiles against state dimension n and input dimension m (m = 0 for
  /// output maps, which may not reference u).
  static Expression compile(const std::string& source, int n, int m,
                            double theta);
  double eval(const HistoryView& xt, std::span<const double> u) const;
  /// True when only s = 0 state samples are referenced (no lags, no window
  /// norms): such output maps are delay-free.
  bool delay_free() const;
  const std::string& source() const;

  struct Node;  // exposed for the compiler/evaluator implementation

 private:
  std::shared_ptr<const Node> root_;
  std::string source_;
};

/// Builds a SystemModel from a JSON description:
///   {"n":3, "m":1, "theta":0.5,
///    "f": ["-x1 + x1(-0.5)", "...", "..."],
///    "h": ["x3"],
///    "pi": "id",          // optional output bound
///    "id": "my-model"}    // optional name
/// A delay-free h0 is derived automatically when every h entry is delay-free.
SystemModel model_from_json(const nlohmann::json& spec);

}  // namespace dios
