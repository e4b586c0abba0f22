#include "dios/expr.hpp"

#include <cctype>
#include <cmath>
#include <vector>

#include "dios/errors.hpp"

namespace dios {

namespace {

enum class Op {
  constant, state, state_lag, input, histnorm, winmax,
  add, sub, mul, div, pow, neg,
  call_abs, call_min, call_max, call_exp, call_log, call_sqrt,
  call_sin, call_cos, call_tanh,
};

bool references_window(Op op) {
  return op == Op::state_lag || op == Op::histnorm || op == Op::winmax;
}

}  // namespace

struct Expression::Node {
  Op op;
  double value = 0;   // constants
  int index = 0;      // component index / lag row offset from window end
  std::shared_ptr<const Node> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

struct Parser {
  const std::string& src;
  size_t pos = 0;
  int n, m;
  double theta;
  bool window_refs = false;

  explicit Parser(const std::string& s, int n_, int m_, double th)
      : src(s), n(n_), m(m_), theta(th) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("expression '" + src + "': " + msg + " (at offset " +
                      std::to_string(pos) + ")");
  }

  void skip_ws() {
    while (pos < src.size() && std::isspace(unsigned(src[pos]))) ++pos;
  }

  bool consume(char c) {
    skip_ws();
    if (pos < src.size() && src[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos < src.size() ? src[pos] : '\0';
  }

  NodePtr leaf(Op op, double v = 0, int idx = 0, NodePtr a = nullptr,
               NodePtr b = nullptr) {
    auto node = std::make_shared<Expression::Node>();
    node->op = op;
    node->value = v;
    node->index = idx;
    node->a = std::move(a);
    node->b = std::move(b);
    if (references_window(op)) window_refs = true;
    return node;
  }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    for (;;) {
      if (consume('+'))
        lhs = leaf(Op::add, 0, 0, lhs, parse_term());
      else if (consume('-'))
        lhs = leaf(Op::sub, 0, 0, lhs, parse_term());
      else
        return lhs;
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_factor();
    for (;;) {
      if (consume('*'))
        lhs = leaf(Op::mul, 0, 0, lhs, parse_factor());
      else if (consume('/'))
        lhs = leaf(Op::div, 0, 0, lhs, parse_factor());
      else
        return lhs;
    }
  }

  NodePtr parse_factor() {
    NodePtr base = parse_unary();
    if (consume('^')) return leaf(Op::pow, 0, 0, base, parse_factor());
    return base;
  }

  NodePtr parse_unary() {
    if (consume('-')) return leaf(Op::neg, 0, 0, parse_unary());
    consume('+');
    return parse_primary();
  }

  double parse_constant_expr() {
    // lags must be constants: parse a sub-expression and fold it
    NodePtr e = parse_expr();
    return fold(e);
  }

  double fold(const NodePtr& e) {
    switch (e->op) {
      case Op::constant: return e->value;
      case Op::neg: return -fold(e->a);
      case Op::add: return fold(e->a) + fold(e->b);
      case Op::sub: return fold(e->a) - fold(e->b);
      case Op::mul: return fold(e->a) * fold(e->b);
      case Op::div: return fold(e->a) / fold(e->b);
      default: fail("history lag must be a constant expression");
    }
  }

  NodePtr parse_primary() {
    skip_ws();
    if (pos >= src.size()) fail("unexpected end of input");
    char c = src[pos];
    if (std::isdigit(unsigned(c)) || c == '.') {
      size_t used = 0;
      double v = std::stod(src.substr(pos), &used);
      pos += used;
      return leaf(Op::constant, v);
    }
    if (c == '(') {
      ++pos;
      NodePtr e = parse_expr();
      if (!consume(')')) fail("missing ')'");
      return e;
    }
    if (std::isalpha(unsigned(c))) return parse_identifier();
    fail(std::string("unexpected character '") + c + "'");
  }

  NodePtr parse_identifier() {
    size_t start = pos;
    while (pos < src.size() &&
           (std::isalnum(unsigned(src[pos])) || src[pos] == '_'))
      ++pos;
    std::string name = src.substr(start, pos - start);

    if (name == "histnorm") return leaf(Op::histnorm);

    auto component = [&](size_t prefix, int limit,
                         const char* what) -> int {
      int idx = 0;
      try {
        idx = std::stoi(name.substr(prefix));
      } catch (const std::exception&) {
        fail("bad " + std::string(what) + " index in '" + name + "'");
      }
      if (idx < 1 || idx > limit)
        fail(std::string(what) + " index out of range in '" + name + "'");
      return idx - 1;
    };

    if (name.size() > 6 && name.rfind("winmax", 0) == 0)
      return leaf(Op::winmax, 0, component(6, n, "state"));

    if (name.size() > 1 && name[0] == 'x' && std::isdigit(unsigned(name[1]))) {
      int idx = component(1, n, "state");
      if (consume('(')) {
        double lag = parse_constant_expr();
        if (!consume(')')) fail("missing ')' after lag");
        if (lag < -theta - 1e-9 || lag > 1e-9)
          fail("lag must lie in [-theta, 0]");
        return leaf(Op::state_lag, lag, idx);
      }
      return leaf(Op::state, 0, idx);
    }
    if (name.size() > 1 && name[0] == 'u' && std::isdigit(unsigned(name[1]))) {
      if (m == 0) fail("output maps may not reference the input");
      return leaf(Op::input, 0, component(1, m, "input"));
    }

    static const std::pair<const char*, Op> fns[] = {
        {"abs", Op::call_abs},   {"min", Op::call_min}, {"max", Op::call_max},
        {"exp", Op::call_exp},   {"log", Op::call_log}, {"sqrt", Op::call_sqrt},
        {"sin", Op::call_sin},   {"cos", Op::call_cos}, {"tanh", Op::call_tanh},
    };
    for (const auto& [fname, op] : fns) {
      if (name == fname) {
        if (!consume('(')) fail("expected '(' after " + name);
        NodePtr a = parse_expr();
        NodePtr b;
        if (op == Op::call_min || op == Op::call_max) {
          if (!consume(',')) fail(name + " takes two arguments");
          b = parse_expr();
        }
        if (!consume(')')) fail("missing ')' after " + name);
        return leaf(op, 0, 0, a, b);
      }
    }
    fail("unknown identifier '" + name + "'");
  }
};

double eval_node(const Expression::Node& node, const HistoryView& xt,
                 std::span<const double> u) {
  switch (node.op) {
    case Op::constant: return node.value;
    case Op::state: return xt.head()[node.index];
    case Op::state_lag: return xt.at_lag(node.value)[node.index];
    case Op::input: return u[node.index];
    case Op::histnorm: return xt.sup_norm();
    case Op::winmax: {
      double best = 0;
      for (int i = 0; i < xt.count(); ++i)
        best = std::max(best, std::abs(xt.sample(i)[node.index]));
      return best;
    }
    case Op::add: return eval_node(*node.a, xt, u) + eval_node(*node.b, xt, u);
    case Op::sub: return eval_node(*node.a, xt, u) - eval_node(*node.b, xt, u);
    case Op::mul: return eval_node(*node.a, xt, u) * eval_node(*node.b, xt, u);
    case Op::div: return eval_node(*node.a, xt, u) / eval_node(*node.b, xt, u);
    case Op::pow:
      return std::pow(eval_node(*node.a, xt, u), eval_node(*node.b, xt, u));
    case Op::neg: return -eval_node(*node.a, xt, u);
    case Op::call_abs: return std::abs(eval_node(*node.a, xt, u));
    case Op::call_min:
      return std::min(eval_node(*node.a, xt, u), eval_node(*node.b, xt, u));
    case Op::call_max:
      return std::max(eval_node(*node.a, xt, u), eval_node(*node.b, xt, u));
    case Op::call_exp: return std::exp(eval_node(*node.a, xt, u));
    case Op::call_log: return std::log(eval_node(*node.a, xt, u));
    case Op::call_sqrt: return std::sqrt(eval_node(*node.a, xt, u));
    case Op::call_sin: return std::sin(eval_node(*node.a, xt, u));
    case Op::call_cos: return std::cos(eval_node(*node.a, xt, u));
    case Op::call_tanh: return std::tanh(eval_node(*node.a, xt, u));
  }
  throw Error("corrupt expression node");
}

bool node_delay_free(const Expression::Node& node) {
  if (references_window(node.op)) return false;
  if (node.a && !node_delay_free(*node.a)) return false;
  if (node.b && !node_delay_free(*node.b)) return false;
  return true;
}

}  // namespace

Expression Expression::compile(const std::string& source, int n, int m,
                               double theta) {
  Parser p(source, n, m, theta);
  NodePtr root = p.parse_expr();
  p.skip_ws();
  if (p.pos != source.size()) p.fail("trailing input");
  Expression e;
  e.root_ = std::move(root);
  e.source_ = source;
  return e;
}

double Expression::eval(const HistoryView& xt, std::span<const double> u) const {
  if (!root_) throw Error("Expression: empty");
  return eval_node(*root_, xt, u);
}

bool Expression::delay_free() const {
  return root_ && node_delay_free(*root_);
}

const std::string& Expression::source() const { return source_; }

SystemModel model_from_json(const nlohmann::json& spec) {
  for (const char* key : {"n", "m", "theta", "f", "h"})
    if (!spec.contains(key))
      throw ConfigError(std::string("model description: missing '") + key + "'");
  SystemModel mdl;
  mdl.id = spec.value("id", std::string("user-model"));
  mdl.n = spec["n"].get<int>();
  mdl.m = spec["m"].get<int>();
  mdl.theta = spec["theta"].get<double>();
  if (mdl.n < 1 || mdl.m < 0 || !(mdl.theta > 0))
    throw ConfigError("model description: need n >= 1, m >= 0, theta > 0");

  const auto& fj = spec["f"];
  if (!fj.is_array() || int(fj.size()) != mdl.n)
    throw ConfigError("model description: 'f' must list n expressions");
  auto fx = std::make_shared<std::vector<Expression>>();
  for (const auto& e : fj)
    fx->push_back(Expression::compile(e.get<std::string>(), mdl.n,
                                      std::max(1, mdl.m), mdl.theta));

  const auto& hj = spec["h"];
  if (!hj.is_array() || hj.empty())
    throw ConfigError("model description: 'h' must list output expressions");
  mdl.p = int(hj.size());
  auto hx = std::make_shared<std::vector<Expression>>();
  bool delay_free = true;
  for (const auto& e : hj) {
    hx->push_back(Expression::compile(e.get<std::string>(), mdl.n, 0, mdl.theta));
    delay_free = delay_free && hx->back().delay_free();
  }

  mdl.f = [fx](const HistoryView& xt, std::span<const double> u,
               std::span<double> dx) {
    for (size_t i = 0; i < fx->size(); ++i) dx[i] = (*fx)[i].eval(xt, u);
  };
  mdl.h = [hx](const HistoryView& xt, std::span<double> y) {
    for (size_t i = 0; i < hx->size(); ++i)
      y[i] = (*hx)[i].eval(xt, std::span<const double>{});
  };
  if (delay_free) {
    double theta = mdl.theta;
    int n = mdl.n;
    mdl.h0 = [hx, theta, n](std::span<const double> x, std::span<double> y) {
      // single-sample window: every reference resolves to s = 0
      HistoryView w(x.data(), n, 1, theta);
      for (size_t i = 0; i < hx->size(); ++i)
        y[i] = (*hx)[i].eval(w, std::span<const double>{});
    };
  }
  if (spec.contains("pi")) mdl.pi = parse_comparison(spec["pi"].get<std::string>());
  return mdl;
}

}  // namespace dios
