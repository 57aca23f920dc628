#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "crossings/jet.hpp"

namespace crossings::expr {

enum class Func { Exp, Log, Sin, Cos, Sqrt };

struct Node {
  enum class Kind { Number, Var, Add, Sub, Mul, Div, Pow, Neg, Call };
  Kind kind{};
  double number = 0.0;           // Kind::Number
  Func func = Func::Exp;         // Kind::Call
  std::unique_ptr<Node> lhs, rhs;
};

using NodePtr = std::unique_ptr<Node>;

/// Parse an expression in one free variable (named `var`, e.g. "tau").
/// Grammar: sums of products of powers, unary minus, exp/log/sin/cos/sqrt,
/// decimal numbers with optional exponent. Throws Error(Parse) with a
/// character position on bad input.
NodePtr parse(std::string_view text, std::string_view var = "tau");

/// Render back to a string that reparses to an equivalent expression.
std::string to_string(const Node& n, std::string_view var = "tau");

NodePtr clone(const Node& n);

/// Replace the variable x by scale*x (used for time-rescaling r(c tau)).
NodePtr scale_variable(const Node& n, double scale);

/// True when the node tree contains no variable (safe to fold to a number).
bool is_constant(const Node& n);

template <class T>
T eval(const Node& n, const T& x) {
  using std::cos;
  using std::exp;
  using std::log;
  using std::pow;
  using std::sin;
  using std::sqrt;
  switch (n.kind) {
    case Node::Kind::Number: return T(n.number);
    case Node::Kind::Var: return x;
    case Node::Kind::Add: return eval(*n.lhs, x) + eval(*n.rhs, x);
    case Node::Kind::Sub: return eval(*n.lhs, x) - eval(*n.rhs, x);
    case Node::Kind::Mul: return eval(*n.lhs, x) * eval(*n.rhs, x);
    case Node::Kind::Div: return eval(*n.lhs, x) / eval(*n.rhs, x);
    case Node::Kind::Neg: return -eval(*n.lhs, x);
    case Node::Kind::Pow: return eval_pow(n, x);
    case Node::Kind::Call: {
      T a = eval(*n.lhs, x);
      switch (n.func) {
        case Func::Exp: return exp(a);
        case Func::Log: return log(a);
        case Func::Sin: return sin(a);
        case Func::Cos: return cos(a);
        case Func::Sqrt: return sqrt(a);
      }
    }
  }
  return T(0);
}

// Constant exponents go through the single-argument pow so that negative
// bases with integral exponents stay in the real domain.
template <class T>
T eval_pow(const Node& n, const T& x) {
  using std::pow;
  T base = eval(*n.lhs, x);
  if (is_constant(*n.rhs)) {
    double c = eval(*n.rhs, 0.0);
    if constexpr (std::is_floating_point_v<T>) {
      return pow(base, static_cast<T>(c));
    } else {
      return pow(base, typename std::remove_cvref_t<decltype(base.d[0])>(c));
    }
  }
  return pow(base, eval(*n.rhs, x));
}

}  // namespace crossings::expr
