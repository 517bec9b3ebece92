#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qkforge/cplx.hpp"
#include "qkforge/jet.hpp"

namespace qkforge {

struct ParseError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

template <class U>
Cplx<U> pow(const Cplx<U>& z, double p) {
  return exp(p * log(z));
}

// Arithmetic expressions: + - * / ^, parentheses, real literals and a fixed
// identifier list.  Parsed once; evaluable over any scalar with the usual
// arithmetic (double, Jet, Cplx<double>, Cplx<Jet>).
class Expression {
 public:
  static Expression parse(std::string_view text, const std::vector<std::string>& variables);

  const std::string& text() const { return text_; }
  const std::vector<std::string>& variables() const { return vars_; }
  bool uses(int var) const;

  template <class T>
  T eval(std::span<const T> x) const {
    return eval_nodes(x).back();
  }

  // Smallest |divisor| met during evaluation (denominators and bases of
  // negative powers); +inf when there are none.
  double min_divisor(std::span<const Cplx<double>> x) const;

 private:
  enum class Op { Const, Var, Neg, Add, Sub, Mul, Div, IntPow, RealPow, Pow };
  struct Node {
    Op op;
    double value = 0.0;  // constant, or exponent for IntPow/RealPow
    int var = -1;
    int lhs = -1, rhs = -1;
  };
  friend class ExpressionParser;

  template <class T>
  std::vector<T> eval_nodes(std::span<const T> x) const;

  std::string text_;
  std::vector<std::string> vars_;
  std::vector<Node> nodes_;  // children precede parents; last node is the root
};

namespace detail {

template <class T>
T int_pow(const T& x, long n) {
  if (n < 0) return T(1.0) / int_pow(x, -n);
  T result(1.0);
  T base = x;
  bool first = true;
  while (n > 0) {
    if (n & 1) {
      result = first ? base : result * base;
      first = false;
    }
    n >>= 1;
    if (n > 0) base = base * base;
  }
  return result;
}

}  // namespace detail

template <class T>
std::vector<T> Expression::eval_nodes(std::span<const T> x) const {
  using std::exp;
  using std::log;
  using std::pow;
  if (x.size() < vars_.size()) throw std::invalid_argument("Expression::eval: too few arguments");
  std::vector<T> v;
  v.reserve(nodes_.size());
  for (const auto& n : nodes_) {
    switch (n.op) {
      case Op::Const: v.push_back(T(n.value)); break;
      case Op::Var: v.push_back(x[n.var]); break;
      case Op::Neg: v.push_back(-v[n.lhs]); break;
      case Op::Add: v.push_back(v[n.lhs] + v[n.rhs]); break;
      case Op::Sub: v.push_back(v[n.lhs] - v[n.rhs]); break;
      case Op::Mul: v.push_back(v[n.lhs] * v[n.rhs]); break;
      case Op::Div: v.push_back(v[n.lhs] / v[n.rhs]); break;
      case Op::IntPow: v.push_back(detail::int_pow(v[n.lhs], static_cast<long>(n.value))); break;
      case Op::RealPow: v.push_back(pow(v[n.lhs], n.value)); break;
      case Op::Pow: v.push_back(exp(v[n.rhs] * log(v[n.lhs]))); break;
    }
  }
  return v;
}

// chi2..chin, rho1..rhon, eta1..etan in chart order
std::vector<std::string> chart_variable_names(int n);
// X1..Xn
std::vector<std::string> prepotential_variable_names(int n);

}  // namespace qkforge
