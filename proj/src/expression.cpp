#include "qkforge/expression.hpp"

#include <cctype>
#include <charconv>
#include <limits>

namespace qkforge {

namespace {

std::string normalize_greek(std::string_view in) {
  static const std::pair<std::string_view, std::string_view> greek[] = {
      {"\xCF\x87", "chi"}, {"\xCF\x81", "rho"}, {"\xCE\xB7", "eta"}};
  std::string out;
  for (size_t i = 0; i < in.size();) {
    bool hit = false;
    for (auto [g, ascii] : greek)
      if (in.substr(i, g.size()) == g) {
        out += ascii;
        i += g.size();
        hit = true;
        break;
      }
    if (!hit) out += in[i++];
  }
  return out;
}

}  // namespace

class ExpressionParser {
 public:
  ExpressionParser(Expression& e, std::string src) : e_(e), s_(std::move(src)) {}

  void run() {
    int root = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    // keep the root last
    if (root != static_cast<int>(e_.nodes_.size()) - 1) fail("internal: root not last");
  }

 private:
  using Op = Expression::Op;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("expression parse error at " + std::to_string(pos_) + ": " + msg + " in '" + s_ + "'");
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  int add(Expression::Node n) {
    e_.nodes_.push_back(n);
    return static_cast<int>(e_.nodes_.size()) - 1;
  }

  bool constant(int i) const {
    const auto& n = e_.nodes_[i];
    switch (n.op) {
      case Op::Const: return true;
      case Op::Var: return false;
      case Op::Neg: return constant(n.lhs);
      case Op::IntPow:
      case Op::RealPow: return constant(n.lhs);
      default: return constant(n.lhs) && constant(n.rhs);
    }
  }

  double fold(int i) const {
    const auto& n = e_.nodes_[i];
    switch (n.op) {
      case Op::Const: return n.value;
      case Op::Neg: return -fold(n.lhs);
      case Op::Add: return fold(n.lhs) + fold(n.rhs);
      case Op::Sub: return fold(n.lhs) - fold(n.rhs);
      case Op::Mul: return fold(n.lhs) * fold(n.rhs);
      case Op::Div: return fold(n.lhs) / fold(n.rhs);
      case Op::IntPow:
      case Op::RealPow: return std::pow(fold(n.lhs), n.value);
      case Op::Pow: return std::pow(fold(n.lhs), fold(n.rhs));
      case Op::Var: break;
    }
    throw std::logic_error("fold: not a constant");
  }

  int expr() {
    int lhs = term();
    for (;;) {
      if (eat('+')) lhs = add({Op::Add, 0.0, -1, lhs, term()});
      else if (eat('-')) lhs = add({Op::Sub, 0.0, -1, lhs, term()});
      else return lhs;
    }
  }

  int term() {
    int lhs = unary();
    for (;;) {
      if (eat('*')) lhs = add({Op::Mul, 0.0, -1, lhs, unary()});
      else if (eat('/')) lhs = add({Op::Div, 0.0, -1, lhs, unary()});
      else return lhs;
    }
  }

  int unary() {
    if (eat('-')) return add({Op::Neg, 0.0, -1, unary(), -1});
    if (eat('+')) return unary();
    return power();
  }

  int power() {
    int base = primary();
    if (!eat('^')) return base;
    int ex = unary();
    if (!constant(ex)) return add({Op::Pow, 0.0, -1, base, ex});
    double p = fold(ex);
    if (p == std::round(p) && std::abs(p) <= 64) return add({Op::IntPow, p, -1, base, -1});
    return add({Op::RealPow, p, -1, base, -1});
  }

  int primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      int inner = expr();
      if (!eat(')')) fail("missing ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      double v = 0.0;
      auto [end, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
      if (ec != std::errc()) fail("bad number");
      pos_ = end - s_.data();
      return add({Op::Const, v, -1, -1, -1});
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      std::string id = s_.substr(start, pos_ - start);
      for (size_t k = 0; k < e_.vars_.size(); ++k)
        if (e_.vars_[k] == id) return add({Op::Var, 0.0, static_cast<int>(k), -1, -1});
      pos_ = start;
      fail("unknown identifier '" + id + "'");
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  Expression& e_;
  std::string s_;
  size_t pos_ = 0;
};

Expression Expression::parse(std::string_view text, const std::vector<std::string>& variables) {
  Expression e;
  e.text_ = std::string(text);
  e.vars_ = variables;
  ExpressionParser(e, normalize_greek(text)).run();
  return e;
}

bool Expression::uses(int var) const {
  for (const auto& n : nodes_)
    if (n.op == Op::Var && n.var == var) return true;
  return false;
}

double Expression::min_divisor(std::span<const Cplx<double>> x) const {
  auto v = eval_nodes(x);
  double m = std::numeric_limits<double>::infinity();
  for (const auto& n : nodes_) {
    if (n.op == Op::Div) m = std::min(m, std::sqrt(norm2(v[n.rhs])));
    if ((n.op == Op::IntPow || n.op == Op::RealPow) && n.value < 0) m = std::min(m, std::sqrt(norm2(v[n.lhs])));
    if (n.op == Op::Pow) m = std::min(m, std::sqrt(norm2(v[n.lhs])));
  }
  return m;
}

std::vector<std::string> chart_variable_names(int n) {
  std::vector<std::string> v;
  for (int I = 2; I <= n; ++I) v.push_back("chi" + std::to_string(I));
  for (int I = 1; I <= n; ++I) v.push_back("rho" + std::to_string(I));
  for (int I = 1; I <= n; ++I) v.push_back("eta" + std::to_string(I));
  return v;
}

std::vector<std::string> prepotential_variable_names(int n) {
  std::vector<std::string> v;
  for (int a = 1; a <= n; ++a) v.push_back("X" + std::to_string(a));
  return v;
}

}  // namespace qkforge
