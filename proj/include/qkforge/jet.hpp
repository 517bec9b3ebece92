#pragma once

#include <memory>
#include <span>
#include <vector>

namespace qkforge {

// Monomial bookkeeping for truncated multivariate Taylor polynomials of
// total degree <= order (order <= 3).  Monomials are sorted index tuples.
class JetSpace {
 public:
  struct Term {
    int a, b, c;  // out[c] += lhs[a] * rhs[b]
  };

  static std::shared_ptr<const JetSpace> make(int dim, int order);

  int dim() const { return dim_; }
  int order() const { return order_; }
  int size() const { return size_; }

  int index(int i) const;
  int index(int i, int j) const;
  int index(int i, int j, int k) const;

  const std::vector<Term>& products() const { return products_; }
  // products restricted to the case where neither factor is the constant term
  const std::vector<Term>& nonconstant_products() const { return nc_products_; }

 private:
  JetSpace(int dim, int order);

  int dim_ = 0;
  int order_ = 0;
  int size_ = 0;
  std::vector<int> idx1_, idx2_, idx3_;
  std::vector<Term> products_, nc_products_;
};

using JetSpacePtr = std::shared_ptr<const JetSpace>;

// A Jet without a space is a plain constant and promotes on contact.
class Jet {
 public:
  Jet(double v = 0.0) : c_{v} {}
  Jet(JetSpacePtr s, double v);

  static Jet variable(const JetSpacePtr& s, int i, double v);
  // order-1 jet with prescribed gradient
  static Jet linear(const JetSpacePtr& s, double v, std::span<const double> grad);

  double value() const { return c_[0]; }
  double d(int i) const;
  double d(int i, int j) const;
  double d(int i, int j, int k) const;

  const JetSpacePtr& space() const { return s_; }
  std::span<const double> coefficients() const { return c_; }

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(const Jet& o);
  Jet& operator/=(const Jet& o);
  Jet operator-() const;

  // f(a) from the Taylor coefficients of f at a.value(): f, f', f''/2, f'''/6
  Jet compose(double f0, double f1, double f2, double f3) const;

 private:
  void adopt(const JetSpacePtr& s);

  JetSpacePtr s_;
  std::vector<double> c_;
};

inline Jet operator+(Jet a, const Jet& b) { return a += b; }
inline Jet operator-(Jet a, const Jet& b) { return a -= b; }
inline Jet operator*(Jet a, const Jet& b) { return a *= b; }
inline Jet operator/(Jet a, const Jet& b) { return a /= b; }
inline Jet operator+(Jet a, double b) { return a += Jet(b); }
inline Jet operator-(Jet a, double b) { return a -= Jet(b); }
inline Jet operator*(Jet a, double b) { return a *= Jet(b); }
inline Jet operator/(Jet a, double b) { return a *= Jet(1.0 / b); }
inline Jet operator+(double a, const Jet& b) { return Jet(a) += b; }
inline Jet operator-(double a, const Jet& b) { return Jet(a) -= b; }
inline Jet operator*(double a, const Jet& b) { return Jet(b) *= Jet(a); }
inline Jet operator/(double a, const Jet& b) { return Jet(a) /= b; }

Jet sqrt(const Jet& a);
Jet exp(const Jet& a);
Jet log(const Jet& a);
Jet sin(const Jet& a);
Jet cos(const Jet& a);
Jet atan(const Jet& a);
Jet atanh(const Jet& a);
Jet pow(const Jet& a, double p);
Jet atan2(const Jet& y, const Jet& x);

inline double value_of(double x) { return x; }
inline double value_of(const Jet& x) { return x.value(); }

}  // namespace qkforge
