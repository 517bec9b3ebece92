#pragma once

#include <algorithm>
#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qkforge/cplx.hpp"
#include "qkforge/derivatives.hpp"
#include "qkforge/expression.hpp"
#include "qkforge/jet.hpp"
#include "qkforge/quaternion.hpp"

namespace qkforge {

// eta(zeta) = conj(z)/zeta + x - z zeta
struct O2Section {
  std::complex<double> z;
  double x = 0.0;
};

using ModuliPoint = std::vector<O2Section>;

std::complex<double> section_eval(const O2Section& s, std::complex<double> zeta);

// r = (2 Im z, -2 Re z, x)
ImVector position(const O2Section& s);
O2Section section_from_position(const ImVector& r);
std::vector<ImVector> moduli_to_positions(const ModuliPoint& m);

// Flat real coordinates x_i^I, ordered (x_1^0, x_2^0, x_3^0, x_1^1, ...).
std::vector<double> moduli_coordinates(const ModuliPoint& m);
ModuliPoint moduli_from_coordinates(std::span<const double> x);

// Antipodal roots (x0 +- r0) / (2 z0) of eta^0.
std::pair<std::complex<double>, std::complex<double>> roots_eta0(const O2Section& s0);

class Prepotential {
 public:
  // arity 0 deduces n from the highest X index used
  static Prepotential from_expression(std::string_view text, int arity = 0);

  int arity() const { return n_; }
  const std::string& text() const { return expr_.text(); }

  template <class T>
  Cplx<T> eval(std::span<const Cplx<T>> X) const {
    return expr_.eval<Cplx<T>>(X);
  }
  std::complex<double> operator()(std::span<const std::complex<double>> X) const;
  double min_divisor(std::span<const std::complex<double>> X) const;

 private:
  Expression expr_;
  int n_ = 0;
};

// |F(lambda X) - lambda^d F(X)| and |sum X_a dF/dX_a - d F| (complex central
// differences), relative to |F|, maximised over random complex samples.
struct HomogeneityCheck {
  double scaling = 0.0;
  double euler = 0.0;
};
HomogeneityCheck prepotential_homogeneity(const Prepotential& p, double degree, int samples, unsigned seed);

namespace detail {

template <class T>
Cplx<T> section_at(const T& x1, const T& x2, const T& x3, const Cplx<T>& zeta) {
  Cplx<T> z(-0.5 * x2, 0.5 * x1);
  return conj(z) / zeta + Cplx<T>(x3) - z * zeta;
}

// Sum of the prepotential over both roots of eta^0, divided by nothing.
template <class T>
Cplx<T> cmap_bracket(const Prepotential& p, std::span<const T> x, T& r0) {
  using std::sqrt;
  const int n = p.arity();
  r0 = sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
  Cplx<T> z0(-0.5 * x[1], 0.5 * x[0]);
  Cplx<T> two_z0 = Cplx<T>(2.0) * z0;
  Cplx<T> zp = Cplx<T>(x[2] + r0) / two_z0;
  Cplx<T> zm = Cplx<T>(x[2] - r0) / two_z0;
  std::vector<Cplx<T>> ep, em;
  ep.reserve(n);
  em.reserve(n);
  for (int I = 1; I <= n; ++I) {
    ep.push_back(section_at(x[3 * I], x[3 * I + 1], x[3 * I + 2], zp));
    em.push_back(section_at(x[3 * I], x[3 * I + 1], x[3 * I + 2], zm));
  }
  return p.eval<T>(std::span<const Cplx<T>>(ep)) + p.eval<T>(std::span<const Cplx<T>>(em));
}

}  // namespace detail

// F = -[P(eta(zeta+)) + P(eta(zeta-))] / r0, generic over double and Jet
template <class T>
T cmap_F_generic(const Prepotential& p, std::span<const T> x) {
  T r0;
  Cplx<T> s = detail::cmap_bracket(p, x, r0);
  return -s.re / r0;
}

// F = r0 - x0 artanh(x0 / r0)
template <class T>
T toy_log_F_generic(std::span<const T> x) {
  using std::atanh;
  using std::sqrt;
  T r0 = sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
  return r0 - x[2] * atanh(x[2] / r0);
}

double cmap_F(const Prepotential& p, const ModuliPoint& m);
// complex bracket before taking the real part; imaginary part is a reality check
std::complex<double> cmap_bracket(const Prepotential& p, const ModuliPoint& m);
double toy_log_F(const ModuliPoint& m);

class FFunction {
 public:
  enum class Kind { CMap, ToyLog, Custom };

  static FFunction cmap(Prepotential p, std::string label = "");
  static FFunction toy_log();

  // f must be callable on std::span<const double> and std::span<const Jet>
  template <class Fn>
  static FFunction custom(int n, std::string label, Fn f) {
    FFunction F;
    F.kind_ = Kind::Custom;
    F.n_ = n;
    F.label_ = std::move(label);
    F.f_ = [f](std::span<const double> x) { return f(x); };
    F.fj_ = [f](std::span<const Jet> x) { return f(x); };
    return F;
  }

  Kind kind() const { return kind_; }
  int n() const { return n_; }
  int dim() const { return 3 * (n_ + 1); }
  const std::string& label() const { return label_; }
  const Prepotential* prepotential() const { return prep_ ? prep_.get() : nullptr; }

  double operator()(std::span<const double> x) const { return f_(x); }
  Jet operator()(std::span<const Jet> x) const { return fj_(x); }
  // taylor jet of F at x
  Jet jet(std::span<const double> x, int order) const;

  // true on (or numerically at) a pole of the closed form
  bool singular(std::span<const double> x) const;
  ScalarField field() const;

 private:
  Kind kind_ = Kind::Custom;
  int n_ = 0;
  std::string label_;
  std::shared_ptr<const Prepotential> prep_;
  std::function<double(std::span<const double>)> f_;
  std::function<Jet(std::span<const Jet>)> fj_;
};

enum class Backend { Taylor, Stencil };

struct EvalOptions {
  Backend backend = Backend::Taylor;
  StencilOptions stencil{true};
};

struct PolyharmonicResidual {
  double laplace = 0.0;   // max |Delta_IJ F|
  double symmetry = 0.0;  // max |F_{x_i^I x_j^J} - F_{x_i^J x_j^I}|
  double scale = 0.0;     // max |second derivative|
  double relative() const { return std::max(laplace, symmetry) / std::max(1.0, scale); }
};
PolyharmonicResidual polyharmonicity_residual(const FFunction& F, std::span<const double> x,
                                              const EvalOptions& opt = {Backend::Stencil});

struct SwannResidual {
  double l3 = 0.0;  // |L_3 F|
  double l0 = 0.0;  // |L_0 F - 2F|
  double scale = 0.0;  // max(|F|, |r . grad F| per index)
  double relative() const { return std::max(l3, l0) / std::max(1.0, scale); }
};
// L = -r^I x grad_I and L_0 = 2 r^I . grad_I (the flow of q d/dq scales r quadratically)
SwannResidual swann_homogeneity_residual(const FFunction& F, std::span<const double> x,
                                         const EvalOptions& opt = {Backend::Stencil});

// Rotate every position vector by the unit quaternion u.
std::vector<double> rotate_coordinates(std::span<const double> x, const Quaternion& u);

}  // namespace qkforge
