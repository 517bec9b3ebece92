#include "qkforge/twistor.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace qkforge {

std::complex<double> section_eval(const O2Section& s, std::complex<double> zeta) {
  if (zeta == 0.0) throw DomainError("section_eval: zeta = 0");
  return std::conj(s.z) / zeta + s.x - s.z * zeta;
}

ImVector position(const O2Section& s) { return {2.0 * s.z.imag(), -2.0 * s.z.real(), s.x}; }

O2Section section_from_position(const ImVector& r) { return {{-0.5 * r[1], 0.5 * r[0]}, r[2]}; }

std::vector<ImVector> moduli_to_positions(const ModuliPoint& m) {
  std::vector<ImVector> out;
  for (const auto& s : m) out.push_back(position(s));
  return out;
}

std::vector<double> moduli_coordinates(const ModuliPoint& m) {
  std::vector<double> x;
  for (const auto& s : m) {
    ImVector r = position(s);
    x.insert(x.end(), {r[0], r[1], r[2]});
  }
  return x;
}

ModuliPoint moduli_from_coordinates(std::span<const double> x) {
  if (x.size() % 3 != 0) throw std::invalid_argument("moduli_from_coordinates: length not a multiple of 3");
  ModuliPoint m;
  for (size_t I = 0; 3 * I < x.size(); ++I) m.push_back(section_from_position({x[3 * I], x[3 * I + 1], x[3 * I + 2]}));
  return m;
}

std::pair<std::complex<double>, std::complex<double>> roots_eta0(const O2Section& s0) {
  double r0 = position(s0).norm();
  if (s0.z == 0.0 || r0 == 0.0) throw SingularPointError("roots_eta0: z0 = 0", {position(s0)[0], position(s0)[1], s0.x});
  return {(s0.x + r0) / (2.0 * s0.z), (s0.x - r0) / (2.0 * s0.z)};
}

Prepotential Prepotential::from_expression(std::string_view text, int arity) {
  int n = arity;
  if (n <= 0) {
    // deduce from the largest Xk that parses
    for (int k = 1; k <= 16; ++k)
      if (text.find("X" + std::to_string(k)) != std::string_view::npos) n = k;
    if (n <= 0) throw ParseError("prepotential: no X1..Xn variable found in '" + std::string(text) + "'");
  }
  Prepotential p;
  p.expr_ = Expression::parse(text, prepotential_variable_names(n));
  p.n_ = n;
  return p;
}

std::complex<double> Prepotential::operator()(std::span<const std::complex<double>> X) const {
  std::vector<Cplx<double>> v;
  for (auto c : X) v.push_back(from_std(c));
  return to_std(eval<double>(v));
}

double Prepotential::min_divisor(std::span<const std::complex<double>> X) const {
  std::vector<Cplx<double>> v;
  for (auto c : X) v.push_back(from_std(c));
  return expr_.min_divisor(v);
}

HomogeneityCheck prepotential_homogeneity(const Prepotential& p, double degree, int samples, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> lam(0.5, 2.0);
  HomogeneityCheck out;
  const int n = p.arity();
  for (int s = 0; s < samples; ++s) {
    std::vector<std::complex<double>> X(n);
    for (auto& c : X) c = {u(rng) + (u(rng) > 0 ? 0.3 : -0.3), u(rng)};
    if (p.min_divisor(X) < 1e-3) continue;
    std::complex<double> f = p(X);
    double scale = std::max(std::abs(f), 1e-300);
    double l = lam(rng);
    std::vector<std::complex<double>> Y(X);
    for (auto& c : Y) c *= l;
    out.scaling = std::max(out.scaling, std::abs(p(Y) - std::pow(l, degree) * f) / scale);
    // holomorphic: dF/dX_a from a complex central difference along the real axis
    std::complex<double> euler = 0.0;
    for (int a = 0; a < n; ++a) {
      double h = 1e-5 * std::max(1.0, std::abs(X[a]));
      std::vector<std::complex<double>> P(X), M(X);
      P[a] += h;
      M[a] -= h;
      euler += X[a] * (p(P) - p(M)) / (2.0 * h);
    }
    out.euler = std::max(out.euler, std::abs(euler - degree * f) / scale);
  }
  return out;
}

std::complex<double> cmap_bracket(const Prepotential& p, const ModuliPoint& m) {
  if (static_cast<int>(m.size()) != p.arity() + 1) throw std::invalid_argument("cmap_bracket: arity mismatch");
  roots_eta0(m[0]);  // singular-configuration check
  auto x = moduli_coordinates(m);
  double r0;
  auto s = detail::cmap_bracket<double>(p, x, r0);
  return to_std(s);
}

double cmap_F(const Prepotential& p, const ModuliPoint& m) {
  auto x = moduli_coordinates(m);
  std::complex<double> s = cmap_bracket(p, m);
  double r0 = position(m[0]).norm();
  double F = -s.real() / r0;
  if (!std::isfinite(F)) throw SingularPointError("cmap_F: prepotential pole", x);
  return F;
}

double toy_log_F(const ModuliPoint& m) {
  if (m.size() != 1) throw std::invalid_argument("toy_log_F: needs exactly one section");
  ImVector r = position(m[0]);
  double r0 = r.norm();
  if (!(std::abs(r[2]) < r0)) throw DomainError("toy_log_F: |x0| >= r0");
  std::vector<double> x{r[0], r[1], r[2]};
  return toy_log_F_generic<double>(x);
}

namespace {

bool eta0_singular(std::span<const double> x) {
  double r0 = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
  double z0 = 0.5 * std::hypot(x[0], x[1]);
  return !(r0 > 1e-12) || !(z0 > 1e-12 * r0);
}

}  // namespace

FFunction FFunction::cmap(Prepotential p, std::string label) {
  FFunction F;
  F.kind_ = Kind::CMap;
  F.n_ = p.arity();
  F.label_ = label.empty() ? p.text() : std::move(label);
  F.prep_ = std::make_shared<const Prepotential>(std::move(p));
  auto prep = F.prep_;
  F.f_ = [prep](std::span<const double> x) { return cmap_F_generic<double>(*prep, x); };
  F.fj_ = [prep](std::span<const Jet> x) { return cmap_F_generic<Jet>(*prep, x); };
  return F;
}

FFunction FFunction::toy_log() {
  FFunction F;
  F.kind_ = Kind::ToyLog;
  F.n_ = 0;
  F.label_ = "toy-log";
  F.f_ = [](std::span<const double> x) { return toy_log_F_generic<double>(x); };
  F.fj_ = [](std::span<const Jet> x) { return toy_log_F_generic<Jet>(x); };
  return F;
}

Jet FFunction::jet(std::span<const double> x, int order) const {
  auto v = seed_jets(x, order);
  return fj_(v);
}

bool FFunction::singular(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim()) throw std::invalid_argument("FFunction: dimension mismatch");
  switch (kind_) {
    case Kind::Custom: return false;
    case Kind::ToyLog: return eta0_singular(x);
    case Kind::CMap: break;
  }
  if (eta0_singular(x)) return true;
  ModuliPoint m = moduli_from_coordinates(x);
  auto [zp, zm] = roots_eta0(m[0]);
  std::vector<std::complex<double>> ep, em;
  double scale = 1.0;
  for (int I = 1; I <= n_; ++I) {
    ep.push_back(section_eval(m[I], zp));
    em.push_back(section_eval(m[I], zm));
    scale = std::max({scale, std::abs(ep.back()), std::abs(em.back())});
  }
  return std::min(prep_->min_divisor(ep), prep_->min_divisor(em)) < 1e-10 * scale;
}

ScalarField FFunction::field() const {
  FFunction self = *this;
  return ScalarField{dim(), [self](std::span<const double> x) { return self(x); },
                     [self](std::span<const double> x) { return self.singular(x); }};
}

namespace {

// Second derivatives of F at x, via the chosen backend.
Eigen::MatrixXd second_derivatives(const FFunction& F, std::span<const double> x, const EvalOptions& opt) {
  if (F.singular(x)) throw SingularPointError("singular point", {x.begin(), x.end()});
  if (opt.backend == Backend::Stencil) return hessian(F.field(), x, opt.stencil);
  Jet j = F.jet(x, 2);
  Eigen::MatrixXd H(F.dim(), F.dim());
  for (int a = 0; a < F.dim(); ++a)
    for (int b = 0; b < F.dim(); ++b) H(a, b) = j.d(a, b);
  return H;
}

Eigen::VectorXd first_derivatives(const FFunction& F, std::span<const double> x, const EvalOptions& opt) {
  if (F.singular(x)) throw SingularPointError("singular point", {x.begin(), x.end()});
  if (opt.backend == Backend::Stencil) return gradient(F.field(), x, opt.stencil);
  Jet j = F.jet(x, 1);
  Eigen::VectorXd g(F.dim());
  for (int a = 0; a < F.dim(); ++a) g[a] = j.d(a);
  return g;
}

}  // namespace

PolyharmonicResidual polyharmonicity_residual(const FFunction& F, std::span<const double> x, const EvalOptions& opt) {
  Eigen::MatrixXd H = second_derivatives(F, x, opt);
  PolyharmonicResidual r;
  r.scale = H.cwiseAbs().maxCoeff();
  const int N = F.n() + 1;
  for (int I = 0; I < N; ++I)
    for (int J = 0; J < N; ++J) {
      double lap = 0.0;
      for (int i = 0; i < 3; ++i) lap += H(3 * I + i, 3 * J + i);
      r.laplace = std::max(r.laplace, std::abs(lap));
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          r.symmetry = std::max(r.symmetry, std::abs(H(3 * I + i, 3 * J + j) - H(3 * J + i, 3 * I + j)));
    }
  return r;
}

SwannResidual swann_homogeneity_residual(const FFunction& F, std::span<const double> x, const EvalOptions& opt) {
  Eigen::VectorXd g = first_derivatives(F, x, opt);
  double l3 = 0.0, l0 = 0.0, f = F(x), scale = std::abs(f);
  for (int I = 0; I <= F.n(); ++I) {
    const double* r = &x[3 * I];
    const double* d = &g[3 * I];
    l3 -= r[0] * d[1] - r[1] * d[0];
    l0 += 2.0 * (r[0] * d[0] + r[1] * d[1] + r[2] * d[2]);
    scale = std::max({scale, std::abs(r[0] * d[1]), std::abs(r[1] * d[0]), 2.0 * std::abs(r[0] * d[0] + r[1] * d[1] + r[2] * d[2])});
  }
  return {std::abs(l3), std::abs(l0 - 2.0 * f), scale};
}

std::vector<double> rotate_coordinates(std::span<const double> x, const Quaternion& u) {
  std::vector<double> y(x.size());
  Quaternion v = (1.0 / std::sqrt(norm2(u))) * u;
  for (size_t I = 0; 3 * I < x.size(); ++I) {
    ImVector r = rotate_vector(v, {x[3 * I], x[3 * I + 1], x[3 * I + 2]});
    for (int i = 0; i < 3; ++i) y[3 * I + i] = r[i];
  }
  return y;
}

}  // namespace qkforge
