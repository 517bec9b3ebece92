#include "qkforge/v_constraints.hpp"

#include <cmath>

namespace qkforge {

VFunction VFunction::from_expression(std::string_view text, int n) {
  if (n < 1) throw std::invalid_argument("VFunction: n must be >= 1");
  VFunction v;
  v.n_ = n;
  v.label_ = std::string(text);
  v.expr_ = Expression::parse(text, chart_variable_names(n));
  return v;
}

VFunction VFunction::from_callable(int n, std::function<double(std::span<const double>)> f,
                                   std::function<bool(std::span<const double>)> singular) {
  if (n < 1) throw std::invalid_argument("VFunction: n must be >= 1");
  VFunction v;
  v.n_ = n;
  v.label_ = "callable";
  v.f_ = std::move(f);
  v.singular_ = std::move(singular);
  return v;
}

VFunction VFunction::from_model(const FFunction& F) {
  const int n = F.n();
  Quaternion q = default_fiber_points().front();
  VFunction v = from_callable(
      n, [F, q, n](std::span<const double> c) { return extract_V(F, BaseChart::from_coordinates(n, c), q); },
      [F, q, n](std::span<const double> c) {
        BaseChart ch = BaseChart::from_coordinates(n, c);
        if (ch.rho[1] == 0.0) return true;
        auto x = embed_coordinates<double>(n, c, q, 1.0);
        return F.singular(x);
      });
  v.label_ = F.label();
  return v;
}

double VFunction::operator()(std::span<const double> c) const {
  if (static_cast<int>(c.size()) != dim()) throw std::invalid_argument("VFunction: expected 3n-1 coordinates");
  if (expr_) return expr_->eval<double>(c);
  return f_(c);
}

bool VFunction::singular(std::span<const double> c) const {
  if (singular_ && singular_(c)) return true;
  if (expr_) {
    std::vector<Cplx<double>> z(c.begin(), c.end());
    return expr_->min_divisor(z) < 1e-12;
  }
  return false;
}

ScalarField VFunction::field() const {
  VFunction self = *this;
  return ScalarField{dim(), [self](std::span<const double> c) { return self(c); },
                     [self](std::span<const double> c) { return self.singular(c); }};
}

VDerivatives::VDerivatives(const VFunction& Vf, std::span<const double> c, const StencilOptions& st) {
  const int m = Vf.dim();
  if (static_cast<int>(c.size()) != m) throw std::invalid_argument("VDerivatives: expected 3n-1 coordinates");
  if (Vf.singular(c)) throw SingularPointError("V: singular point", {c.begin(), c.end()});
  g.resize(m);
  H.resize(m, m);
  if (Vf.expr_) {
    auto x = seed_jets(c, 2);
    Jet j = Vf.expr_->eval<Jet>(x);
    V = j.value();
    for (int a = 0; a < m; ++a) {
      g[a] = j.d(a);
      for (int b = 0; b < m; ++b) H(a, b) = j.d(a, b);
    }
    return;
  }
  ScalarField f = Vf.field();
  V = f(c);
  g = gradient(f, c, st);
  H = hessian(f, c, st);
}

namespace {

BaseChart chart_of(const VFunction& Vf, std::span<const double> c) {
  BaseChart ch = BaseChart::from_coordinates(Vf.n(), c);
  if (ch.rho[1] == 0.0) throw DomainError("rho^1 = 0: frame is degenerate");
  return ch;
}

}  // namespace

std::vector<ImVector> B_from_V(const VFunction& Vf, std::span<const double> c) {
  return B_from_V(chart_of(Vf, c), VDerivatives(Vf, c));
}

std::vector<ImVector> B_from_V(const BaseChart& ch, const VDerivatives& d) {
  const int n = ch.n;
  if (ch.rho[1] == 0.0) throw DomainError("rho^1 = 0: frame is degenerate");
  const auto& g = d.g;
  std::vector<ImVector> B(n + 1, ImVector::Zero());
  for (int I = 1; I <= n; ++I) {
    if (I >= 2) B[I][0] = g[chi_index(n, I)];
    B[I][1] = g[rho_index(n, I)];
    B[I][2] = g[eta_index(n, I)];
  }
  double b11 = 0.0, b01 = 0.0, b02 = 0.0, b03 = d.V;
  for (int I = 2; I <= n; ++I) {
    b11 += ch.chi[I] * g[rho_index(n, I)] - ch.rho[I] * g[chi_index(n, I)];
    b01 += ch.chi[I] * g[eta_index(n, I)] - ch.eta[I] * g[chi_index(n, I)];
    b03 -= ch.chi[I] * g[chi_index(n, I)];
  }
  for (int I = 1; I <= n; ++I) {
    b02 += ch.rho[I] * g[eta_index(n, I)] - ch.eta[I] * g[rho_index(n, I)];
    b03 -= ch.rho[I] * g[rho_index(n, I)] + ch.eta[I] * g[eta_index(n, I)];
  }
  B[1][0] = b11 / ch.rho[1];
  B[0] = ImVector(b01 - ch.eta[1] * B[1][0], b02, b03);
  return B;
}

Eigen::MatrixXd U_from_V(const VFunction& Vf, std::span<const double> c) {
  return U_from_V(chart_of(Vf, c), VDerivatives(Vf, c));
}

Eigen::MatrixXd U_from_V(const BaseChart& ch, const VDerivatives& d) {
  const int n = ch.n;
  const double r1 = ch.rho[1], e1 = ch.eta[1];
  if (r1 == 0.0) throw DomainError("rho^1 = 0: frame is degenerate");
  const auto& g = d.g;
  const auto& H = d.H;
  auto ci = [&](int I) { return chi_index(n, I); };
  auto ri = [&](int I) { return rho_index(n, I); };
  auto ei = [&](int I) { return eta_index(n, I); };

  // primed block, I', J' = 2..n
  const int p = n - 1;
  Eigen::MatrixXd Up(p, p);
  Eigen::VectorXd rp(p), ep(p), cp(p);
  for (int a = 0; a < p; ++a) {
    int I = a + 2;
    rp[a] = ch.rho[I];
    ep[a] = ch.eta[I];
    cp[a] = ch.chi[I];
    for (int b = 0; b < p; ++b) {
      int J = b + 2;
      Up(a, b) = 0.25 * (H(ci(I), ci(J)) + H(ri(I), ri(J)) + H(ei(I), ei(J)));
    }
  }
  Eigen::VectorXd gr(p), ge(p), gc(p);
  for (int a = 0; a < p; ++a) {
    gr[a] = g[ri(a + 2)];
    ge[a] = g[ei(a + 2)];
    gc[a] = g[ci(a + 2)];
  }
  Eigen::VectorXd t1 = 0.5 * gr - Up * rp;
  Eigen::VectorXd t0 = 0.5 * ge - Up * ep;
  double t11 = 0.5 * (r1 * g[ri(1)] - rp.dot(gr)) + rp.dot(Up * rp);
  double t01 = 0.5 * (r1 * g[ei(1)] - ep.dot(gr)) + ep.dot(Up * rp);
  double t00 = 0.5 * (d.V - r1 * g[ri(1)] - cp.dot(gc) - rp.dot(gr) - 2.0 * ep.dot(ge)) + ep.dot(Up * ep);

  // back to the original frame
  Eigen::MatrixXd U = Eigen::MatrixXd::Zero(n + 1, n + 1);
  U.bottomRightCorner(p, p) = Up;
  for (int a = 0; a < p; ++a) {
    double u1 = t1[a] / r1;
    double u0 = t0[a] - e1 * u1;
    U(a + 2, 1) = U(1, a + 2) = u1;
    U(a + 2, 0) = U(0, a + 2) = u0;
  }
  U(1, 1) = t11 / (r1 * r1);
  U(0, 1) = U(1, 0) = t01 / r1 - e1 * U(1, 1);
  U(0, 0) = t00 - 2.0 * e1 * U(0, 1) - e1 * e1 * U(1, 1);
  return U;
}

namespace {

enum Kind { Chi = 0, Rho = 1, Eta = 2 };

// W_ij = sum over terms of c^I dV/d(b^I) plus a multiple of V; the value and
// its derivative along coordinate a follow from g and H.
struct LinearTerm {
  Kind coord, deriv;
  double weight;
};

struct WEntry {
  std::vector<LinearTerm> terms;
  double v_weight = 0.0;
};

std::array<std::array<WEntry, 3>, 3> w_table() {
  std::array<std::array<WEntry, 3>, 3> W;
  W[0][0] = {{{Chi, Chi, 1.0}}, 1.0};
  W[0][1] = W[1][0] = {{{Chi, Rho, 1.0}}, 0.0};
  W[0][2] = W[2][0] = {{{Chi, Eta, 1.0}}, 0.0};
  W[1][1] = {{{Rho, Rho, 1.0}}, 1.0};
  W[1][2] = W[2][1] = {{{Rho, Eta, 1.0}}, 0.0};
  W[2][2] = {{{Chi, Chi, -1.0}, {Rho, Rho, -1.0}}, 2.0};
  return W;
}

struct WEval {
  const BaseChart& ch;
  const VDerivatives& d;

  int first(Kind k) const { return k == Chi ? 2 : 1; }
  int index(Kind k, int I) const {
    return k == Chi ? chi_index(ch.n, I) : k == Rho ? rho_index(ch.n, I) : eta_index(ch.n, I);
  }
  double coord(Kind k, int I) const { return k == Chi ? ch.chi[I] : k == Rho ? ch.rho[I] : ch.eta[I]; }

  double value(const WEntry& w) const {
    double s = w.v_weight * d.V;
    for (const auto& t : w.terms)
      for (int I = std::max(first(t.coord), first(t.deriv)); I <= ch.n; ++I)
        s += t.weight * coord(t.coord, I) * d.g[index(t.deriv, I)];
    return s;
  }

  double derivative(const WEntry& w, int a) const {
    double s = w.v_weight * d.g[a];
    for (const auto& t : w.terms)
      for (int I = std::max(first(t.coord), first(t.deriv)); I <= ch.n; ++I) {
        int b = index(t.deriv, I);
        if (index(t.coord, I) == a) s += t.weight * d.g[b];
        s += t.weight * coord(t.coord, I) * d.H(a, b);
      }
    return s;
  }
};

}  // namespace

Eigen::Matrix3d W_matrix(const BaseChart& ch, const VDerivatives& d) {
  auto table = w_table();
  WEval e{ch, d};
  Eigen::Matrix3d W;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) W(i, j) = e.value(table[i][j]);
  return W;
}

ConstraintResiduals constraint_residuals(const VFunction& Vf, std::span<const double> c, bool exhaustive) {
  BaseChart ch = BaseChart::from_coordinates(Vf.n(), c);
  VDerivatives d(Vf, c);
  const int n = ch.n;
  WEval e{ch, d};
  ConstraintResiduals r;
  auto record = [&](std::string name, double v, bool sym) {
    v = std::abs(v);
    (sym ? r.symmetry : r.closure) = std::max(sym ? r.symmetry : r.closure, v);
    r.items.emplace_back(std::move(name), v);
  };
  const char* names[3] = {"chi", "rho", "eta"};
  // mixed partial symmetry: (chi, rho), (rho, eta), (eta, chi)
  const Kind pairs[3][2] = {{Chi, Rho}, {Rho, Eta}, {Eta, Chi}};
  for (const auto& pr : pairs) {
    int lo = std::max(e.first(pr[0]), e.first(pr[1]));
    for (int I = lo; I <= n; ++I)
      for (int J = I + 1; J <= n; ++J)
        record(std::string("d") + names[pr[0]] + std::to_string(I) + "d" + names[pr[1]] + std::to_string(J) + " sym",
               d.H(e.index(pr[0], I), e.index(pr[1], J)) - d.H(e.index(pr[0], J), e.index(pr[1], I)), true);
  }
  // closure of W: d_b^I W_aj - d_a^I W_bj with (b, a) = (rho, chi), (eta, rho), (chi, eta)
  auto table = w_table();
  struct Eq {
    Kind db, da;
    int wa, wb;  // W rows
  };
  const Eq eqs[3] = {{Rho, Chi, 0, 1}, {Eta, Rho, 1, 2}, {Chi, Eta, 2, 0}};
  for (int k = 0; k < 3; ++k) {
    const Eq& q = eqs[k];
    int lo = std::max(e.first(q.db), e.first(q.da));
    for (int j = 0; j < 3; ++j) {
      bool independent = j == 2 || (k == 0 && j == 1);
      if (!exhaustive && !independent) continue;
      for (int I = lo; I <= n; ++I)
        record("W eq" + std::to_string(k + 1) + " j=" + std::to_string(j + 1) + " I=" + std::to_string(I),
               e.derivative(table[q.wa][j], e.index(q.db, I)) - e.derivative(table[q.wb][j], e.index(q.da, I)), false);
    }
  }
  return r;
}

double cp_residual(const VFunction& Vf, std::span<const double> c) {
  if (Vf.n() != 1) throw std::invalid_argument("cp_residual: n must be 1");
  if (!(c[0] > 0.0)) throw DomainError("cp_residual: rho must be positive");
  VDerivatives d(Vf, c);
  return std::abs(c[0] * (d.H(0, 0) + d.H(1, 1)) - d.g[0]);
}

CPOutput cp_assemble(const VFunction& Vf, std::span<const double> c) {
  if (Vf.n() != 1) throw std::invalid_argument("cp_assemble: n must be 1");
  const double rho = c[0], eta = c[1];
  if (!(rho > 0.0)) throw DomainError("cp_assemble: rho must be positive");
  VDerivatives d(Vf, c);
  const double V = d.V, Vr = d.g[0], Ve = d.g[1];
  if (V == 0.0) throw DegeneratePointError("cp_assemble: V = 0");
  const double D = V * Vr - rho * Vr * Vr - rho * Ve * Ve;
  if (std::abs(D) < 1e-14 * std::max(1.0, V * V)) throw DegeneratePointError("cp_assemble: V V_rho - rho |dV|^2 = 0");
  // (alpha, beta) = ((rho, 0), (eta, 1)) (dpsi1, dpsi0)
  Eigen::Vector4d alpha(0.0, 0.0, 0.0, rho), beta(0.0, 0.0, 1.0, eta);
  CPOutput out;
  out.metric.setZero();
  out.metric(0, 0) = out.metric(1, 1) = D / (4.0 * rho * V * V);
  Eigen::Vector4d a = (V - rho * Vr) * alpha - rho * Ve * beta;
  Eigen::Vector4d b = rho * Ve * alpha - rho * Vr * beta;
  out.metric += (a * a.transpose() + b * b.transpose()) / (rho * V * V * D);
  out.omega0 = Eigen::Vector4d(Vr, Ve, 0.0, 0.0) / (2.0 * V);
  out.omega[0] = Eigen::Vector4d(Ve, -Vr, 0.0, 0.0) / (2.0 * V);
  out.omega[1] = alpha / V;
  out.omega[2] = beta / V;
  return out;
}

}  // namespace qkforge
