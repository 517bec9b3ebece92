#include "qkforge/swann.hpp"

#include <algorithm>
#include <cmath>

namespace qkforge {

namespace {

constexpr int eps3(int i, int j, int k) { return (i - j) * (j - k) * (k - i) / 2; }

int X3(int I) { return 3 * I + 2; }

double max_abs(const Eigen::MatrixXd& M) { return M.size() ? M.cwiseAbs().maxCoeff() : 0.0; }

std::vector<double> embed_values(const BaseChart& chart, const Quaternion& q, double scale) {
  auto c = chart.coordinates();
  return embed_coordinates<double>(chart.n, c, q, scale);
}

// d chi_vec^J / d c as a 3 x m matrix
Eigen::MatrixXd dchi(int n, int J) {
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(3, 3 * n - 1);
  if (J >= 2) D(0, J - 2) = 1.0;
  if (J >= 1) {
    D(1, n - 1 + J - 1) = 1.0;
    D(2, 2 * n - 1 + J - 1) = 1.0;
  }
  return D;
}

}  // namespace

BaseChart BaseChart::from_coordinates(int n, std::span<const double> c) {
  if (n < 1) throw std::invalid_argument("BaseChart: n must be >= 1");
  if (static_cast<int>(c.size()) != 3 * n - 1) throw std::invalid_argument("BaseChart: expected 3n-1 coordinates");
  BaseChart b;
  b.n = n;
  b.chi.assign(n + 1, 0.0);
  b.rho.assign(n + 1, 0.0);
  b.eta.assign(n + 1, 0.0);
  b.psi.assign(n + 1, 0.0);
  auto v = chi_vectors<double>(n, c);
  for (int I = 0; I <= n; ++I) {
    b.chi[I] = v[I][0];
    b.rho[I] = v[I][1];
    b.eta[I] = v[I][2];
  }
  return b;
}

std::vector<double> BaseChart::coordinates() const {
  std::vector<double> c;
  for (int I = 2; I <= n; ++I) c.push_back(chi[I]);
  for (int I = 1; I <= n; ++I) c.push_back(rho[I]);
  for (int I = 1; I <= n; ++I) c.push_back(eta[I]);
  return c;
}

ModuliPoint embed(const BaseChart& chart, const Quaternion& q, bool scaled, double V) {
  if (norm2(q) == 0.0) throw DomainError("embed: zero quaternion");
  if (scaled && V == 0.0) throw DomainError("embed: V = 0");
  return moduli_from_coordinates(embed_values(chart, q, scaled ? 1.0 / V : 1.0));
}

double extract_V(const FFunction& F, const BaseChart& chart, const Quaternion& q, const EvalOptions& opt) {
  if (norm2(q) == 0.0) throw DomainError("extract_V: zero quaternion");
  auto x = embed_values(chart, q, 1.0);
  return legendre_transform(F, x, opt).K / norm2(q);
}

Eigen::MatrixXd extract_U(const FFunction& F, const BaseChart& chart, const Quaternion& q, const EvalOptions& opt) {
  if (norm2(q) == 0.0) throw DomainError("extract_U: zero quaternion");
  auto x = embed_values(chart, q, 1.0);
  return norm2(q) * higgs_from_F(F, x, opt);
}

Eigen::MatrixXd extract_U_scaled(const FFunction& F, const BaseChart& chart, const Quaternion& q, double V,
                                 const EvalOptions& opt) {
  auto x = embed_values(chart, q, 1.0 / V);
  return norm2(q) * higgs_from_F(F, x, opt) / V;
}

Eigen::VectorXd extract_dV(const FFunction& F, const BaseChart& chart, const Quaternion& q) {
  const int n = chart.n, m = 3 * n - 1, N = 3 * (n + 1);
  auto x = embed_values(chart, q, 1.0);
  Jet f = F.jet(x, 2);
  // grad_y K with K = F - sum_I x3^I F_{x3^I}
  Eigen::VectorXd gK(N);
  for (int a = 0; a < N; ++a) {
    double v = f.d(a);
    for (int I = 0; I <= n; ++I) {
      if (a == X3(I)) v -= f.d(a);
      v -= x[X3(I)] * f.d(X3(I), a);
    }
    gK[a] = v;
  }
  auto cs = seed_jets(chart.coordinates(), 1);
  Quat<Jet> qj(q.w, q.x, q.y, q.z);
  auto y = embed_coordinates<Jet>(n, cs, qj, Jet(1.0));
  Eigen::VectorXd dV = Eigen::VectorXd::Zero(m);
  for (int a = 0; a < N; ++a)
    for (int j = 0; j < m; ++j) dV[j] += gK[a] * y[a].d(j);
  return dV / norm2(q);
}

std::vector<ImVector> compute_B(const Eigen::MatrixXd& U, const BaseChart& chart) {
  std::vector<ImVector> B;
  for (int K = 0; K <= chart.n; ++K) {
    ImVector b = ImVector::Zero();
    for (int I = 0; I <= chart.n; ++I) b += 2.0 * U(K, I) * chart.chi_vec(I);
    B.push_back(b);
  }
  return B;
}

namespace {

struct Pullback {
  std::vector<double> y;  // scaled point
  Eigen::MatrixXd J;      // N x (m + 4), columns (chart, q)
};

Pullback scaled_pullback(const BaseChart& chart, const Quaternion& q, double V, const Eigen::VectorXd& dV) {
  const int n = chart.n, m = 3 * n - 1, N = 3 * (n + 1);
  auto space = JetSpace::make(m + 4, 1);
  auto c = chart.coordinates();
  std::vector<Jet> cj;
  for (int j = 0; j < m; ++j) cj.push_back(Jet::variable(space, j, c[j]));
  Quat<Jet> qj(Jet::variable(space, m, q.w), Jet::variable(space, m + 1, q.x), Jet::variable(space, m + 2, q.y),
               Jet::variable(space, m + 3, q.z));
  std::vector<double> g(m + 4, 0.0);
  for (int j = 0; j < m; ++j) g[j] = dV[j];
  Jet Vj = Jet::linear(space, V, g);
  auto y = embed_coordinates<Jet>(n, cj, qj, 1.0 / Vj);
  Pullback p;
  p.J.resize(N, m + 4);
  for (int a = 0; a < N; ++a) {
    p.y.push_back(y[a].value());
    for (int j = 0; j < m + 4; ++j) p.J(a, j) = y[a].d(j);
  }
  return p;
}

}  // namespace

CExtraction extract_C(const FFunction& F, const BaseChart& chart, std::span<const Quaternion> qs, double V,
                      const Eigen::VectorXd& dV, const std::vector<ImVector>& B, double sigma_tol) {
  const int n = chart.n, m = 3 * n - 1;
  if (qs.empty()) throw std::invalid_argument("extract_C: need at least one fiber point");
  double bscale = 1.0;
  for (const auto& b : B) bscale = std::max(bscale, b.cwiseAbs().maxCoeff());
  std::vector<std::vector<Eigen::VectorXd>> samples;
  CExtraction out;
  for (const auto& q : qs) {
    Pullback p = scaled_pullback(chart, q, V, dV);
    ConnectionForm A = shifted_connection(F, p.y);
    Eigen::Matrix4d S = left_invariant_matrix(q);
    std::vector<Eigen::VectorXd> Cq;
    for (int K = 0; K <= n; ++K) {
      Eigen::VectorXd alpha = p.J.transpose() * A.a[K];
      Eigen::Vector4d beta = S.transpose().partialPivLu().solve(Eigen::Vector4d(alpha.tail(4)));
      double r = std::abs(beta[0]);
      for (int i = 0; i < 3; ++i) r = std::max(r, std::abs(beta[1 + i] - B[K][i]));
      out.sigma_residual = std::max(out.sigma_residual, r / bscale);
      Cq.push_back(alpha.head(m));
    }
    samples.push_back(std::move(Cq));
  }
  for (int K = 0; K <= n; ++K) {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(m);
    for (const auto& s : samples) mean += s[K];
    mean /= static_cast<double>(samples.size());
    for (const auto& s : samples) out.spread = std::max(out.spread, max_abs(s[K] - mean));
    out.C.push_back(mean);
  }
  if (out.sigma_residual > sigma_tol)
    throw GaugeRepresentativeError("extract_C: shifted connection has sigma components beyond sigma.B (residual " +
                                   std::to_string(out.sigma_residual) + ")");
  return out;
}

const std::vector<Quaternion>& default_fiber_points() {
  static const std::vector<Quaternion> qs{
      {0.9, 0.2, -0.3, 0.25},
      {0.52, -0.91, 0.65, 0.78},
      {-0.21, 0.35, 0.56, -0.14},
      {0.96, 0.96, -0.32, 1.44},
      {0.22, -0.44, -0.66, 0.55},
  };
  return qs;
}

ReducedData reduce(const FFunction& F, const BaseChart& chart, const ReduceOptions& opt) {
  if (F.n() != chart.n) throw std::invalid_argument("reduce: chart and model dimensions differ");
  const auto& qs = opt.q_samples.empty() ? default_fiber_points() : opt.q_samples;
  ReducedData r;
  const Quaternion& q0 = qs.front();
  r.V = extract_V(F, chart, q0);
  r.U = extract_U(F, chart, q0);
  double uscale = std::max(1e-300, max_abs(r.U));
  for (size_t k = 1; k < qs.size(); ++k) {
    double v = extract_V(F, chart, qs[k]);
    r.q_spread_V = std::max(r.q_spread_V, std::abs(v - r.V) / std::max(std::abs(r.V), 1e-300));
    r.q_spread_U = std::max(r.q_spread_U, max_abs(extract_U(F, chart, qs[k]) - r.U) / uscale);
  }
  if (r.q_spread_V > opt.q_tol || r.q_spread_U > opt.q_tol)
    throw ModelInconsistencyError("reduce: V or U depends on the fiber point (spread " +
                                  std::to_string(std::max(r.q_spread_V, r.q_spread_U)) + "); not a Swann bundle");
  r.dV = extract_dV(F, chart, q0);
  r.B = compute_B(r.U, chart);
  if (opt.compute_C) {
    std::vector<Quaternion> cq(qs.begin(), qs.begin() + std::min<size_t>(3, qs.size()));
    CExtraction c = extract_C(F, chart, cq, r.V, r.dV, r.B, opt.sigma_tol);
    r.C = c.C;
    r.sigma_residual = c.sigma_residual;
    r.c_spread = c.spread;
  }
  return r;
}

QKConnection qk_connection(const BaseChart& chart, const ReducedData& r) {
  const int n = chart.n, m = 3 * n - 1, D = 4 * n;
  if (r.V == 0.0) throw DomainError("qk_connection: V = 0");
  if (static_cast<int>(r.C.size()) != n + 1) throw std::invalid_argument("qk_connection: missing C");
  QKConnection w;
  w.omega0 = Eigen::VectorXd::Zero(D);
  w.omega0.head(m) = r.dV / (2.0 * r.V);
  for (int i = 0; i < 3; ++i) w.omega[i] = Eigen::VectorXd::Zero(D);
  for (int I = 0; I <= n; ++I) {
    ImVector ch = chart.chi_vec(I);
    for (int i = 0; i < 3; ++i) {
      w.omega[i].head(m) += r.C[I] * ch[i];
      w.omega[i][m + I] += ch[i];
    }
    for (int J = 0; J <= n; ++J) {
      Eigen::MatrixXd dJ = dchi(n, J);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          for (int k = 0; k < 3; ++k) {
            int e = eps3(i, j, k);
            if (e != 0) w.omega[i].head(m) -= r.U(I, J) * e * ch[j] * dJ.row(k).transpose();
          }
    }
  }
  for (int i = 0; i < 3; ++i) w.omega[i] /= r.V;
  return w;
}

Eigen::MatrixXd qk_metric(const BaseChart& chart, const ReducedData& r) {
  return qk_metric(chart, r, qk_connection(chart, r));
}

Eigen::MatrixXd qk_metric(const BaseChart& chart, const ReducedData& r, const QKConnection& w) {
  const int n = chart.n, m = 3 * n - 1, D = 4 * n;
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(D, D);
  for (int I = 0; I <= n; ++I)
    for (int J = 0; J <= n; ++J) g.topLeftCorner(m, m) += r.U(I, J) * dchi(n, I).transpose() * dchi(n, J);
  Eigen::MatrixXd Dm = Eigen::MatrixXd::Zero(n + 1, D);
  for (int I = 0; I <= n; ++I) {
    Dm.row(I).head(m) = r.C[I].transpose();
    Dm(I, m + I) = 1.0;
  }
  Eigen::MatrixXd Uinv = guarded_inverse(r.U);
  g += Dm.transpose() * Uinv * Dm;
  g /= 2.0 * r.V;
  g -= w.omega0 * w.omega0.transpose();
  for (int i = 0; i < 3; ++i) g -= w.omega[i] * w.omega[i].transpose();
  return 0.5 * (g + g.transpose());
}

Eigen::MatrixXd bogomolnyi_F(const BaseChart& chart, const std::vector<Eigen::MatrixXd>& dU, int K) {
  const int n = chart.n, m = 3 * n - 1;
  Eigen::MatrixXd Fk = Eigen::MatrixXd::Zero(m, m);
  auto d = [&](int coord, int I, int J) { return dU[coord](I, J); };
  auto add = [&](int a, int b, double c) {
    Fk(a, b) += c;
    Fk(b, a) -= c;
  };
  // chi^1 is gauge-fixed: its derivative terms drop out
  auto dchi_ = [&](int I, int J) { return I >= 2 ? d(chi_index(n, I), K, J) : 0.0; };
  for (int I = 1; I <= n; ++I)
    for (int J = 1; J <= n; ++J) add(eta_index(n, I), rho_index(n, J), 0.5 * (dchi_(I, J) + dchi_(J, I)));
  for (int I = 2; I <= n; ++I)
    for (int J = 1; J <= n; ++J)
      add(chi_index(n, I), eta_index(n, J), 0.5 * (d(rho_index(n, I), K, J) + d(rho_index(n, J), K, I)));
  for (int I = 1; I <= n; ++I)
    for (int J = 2; J <= n; ++J)
      add(rho_index(n, I), chi_index(n, J), 0.5 * (d(eta_index(n, I), K, J) + d(eta_index(n, J), K, I)));
  for (int J = 1; J <= n; ++J) {
    double c = 0.0;
    for (int I = 2; I <= n; ++I)
      c += chart.chi[I] * d(rho_index(n, I), K, J) - chart.rho[I] * d(chi_index(n, I), K, J);
    c *= 0.5 / chart.rho[1];
    add(eta_index(n, 1), rho_index(n, J), c);
    add(eta_index(n, J), rho_index(n, 1), c);
  }
  return Fk;
}

namespace {

// C_K at a chart point from one fixed fiber point, flattened K-major
Eigen::VectorXd c_field(const FFunction& F, int n, std::span<const double> c) {
  BaseChart ch = BaseChart::from_coordinates(n, c);
  ReduceOptions o;
  o.q_samples = {default_fiber_points().front()};
  o.sigma_tol = 1e-4;
  ReducedData r = reduce(F, ch, o);
  const int m = 3 * n - 1;
  Eigen::VectorXd v(m * (n + 1));
  for (int K = 0; K <= n; ++K) v.segment(K * m, m) = r.C[K];
  return v;
}

Eigen::VectorXd u_field(const FFunction& F, int n, std::span<const double> c) {
  BaseChart ch = BaseChart::from_coordinates(n, c);
  Eigen::MatrixXd U = extract_U(F, ch, default_fiber_points().front());
  return Eigen::Map<Eigen::VectorXd>(U.data(), U.size());
}

}  // namespace

double bogomolnyi_residual(const FFunction& F, const BaseChart& chart, const StencilOptions& st) {
  const int n = chart.n, m = 3 * n - 1, n1 = n + 1;
  auto c = chart.coordinates();
  Eigen::MatrixXd dC = jacobian([&](std::span<const double> p) { return c_field(F, n, p); }, c, st);
  Eigen::MatrixXd dUflat = jacobian([&](std::span<const double> p) { return u_field(F, n, p); }, c, st);
  std::vector<Eigen::MatrixXd> dU;
  for (int a = 0; a < m; ++a) dU.push_back(Eigen::Map<Eigen::MatrixXd>(dUflat.col(a).data(), n1, n1));
  double r = 0.0;
  for (int K = 0; K <= n; ++K) {
    Eigen::MatrixXd curl(m, m);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) curl(a, b) = dC(K * m + b, a) - dC(K * m + a, b);
    r = std::max(r, max_abs(curl - bogomolnyi_F(chart, dU, K)));
  }
  return r;
}

double cone_reassembly_residual(const FFunction& F, const BaseChart& chart, const Quaternion& q) {
  const int n = chart.n, m = 3 * n - 1, n1 = n + 1, N = 3 * n1, D = 4 * n;
  ReducedData r = reduce(F, chart);
  QKConnection w = qk_connection(chart, r);
  Eigen::MatrixXd sg = qk_metric(chart, r, w);

  // source (chart, psi, q), target (y, psi)
  Pullback p = scaled_pullback(chart, q, r.V, r.dV);
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(N + n1, m + n1 + 4);
  J.topLeftCorner(N, m) = p.J.leftCols(m);
  J.topRightCorner(N, 4) = p.J.rightCols(4);
  J.block(N, m, n1, n1).setIdentity();
  Eigen::MatrixXd G = gh_metric(higgs_from_F(F, p.y), shifted_connection(F, p.y));
  Eigen::MatrixXd T = Eigen::MatrixXd::Identity(m + n1 + 4, m + n1 + 4);
  T.bottomRightCorner(4, 4) = left_invariant_matrix(q).inverse();
  Eigen::MatrixXd Gs = T.transpose() * J.transpose() * G * J * T;

  Eigen::MatrixXd cone = Eigen::MatrixXd::Zero(D + 4, D + 4);
  cone.topLeftCorner(D, D) = sg;
  cone(D, D) = 1.0;
  for (int i = 0; i < 3; ++i) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(D + 4);
    v.head(D) = w.omega[i];
    v[D + 1 + i] = 1.0;
    cone += v * v.transpose();
  }
  cone *= norm2(q);
  return max_abs(Gs - cone) / std::max(1.0, max_abs(Gs));
}

double toy_flat_residual(const Quaternion& q) {
  FFunction F = FFunction::toy_log();
  auto space = JetSpace::make(4, 1);
  Quat<Jet> qj(Jet::variable(space, 0, q.w), Jet::variable(space, 1, q.x), Jet::variable(space, 2, q.y),
               Jet::variable(space, 3, q.z));
  auto y = sandwich(qj, std::array<Jet, 3>{Jet(0.0), Jet(0.0), Jet(1.0)});
  // psi_0 is half the Euler angle psi
  Jet psiE = atan2(2.0 * (qj.x * qj.y - qj.w * qj.z), qj.w * qj.w + qj.x * qj.x - qj.y * qj.y - qj.z * qj.z);
  Jet psi0 = 0.5 * psiE;

  std::vector<double> y0{y[0].value(), y[1].value(), y[2].value()};
  Eigen::MatrixXd Phi = higgs_from_F(F, y0);
  ConnectionForm A = connection_from_F(F, y0);
  // toy-specific gauge: subtract d s, s = 1/2 arctan(r0 Re z0 / (x0 Im z0))
  auto yj = seed_jets(y0, 1);
  Jet r0 = sqrt(yj[0] * yj[0] + yj[1] * yj[1] + yj[2] * yj[2]);
  Jet s = 0.5 * atan2(r0 * (-0.5 * yj[1]), yj[2] * (0.5 * yj[0]));
  for (int a = 0; a < 3; ++a) A.a[0][a] -= s.d(a);
  Eigen::MatrixXd G = gh_metric(Phi, A);

  Eigen::Matrix4d J;
  for (int j = 0; j < 4; ++j) {
    for (int a = 0; a < 3; ++a) J(a, j) = y[a].d(j);
    J(3, j) = psi0.d(j);
  }
  Eigen::Matrix4d Sinv = left_invariant_matrix(q).inverse();
  Eigen::Matrix4d Gs = Sinv.transpose() * J.transpose() * G * J * Sinv;
  return max_abs(Gs - norm2(q) * Eigen::Matrix4d::Identity());
}

AlmostComplexResult almost_complex_check(const FFunction& F, const BaseChart& chart) {
  const int n = chart.n, m = 3 * n - 1, D = 4 * n;
  auto omega_at = [&](std::span<const double> c) {
    BaseChart ch = BaseChart::from_coordinates(n, c);
    ReduceOptions o;
    o.q_samples = {default_fiber_points().front()};
    QKConnection w = qk_connection(ch, reduce(F, ch, o));
    Eigen::VectorXd v(3 * D);
    for (int i = 0; i < 3; ++i) v.segment(i * D, D) = w.omega[i];
    return v;
  };
  auto c = chart.coordinates();
  Eigen::MatrixXd dw = jacobian(omega_at, c, StencilOptions{true});
  ReduceOptions o;
  o.q_samples = {default_fiber_points().front()};
  ReducedData r = reduce(F, chart, o);
  QKConnection w = qk_connection(chart, r);
  Eigen::MatrixXd sginv = guarded_inverse(qk_metric(chart, r, w));
  std::array<Eigen::MatrixXd, 3> Jm;
  for (int i = 0; i < 3; ++i) {
    Eigen::MatrixXd Th = Eigen::MatrixXd::Zero(D, D);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < D; ++b) {
        Th(a, b) += dw(i * D + b, a);
        Th(b, a) -= dw(i * D + b, a);
      }
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) {
        int e = eps3(i, j, k);
        if (e != 0) Th += e * wedge(w.omega[j], w.omega[k]);
      }
    Jm[i] = 0.5 * sginv * Th;
  }
  AlmostComplexResult res;
  Eigen::MatrixXd Id = Eigen::MatrixXd::Identity(D, D);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      Eigen::MatrixXd M = Jm[i] * Jm[j];
      if (i == j) M += Id;
      for (int k = 0; k < 3; ++k) M -= eps3(i, j, k) * Jm[k];
      res.algebra = std::max(res.algebra, max_abs(M));
    }
  res.j1_square = max_abs(Jm[0] * Jm[0] + Id);
  return res;
}

}  // namespace qkforge
