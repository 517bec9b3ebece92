#include "qkforge/gibbons_hawking.hpp"

#include <algorithm>
#include <cmath>

namespace qkforge {

namespace {

constexpr int eps3(int i, int j, int k) {
  return (i - j) * (j - k) * (k - i) / 2;
}

int X3(int I) { return 3 * I + 2; }

// The root formula degenerates on the axis z^0 = 0 although Phi and K extend
// smoothly there and are rotation invariant; evaluate them in a turned frame.
bool near_axis(const FFunction& F, std::span<const double> x) {
  if (F.kind() == FFunction::Kind::Custom) return false;
  double r0 = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
  return std::hypot(x[0], x[1]) < 2e-3 * r0;
}

const Quaternion kAxisTurn{std::cos(M_PI / 4), std::sin(M_PI / 4), 0.0, 0.0};

}  // namespace

FDerivatives::FDerivatives(const FFunction& F, std::span<const double> x, const EvalOptions& opt, int max_order)
    : F_(F), x_(x.begin(), x.end()), opt_(opt), order_(max_order) {
  if (static_cast<int>(x.size()) != F.dim()) throw std::invalid_argument("FDerivatives: dimension mismatch");
  if (F.singular(x)) throw SingularPointError("singular point of F", x_);
  if (opt.backend == Backend::Taylor) {
    jet_ = F.jet(x, max_order);
    value_ = jet_->value();
    for (double c : jet_->coefficients())
      if (!std::isfinite(c)) throw SingularPointError("non-finite Taylor coefficient", x_);
  } else {
    value_ = F.field()(x);
  }
}

double FDerivatives::stencil(std::vector<int> idx) const {
  std::sort(idx.begin(), idx.end());
  auto it = cache_.find(idx);
  if (it != cache_.end()) return it->second;
  double v = partial(F_.field(), DerivativeRequest{x_, idx, std::nullopt}, opt_.stencil);
  cache_.emplace(idx, v);
  return v;
}

double FDerivatives::d(int a) const { return jet_ ? jet_->d(a) : stencil({a}); }
double FDerivatives::d(int a, int b) const { return jet_ ? jet_->d(a, b) : stencil({a, b}); }
double FDerivatives::d(int a, int b, int c) const { return jet_ ? jet_->d(a, b, c) : stencil({a, b, c}); }

namespace {

Eigen::MatrixXd phi_of(const FDerivatives& D, int n) {
  Eigen::MatrixXd P(n + 1, n + 1);
  for (int I = 0; I <= n; ++I)
    for (int J = I; J <= n; ++J) P(I, J) = P(J, I) = -0.5 * D.d(X3(I), X3(J));
  return P;
}

// A_K = 1/2 sum_J (F_{3K,2J} dx_1^J - F_{3K,1J} dx_2^J); also its derivative
// along coordinate c when c >= 0
ConnectionForm connection_of(const FDerivatives& D, int n, int c = -1) {
  ConnectionForm A;
  for (int K = 0; K <= n; ++K) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(3 * (n + 1));
    for (int J = 0; J <= n; ++J) {
      if (c < 0) {
        a[3 * J] = 0.5 * D.d(X3(K), 3 * J + 1);
        a[3 * J + 1] = -0.5 * D.d(X3(K), 3 * J);
      } else {
        a[3 * J] = 0.5 * D.d(X3(K), 3 * J + 1, c);
        a[3 * J + 1] = -0.5 * D.d(X3(K), 3 * J, c);
      }
    }
    A.a.push_back(a);
  }
  return A;
}

// d(psi'_K) as a covector
Eigen::VectorXd shift_gradient(const FDerivatives& D, int n, int K) {
  const auto x = D.point();
  double cK = K == 0 ? 0.5 : 1.0;
  Eigen::VectorXd g(3 * (n + 1));
  for (int a = 0; a < 3 * (n + 1); ++a) {
    double v = x[1] * D.d(0, X3(K), a) - x[0] * D.d(1, X3(K), a);
    if (a == 1) v += D.d(0, X3(K));
    if (a == 0) v -= D.d(1, X3(K));
    g[a] = 0.5 * cK * v;
  }
  return g;
}

}  // namespace

Eigen::MatrixXd higgs_from_F(const FFunction& F, std::span<const double> x, const EvalOptions& opt) {
  if (near_axis(F, x)) {
    auto y = rotate_coordinates(x, kAxisTurn);
    return higgs_from_F(F, y, opt);
  }
  FDerivatives D(F, x, opt, 2);
  return phi_of(D, F.n());
}

ConnectionForm connection_from_F(const FFunction& F, std::span<const double> x, const EvalOptions& opt) {
  FDerivatives D(F, x, opt, 2);
  return connection_of(D, F.n());
}

ConnectionForm shifted_connection(const FFunction& F, std::span<const double> x, const EvalOptions& opt) {
  FDerivatives D(F, x, opt, 3);
  ConnectionForm A = connection_of(D, F.n());
  for (int K = 0; K <= F.n(); ++K) A.a[K] -= shift_gradient(D, F.n(), K);
  return A;
}

Eigen::VectorXd shift_potential(const FFunction& F, std::span<const double> x, const EvalOptions& opt) {
  FDerivatives D(F, x, opt, 2);
  Eigen::VectorXd p(F.n() + 1);
  for (int K = 0; K <= F.n(); ++K)
    p[K] = (K == 0 ? 0.5 : 1.0) * 0.5 * (x[1] * D.d(0, X3(K)) - x[0] * D.d(1, X3(K)));
  return p;
}

Eigen::VectorXd to_moduli_basis(const Eigen::VectorXd& a) {
  // x_1 = 2 Im z, x_2 = -2 Re z
  Eigen::VectorXd b(a.size());
  for (Eigen::Index J = 0; 3 * J < a.size(); ++J) {
    b[3 * J] = -2.0 * a[3 * J + 1];
    b[3 * J + 1] = 2.0 * a[3 * J];
    b[3 * J + 2] = a[3 * J + 2];
  }
  return b;
}

Eigen::MatrixXd wedge(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a * b.transpose() - b * a.transpose();
}

Eigen::MatrixXd star_apply(const StarOperator& op, const Eigen::VectorXd& covector) {
  const int N = 3 * (op.n + 1);
  if (covector.size() != N) throw std::invalid_argument("star_apply: covector dimension");
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(N, N);
  for (int J = 0; J <= op.n; ++J)
    for (int k = 0; k < 3; ++k) {
      double c = covector[3 * J + k];
      if (c == 0.0) continue;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          int e = eps3(i, j, k);
          if (e == 0) continue;
          // (dr^I ^ dr^J)_k = 1/2 eps_kij dx_i^I ^ dx_j^J, and eps_kij = eps_ijk
          double w = 0.5 * op.orientation * e * c;
          M(3 * op.I + i, 3 * J + j) += w;
          M(3 * J + j, 3 * op.I + i) -= w;
        }
    }
  return M;
}

MonopoleResidual monopole_residual(const FFunction& F, std::span<const double> x, const EvalOptions& opt) {
  const int n = F.n(), N = 3 * (n + 1);
  FDerivatives D(F, x, opt, 3);
  // dPhi_KI[c] and dA_K[c][b]
  std::vector<ConnectionForm> dA;
  for (int c = 0; c < N; ++c) dA.push_back(connection_of(D, n, c));
  auto dphi = [&](int K, int I) {
    Eigen::VectorXd g(N);
    for (int c = 0; c < N; ++c) g[c] = -0.5 * D.d(X3(K), X3(I), c);
    return g;
  };
  MonopoleResidual r;
  for (int K = 0; K <= n; ++K) {
    Eigen::MatrixXd curl(N, N);
    for (int a = 0; a < N; ++a)
      for (int b = 0; b < N; ++b) curl(a, b) = dA[a].a[K][b] - dA[b].a[K][a];
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(N, N);
    for (int I = 0; I <= n; ++I) rhs += star_apply({I, n, kLegendreOrientation}, dphi(K, I));
    r.first = std::max(r.first, (curl - rhs).cwiseAbs().maxCoeff());
    r.scale = std::max({r.scale, curl.cwiseAbs().maxCoeff(), rhs.cwiseAbs().maxCoeff()});
    for (int I = 0; I <= n; ++I)
      for (int J = 0; J <= n; ++J) {
        Eigen::VectorXd a = dphi(K, J), b = dphi(K, I);
        r.scale = std::max(r.scale, a.cwiseAbs().maxCoeff());
        for (int i = 0; i < 3; ++i) r.second = std::max(r.second, std::abs(a[3 * I + i] - b[3 * J + i]));
      }
  }
  return r;
}

LegendreResult legendre_transform(const FFunction& F, std::span<const double> x, const EvalOptions& opt) {
  if (near_axis(F, x)) {
    auto y = rotate_coordinates(x, kAxisTurn);
    return legendre_transform(F, y, opt);
  }
  FDerivatives D(F, x, opt, 1);
  LegendreResult out;
  out.uplusubar.resize(F.n() + 1);
  out.K = D.value();
  for (int I = 0; I <= F.n(); ++I) {
    out.uplusubar[I] = D.d(X3(I));
    out.K -= x[X3(I)] * out.uplusubar[I];
  }
  return out;
}

Eigen::MatrixXd guarded_inverse(const Eigen::MatrixXd& M, double max_condition) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || !(s[s.size() - 1] > 0.0) || s[0] / s[s.size() - 1] > max_condition)
    throw DegeneratePointError("matrix inversion: condition number above guard");
  return M.partialPivLu().inverse();
}

Eigen::MatrixXd gh_metric(const Eigen::MatrixXd& Phi, const ConnectionForm& A) {
  const int n1 = static_cast<int>(Phi.rows()), N = 3 * n1;
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(N + n1, N + n1);
  for (int I = 0; I < n1; ++I)
    for (int J = 0; J < n1; ++J)
      for (int i = 0; i < 3; ++i) G(3 * I + i, 3 * J + i) += 0.5 * Phi(I, J);
  Eigen::MatrixXd Pinv = guarded_inverse(Phi);
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n1, N + n1);
  for (int I = 0; I < n1; ++I) {
    D.row(I).head(N) = A.a[I].transpose();
    D(I, N + I) = 1.0;
  }
  G += 0.5 * D.transpose() * Pinv * D;
  return 0.5 * (G + G.transpose());
}

std::array<Eigen::MatrixXd, 3> gh_two_forms(const Eigen::MatrixXd& Phi, const ConnectionForm& A) {
  const int n1 = static_cast<int>(Phi.rows()), N = 3 * n1;
  std::array<Eigen::MatrixXd, 3> Om;
  for (int k = 0; k < 3; ++k) {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(N + n1, N + n1);
    for (int I = 0; I < n1; ++I) {
      Eigen::VectorXd t = Eigen::VectorXd::Zero(N + n1);
      for (int J = 0; J < n1; ++J) t[3 * J + k] = Phi(I, J);
      // Phi_IJ (dr^I ^ dr^J)_k = 1/2 star_I applied to Phi_IJ dx_k^J
      Eigen::MatrixXd s = star_apply({I, n1 - 1, kLegendreOrientation}, t.head(N));
      M.topLeftCorner(N, N) += s;
      Eigen::VectorXd th = Eigen::VectorXd::Zero(N + n1);
      th.head(N) = A.a[I];
      th[N + I] = 1.0;
      Eigen::VectorXd dx = Eigen::VectorXd::Zero(N + n1);
      dx[3 * I + k] = 1.0;
      M -= wedge(th, dx);
    }
    Om[k] = M;
  }
  return Om;
}

HyperkahlerData hk_assemble(const FFunction& F, std::span<const double> x, std::span<const double> psi,
                            const EvalOptions& opt, bool shifted) {
  if (static_cast<int>(psi.size()) != F.n() + 1) throw std::invalid_argument("hk_assemble: psi dimension");
  // psi enters only through dpsi
  Eigen::MatrixXd Phi = higgs_from_F(F, x, opt);
  ConnectionForm A = shifted ? shifted_connection(F, x, opt) : connection_from_F(F, x, opt);
  HyperkahlerData h{gh_metric(Phi, A), gh_two_forms(Phi, A)};
  // moment maps: i_{d/dpsi_I} Omega_k = -dx_k^I
  const int N = F.dim();
  for (int k = 0; k < 3; ++k)
    for (int I = 0; I <= F.n(); ++I)
      for (int b = 0; b < N + F.n() + 1; ++b) {
        double expect = (b == 3 * I + k) ? -1.0 : 0.0;
        if (h.Omega[k](N + I, b) != expect) throw std::logic_error("hk_assemble: moment map identity violated");
      }
  return h;
}

double closure_residual(const FFunction& F, std::span<const double> x, const EvalOptions& opt) {
  const int n = F.n(), N = 3 * (n + 1);
  FDerivatives D(F, x, opt, 3);
  // Omega is linear in (Phi, A); its derivative along c uses (d_c Phi, d_c A)
  std::vector<std::array<Eigen::MatrixXd, 3>> dOm;
  for (int c = 0; c < N; ++c) {
    Eigen::MatrixXd dP(n + 1, n + 1);
    for (int I = 0; I <= n; ++I)
      for (int J = 0; J <= n; ++J) dP(I, J) = -0.5 * D.d(X3(I), X3(J), c);
    ConnectionForm dA = connection_of(D, n, c);
    auto forms = gh_two_forms(dP, dA);
    // strip the constant dpsi ^ dx part, which gh_two_forms always adds
    for (int k = 0; k < 3; ++k) {
      for (int I = 0; I <= n; ++I) {
        forms[k](N + I, 3 * I + k) += 1.0;
        forms[k](3 * I + k, N + I) -= 1.0;
      }
    }
    dOm.push_back(forms);
  }
  double r = 0.0;
  for (int k = 0; k < 3; ++k)
    for (int a = 0; a < N; ++a)
      for (int b = a + 1; b < N; ++b)
        for (int c = b + 1; c < N; ++c) {
          double v = dOm[a][k](b, c) + dOm[b][k](c, a) + dOm[c][k](a, b);
          r = std::max(r, std::abs(v));
        }
  return r;
}

}  // namespace qkforge
