#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qkforge/gibbons_hawking.hpp"

using namespace qkforge;

namespace {

FFunction model(const char* p) { return FFunction::cmap(Prepotential::from_expression(p)); }

std::vector<double> random_point(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> x(3 * (n + 1));
  for (auto& v : x) v = u(rng);
  x[0] += x[0] > 0 ? 0.4 : -0.4;
  return x;
}

}  // namespace

TEST(Higgs, PaperValues) {
  std::vector<double> t{1, 0, 0};
  EXPECT_NEAR(higgs_from_F(FFunction::toy_log(), t)(0, 0), 0.5, 1e-12);

  std::vector<double> a{0, 0, 1, 0, 1, 0};
  Eigen::MatrixXd P = higgs_from_F(model("X1^2"), a);
  EXPECT_NEAR(P(0, 0), -1.0, 1e-8);
  EXPECT_NEAR(P(0, 1), 0.0, 1e-8);
  EXPECT_NEAR(P(1, 1), 2.0, 1e-8);

  std::vector<double> b{0, 0, 1, 0, 1, 0, 0, 1, 0};
  Eigen::MatrixXd Q = higgs_from_F(model("X1*X2"), b);
  EXPECT_NEAR(Q(1, 2), 1.0, 1e-8);
  EXPECT_NEAR(Q(1, 1), 0.0, 1e-8);
  EXPECT_NEAR(Q(2, 2), 0.0, 1e-8);
}

// closed forms for the quadratic prepotential at generic positions
TEST(Higgs, QuadraticClosedForm) {
  std::mt19937_64 rng(31);
  for (int k = 0; k < 10; ++k) {
    auto x = random_point(rng, 1);
    ImVector r0(x[0], x[1], x[2]), r1(x[3], x[4], x[5]);
    double n0 = r0.norm(), d = r0.dot(r1);
    Eigen::MatrixXd P = higgs_from_F(model("X1^2"), x);
    EXPECT_NEAR(P(0, 0), (3 * d * d - n0 * n0 * r1.squaredNorm()) / std::pow(n0, 5), 1e-9);
    EXPECT_NEAR(P(0, 1), -2 * d / std::pow(n0, 3), 1e-9);
    EXPECT_NEAR(P(1, 1), 2 / n0, 1e-9);
  }
}

TEST(Connection, ToyClosedForm) {
  // z0 = (1+i)/2, x0 = 1
  std::vector<double> x{1, -1, 1};
  ConnectionForm A = connection_from_F(FFunction::toy_log(), x);
  double r = std::sqrt(3.0), rho2 = 2.0, c = -x[2] / (2 * r);
  Eigen::Vector3d want(c * -x[1] / rho2, c * x[0] / rho2, 0.0);
  EXPECT_LT((A.a[0] - want).cwiseAbs().maxCoeff(), 1e-7);

  std::vector<double> y{0.3, 0.8, 0.0};
  EXPECT_LT(connection_from_F(FFunction::toy_log(), y).a[0].cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Connection, NoVerticalComponent) {
  std::mt19937_64 rng(32);
  auto x = random_point(rng, 2);
  ConnectionForm A = connection_from_F(model("X2^3/X1"), x);
  for (const auto& a : A.a)
    for (int J = 0; J < 3; ++J) EXPECT_EQ(a[3 * J + 2], 0.0);
}

TEST(Connection, ShiftIsExact) {
  std::mt19937_64 rng(33);
  for (const char* p : {"X1^2", "X1*X2", "X2^3/X1"}) {
    FFunction F = model(p);
    auto x = random_point(rng, F.n());
    Eigen::VectorXd grad = gradient(
        ScalarField{F.dim(), [&](std::span<const double> y) { return shift_potential(F, y)[1]; }, {}}, x, {true});
    ConnectionForm A = connection_from_F(F, x), S = shifted_connection(F, x);
    EXPECT_LT((A.a[1] - S.a[1] - grad).cwiseAbs().maxCoeff(), 1e-6) << p;
    auto diff = [&](std::span<const double> y) {
      return Eigen::VectorXd(connection_from_F(F, y).a[0] - shifted_connection(F, y).a[0]);
    };
    Eigen::MatrixXd J = jacobian(diff, x, {true});
    EXPECT_LT((J - J.transpose()).cwiseAbs().maxCoeff(), 1e-4) << p;
  }
}

TEST(Star, BasisAndOracle) {
  StarOperator op{0, 1, 1};
  Eigen::VectorXd e = Eigen::VectorXd::Zero(6);
  e[5] = 1.0;  // dx_3^1
  Eigen::MatrixXd M = star_apply(op, e);
  EXPECT_NEAR(M(0, 4), 0.5, 1e-15);
  EXPECT_NEAR(M(1, 3), -0.5, 1e-15);
  EXPECT_NEAR(M.cwiseAbs().sum(), 2.0, 1e-15);
  EXPECT_EQ(star_apply(op, Eigen::VectorXd::Zero(6)).cwiseAbs().maxCoeff(), 0.0);

  // star_0 dPhi_00 for the toy model against eps contraction
  std::vector<double> x{0.4, -0.7, 0.25};
  Eigen::Vector3d r(x[0], x[1], x[2]);
  Eigen::Vector3d v = -r / (2 * std::pow(r.norm(), 3));
  Eigen::MatrixXd S = star_apply({0, 0, kLegendreOrientation}, v);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double want = 0.0;
      for (int k = 0; k < 3; ++k) {
        int eps = (i - j) * (j - k) * (k - i) / 2;
        want += kLegendreOrientation * eps * v[k];
      }
      EXPECT_NEAR(S(i, j), want, 1e-10);
    }
}

TEST(Monopole, BuiltInModels) {
  std::mt19937_64 rng(34);
  for (const char* p : {"X1^2", "X1*X2", "X2^3/X1"}) {
    FFunction F = model(p);
    for (int k = 0; k < 20; ++k) {
      auto x = random_point(rng, F.n());
      EXPECT_LT(monopole_residual(F, x).relative(), 1e-4) << p;
      auto t = monopole_residual(F, x, {Backend::Taylor});
      EXPECT_LT(std::max(t.first, t.second), 1e-8 * std::max(1.0, t.scale)) << p;
    }
  }
  for (int k = 0; k < 20; ++k) EXPECT_LT(monopole_residual(FFunction::toy_log(), random_point(rng, 0)).relative(), 1e-4);
}

TEST(Monopole, NegativeControl) {
  FFunction F = FFunction::custom(1, "x0^2 x1", [](auto x) { return x[2] * x[2] * x[5]; });
  std::vector<double> x{0.3, 0.4, 0.7, -0.2, 0.5, 0.9};
  EXPECT_GT(monopole_residual(F, x).first, 1e-2);
}

TEST(Legendre, PaperValues) {
  std::vector<double> a{0, 0, 1, 0, 1, 0};
  EXPECT_NEAR(legendre_transform(model("X1^2"), a).K, 2.0, 1e-8);
  std::vector<double> b{0, 0, 1, 0, 1, 0, 0, 1, 0};
  EXPECT_NEAR(legendre_transform(model("X1*X2"), b).K, 2.0, 1e-8);
  std::vector<double> t{0.6, -0.8, 0.0};
  EXPECT_NEAR(legendre_transform(FFunction::toy_log(), t).K, 1.0, 1e-12);
  EXPECT_NEAR(FFunction::toy_log()(t), 1.0, 1e-12);
}

TEST(Legendre, QuadraticClosedForm) {
  std::mt19937_64 rng(35);
  for (int k = 0; k < 10; ++k) {
    auto x = random_point(rng, 1);
    ImVector r0(x[0], x[1], x[2]), r1(x[3], x[4], x[5]);
    EXPECT_NEAR(legendre_transform(model("X1^2"), x).K, 2 * r0.cross(r1).squaredNorm() / std::pow(r0.norm(), 3), 1e-9);
  }
}

TEST(Assemble, FiberBlockAndMomentMaps) {
  std::mt19937_64 rng(36);
  FFunction F = model("X1*X2");
  auto x = random_point(rng, 2);
  std::vector<double> psi{0.1, 0.2, 0.3};
  HyperkahlerData d = hk_assemble(F, x, psi);
  Eigen::MatrixXd Pinv = higgs_from_F(F, x).inverse();
  const int N = 9;
  EXPECT_LT((d.G.bottomRightCorner(3, 3) - 0.5 * Pinv).cwiseAbs().maxCoeff(), 1e-10);
  for (int k = 0; k < 3; ++k)
    for (int I = 0; I < 3; ++I)
      for (int a = 0; a < N + 3; ++a) {
        double want = a == 3 * I + k ? -1.0 : 0.0;
        EXPECT_NEAR(d.Omega[k](N + I, a), want, 1e-10) << k << " " << I << " " << a;
      }
}

TEST(Assemble, Closure) {
  std::mt19937_64 rng(37);
  FFunction F = model("X1*X2");
  for (int k = 0; k < 50; ++k) EXPECT_LT(closure_residual(F, random_point(rng, 2)), 1e-4);
}

TEST(Assemble, DegenerateHiggs) {
  EXPECT_THROW(guarded_inverse(Eigen::Matrix2d::Zero()), DegeneratePointError);
  Eigen::Matrix2d M;
  M << 2, 1, 1, 3;
  EXPECT_LT((guarded_inverse(M) * M - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff(), 1e-14);
}
