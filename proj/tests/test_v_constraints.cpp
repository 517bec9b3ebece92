#include <gtest/gtest.h>

#include <cmath>

#include "qkforge/model_zoo.hpp"
#include "qkforge/v_constraints.hpp"

using namespace qkforge;

TEST(BFromV, PaperValues) {
  auto V1 = VFunction::from_expression("2*rho1^2", 1);
  std::vector<double> a{1, 0};
  auto B = B_from_V(V1, a);
  EXPECT_LT((B[0] - ImVector(0, 0, -2)).norm(), 1e-12);
  EXPECT_LT((B[1] - ImVector(0, 4, 0)).norm(), 1e-12);

  auto V2 = VFunction::from_expression("2*rho1*rho2", 2);
  std::vector<double> b{0, 1, 1, 0, 0};
  auto C = B_from_V(V2, b);
  EXPECT_NEAR(C[0][2], -2.0, 1e-12);
  EXPECT_NEAR(C[1][1], 2.0, 1e-12);
  EXPECT_NEAR(C[2][1], 2.0, 1e-12);

  auto K = VFunction::from_expression("3.5", 2);
  std::vector<double> c{0.3, 1.2, 0.8, -0.4, 0.5};
  auto D = B_from_V(K, c);
  EXPECT_LT((D[0] - ImVector(0, 0, 3.5)).norm(), 1e-12);
  EXPECT_LT(D[1].norm() + D[2].norm(), 1e-12);
}

TEST(UFromV, PaperValues) {
  auto V1 = VFunction::from_expression("2*rho1^2", 1);
  for (auto [rho, eta] : {std::pair{1.0, 0.0}, {1.7, -0.6}}) {
    std::vector<double> c{rho, eta};
    Eigen::MatrixXd U = U_from_V(V1, c);
    EXPECT_NEAR(U(1, 1), 2.0, 1e-12);
    EXPECT_NEAR(U(0, 1), -2 * eta, 1e-12);
    EXPECT_NEAR(U(0, 0), 2 * eta * eta - rho * rho, 1e-12);
    EXPECT_EQ(U(0, 1), U(1, 0));
  }
  auto V2 = VFunction::from_expression("2*rho1*rho2", 2);
  std::vector<double> b{0, 1, 1, 0, 0};
  Eigen::MatrixXd U = U_from_V(V2, b);
  EXPECT_NEAR(U(1, 2), 1.0, 1e-12);
  EXPECT_NEAR(U(0, 0), -1.0, 1e-12);
  std::vector<double> z{0, 0, 1, 0, 0};
  EXPECT_THROW(U_from_V(V2, z), std::exception);
}

TEST(UFromV, DefiningIdentityAndRoutes) {
  for (const auto& id : {"x1sq", "x1x2", "x2cubed-over-x1"}) {
    const auto& fx = fixture(id);
    VFunction V = fx.V();
    for (const auto& p : sample_points(fx.n, 10, 21)) {
      BaseChart ch = BaseChart::from_coordinates(fx.n, p.chart);
      Eigen::MatrixXd U = U_from_V(V, p.chart);
      double s = 0.0;
      for (int J = 0; J <= fx.n; ++J)
        for (int K = 0; K <= fx.n; ++K) s += 2 * U(J, K) * ch.chi_vec(J).dot(ch.chi_vec(K));
      EXPECT_NEAR(s, V(p.chart), 1e-8 * std::max(1.0, std::abs(s))) << id;
      auto B1 = B_from_V(V, p.chart);
      auto B2 = compute_B(U, ch);
      for (int I = 0; I <= fx.n; ++I) EXPECT_LT((B1[I] - B2[I]).norm(), 1e-8 * std::max(1.0, B1[I].norm())) << id;
    }
  }
}

TEST(UFromV, MatchesExtraction) {
  for (const auto& id : {"x1sq", "x1x2", "x2cubed-over-x1"}) {
    const auto& fx = fixture(id);
    VFunction V = VFunction::from_model(fx.F());
    for (const auto& p : sample_points(fx.n, 3, 22)) {
      BaseChart ch = BaseChart::from_coordinates(fx.n, p.chart);
      Eigen::MatrixXd a = U_from_V(V, p.chart);
      Eigen::MatrixXd b = extract_U(fx.F(), ch, p.q);
      EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-6 * std::max(1.0, b.cwiseAbs().maxCoeff())) << id;
    }
  }
}

TEST(WMatrix, Symmetric) {
  auto V = fixture("x2cubed-over-x1").V();
  std::vector<double> c{0.4, 1.1, 0.9, 0.3, -0.5};
  VDerivatives d(V, c);
  Eigen::Matrix3d W = W_matrix(BaseChart::from_coordinates(2, c), d);
  EXPECT_EQ(W(0, 1), W(1, 0));
  EXPECT_EQ(W(0, 2), W(2, 0));
  EXPECT_EQ(W(1, 2), W(2, 1));
  // W = 2 U_IJ chi_i chi_j + delta V
  BaseChart ch = BaseChart::from_coordinates(2, c);
  Eigen::MatrixXd U = U_from_V(V, c);
  Eigen::Matrix3d want = V(c) * Eigen::Matrix3d::Identity();
  for (int I = 0; I <= 2; ++I)
    for (int J = 0; J <= 2; ++J) want += 2 * U(I, J) * ch.chi_vec(I) * ch.chi_vec(J).transpose();
  EXPECT_LT((W - want).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Constraints, ModelsPass) {
  for (const auto& id : {"x1sq", "x1x2", "x2cubed-over-x1"}) {
    const auto& fx = fixture(id);
    VFunction V = fx.V();
    for (const auto& p : sample_points(fx.n, 50, 23)) {
      EXPECT_LT(constraint_residuals(V, p.chart).max(), 1e-6) << id;
      EXPECT_LT(constraint_residuals(V, p.chart, true).max(), 1e-6) << id;
    }
  }
}

TEST(Constraints, NegativeControl) {
  auto V = VFunction::from_expression("rho1^2*rho2", 2);
  std::vector<double> c{0.4, 1.1, 0.9, 0.3, -0.5};
  EXPECT_GT(constraint_residuals(V, c).max(), 1e-2);
}

TEST(CalderbankPedersen, Residual) {
  auto V = VFunction::from_expression("2*rho1^2", 1);
  for (const auto& p : sample_points(1, 50, 24)) EXPECT_LT(cp_residual(V, p.chart), 1e-8);
  auto bad = VFunction::from_expression("rho1*eta1", 1);
  std::vector<double> c{1.2, 0.7};
  EXPECT_NEAR(cp_residual(bad, c), 0.7, 1e-8);
  std::vector<double> z{-1.0, 0.0};
  EXPECT_THROW(cp_residual(V, z), std::exception);
}

TEST(CalderbankPedersen, ClosedFormEntries) {
  auto V = VFunction::from_expression("2*rho1^2", 1);
  std::vector<double> c{1, 0};
  CPOutput o = cp_assemble(V, c);
  EXPECT_NEAR(o.metric(0, 0), -0.5, 1e-10);
  EXPECT_NEAR(o.metric(1, 1), -0.5, 1e-10);
  EXPECT_NEAR(o.omega0[0], 1.0, 1e-10);
  for (auto [rho, eta] : {std::pair{0.7, 1.3}, {2.0, -0.4}}) {
    std::vector<double> p{rho, eta};
    EXPECT_NEAR(cp_assemble(V, p).metric(0, 1), 0.0, 1e-12);
  }
}

TEST(CalderbankPedersen, AgreesWithGeneralFormulas) {
  FFunction F = fixture("x1sq").F();
  auto V = fixture("x1sq").V();
  for (const auto& p : sample_points(1, 20, 25)) {
    BaseChart ch = BaseChart::from_coordinates(1, p.chart);
    ReducedData r = reduce(F, ch);
    QKConnection w = qk_connection(ch, r);
    CPOutput o = cp_assemble(V, p.chart);
    EXPECT_LT((o.metric - qk_metric(ch, r, w)).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT((o.omega0 - w.omega0).cwiseAbs().maxCoeff(), 1e-8);
    for (int i = 0; i < 3; ++i) EXPECT_LT((o.omega[i] - w.omega[i]).cwiseAbs().maxCoeff(), 1e-8);
  }
}
