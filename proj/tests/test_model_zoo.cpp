#include <gtest/gtest.h>

#include "qkforge/model_zoo.hpp"

using namespace qkforge;

TEST(Fixtures, Ids) {
  EXPECT_EQ(fixture_ids().size(), 4u);
  EXPECT_THROW(fixture("x1cubed"), UnknownModelError);
  EXPECT_TRUE(fixture("toy-log").is_toy());
  EXPECT_EQ(fixture("x2cubed-over-x1").n, 2);
}

TEST(Fixtures, ClosedForms) {
  std::vector<double> a{2, 0};
  EXPECT_NEAR(fixture("x1sq").V_at(a), 8.0, 1e-14);
  std::vector<double> b{1, 1, 1, 0, 0};  // chi2, rho1, rho2, eta1, eta2
  EXPECT_NEAR(fixture("x2cubed-over-x1").V_at(b), 8.0, 1e-14);
  auto C = fixture("x1x2").C_at(b);
  EXPECT_NEAR(C[0][chi_index(2, 2)], -0.5, 1e-14);
  EXPECT_NEAR(C[0][rho_index(2, 1)], 0.5, 1e-14);
  EXPECT_NEAR(C[0][rho_index(2, 2)], 0.0, 1e-14);
}

TEST(Fixtures, BFromTablesMatchesU) {
  for (const auto& id : {"x1sq", "x1x2", "x2cubed-over-x1"}) {
    const auto& fx = fixture(id);
    for (const auto& p : sample_points(fx.n, 10, 51)) {
      auto B = fx.B_at(p.chart);
      auto W = compute_B(fx.U_at(p.chart), BaseChart::from_coordinates(fx.n, p.chart));
      for (int I = 0; I <= fx.n; ++I) EXPECT_LT((B[I] - W[I]).norm(), 1e-10 * std::max(1.0, B[I].norm())) << id;
    }
  }
}

TEST(Sampler, DeterministicAndInBox) {
  auto a = sample_points(2, 20, 99), b = sample_points(2, 20, 99);
  for (size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].chart, b[i].chart);
    EXPECT_EQ(to_vec(a[i].q), to_vec(b[i].q));
    double qn = std::sqrt(norm2(a[i].q));
    EXPECT_GE(qn, 0.5);
    EXPECT_LE(qn, 2.0);
    for (int I = 1; I <= 2; ++I) {
      double rho = a[i].chart[rho_index(2, I)];
      EXPECT_GE(rho, 0.2);
      EXPECT_LE(rho, 3.0);
    }
  }
  EXPECT_NE(sample_points(2, 1, 1)[0].chart, sample_points(2, 1, 2)[0].chart);
}

TEST(Sweep, Quadratic) {
  SweepReport r = regression_sweep("x1sq", 100, 7);
  EXPECT_TRUE(r.pass());
  for (const auto& c : r.comparisons) EXPECT_TRUE(c.pass()) << c.name << " " << c.max_error;
}

TEST(Sweep, Toy) { EXPECT_TRUE(regression_sweep("toy-log", 100, 7).pass()); }

TEST(Sweep, G2) {
  SweepReport r = regression_sweep("x2cubed-over-x1", 50, 7);
  EXPECT_TRUE(r.pass());
  for (const auto& c : r.comparisons) EXPECT_TRUE(c.pass()) << c.name << " " << c.max_error;
}

TEST(Sweep, Threads) {
  EXPECT_GE(sweep_threads(), 1);
  auto v = parallel_map<int>(100, [](int i) { return i * i; });
  EXPECT_EQ(v[37], 37 * 37);
  EXPECT_THROW(parallel_map<int>(10, [](int i) -> int { if (i == 3) throw std::runtime_error("x"); return i; }),
               std::runtime_error);
}
