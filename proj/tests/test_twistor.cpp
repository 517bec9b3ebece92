#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "qkforge/twistor.hpp"

using namespace qkforge;
using cd = std::complex<double>;

namespace {

std::vector<double> random_point(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> x(3 * (n + 1));
  for (auto& v : x) v = u(rng);
  // keep x0 small against r0 so both roots sit near the unit circle
  x[0] += x[0] > 0 ? 0.5 : -0.5;
  x[2] *= 0.3;
  return x;
}

cd eta(std::span<const double> x, int I, cd zeta) {
  O2Section s = section_from_position({x[3 * I], x[3 * I + 1], x[3 * I + 2]});
  return section_eval(s, zeta);
}

// (1/2 pi i) contour integral of f over the circle |zeta - c| = rad, trapezoid rule
template <class Fn>
cd circle_integral(Fn f, cd c, double rad, int nodes = 4096) {
  cd sum = 0.0;
  for (int k = 0; k < nodes; ++k) {
    cd w = std::polar(rad, 2.0 * std::numbers::pi * k / nodes);
    sum += f(c + w) * w;
  }
  return sum / double(nodes);
}

}  // namespace

TEST(Section, Values) {
  EXPECT_EQ(section_eval({0.0, 5.0}, {0.3, -2.0}), cd(5.0));
  EXPECT_NEAR(std::abs(section_eval({{0, 0.5}, 0.0}, 1.0) - cd(0, -1)), 0.0, 1e-15);
  EXPECT_THROW(section_eval({{0, 0.5}, 0.0}, 0.0), DomainError);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2, 2);
  O2Section s{{0.3, -0.8}, 1.2};
  for (int k = 0; k < 10; ++k) {
    cd z(u(rng), u(rng));
    EXPECT_LT(std::abs(std::conj(section_eval(s, z)) - section_eval(s, -1.0 / std::conj(z))), 1e-12);
  }
}

TEST(Section, Positions) {
  auto p = moduli_to_positions({{{0, 0.5}, 0.0}, {0.0, 1.0}, {{0.5, 0}, 0.0}});
  EXPECT_TRUE(p[0].isApprox(ImVector(1, 0, 0)));
  EXPECT_TRUE(p[1].isApprox(ImVector(0, 0, 1)));
  EXPECT_TRUE(p[2].isApprox(ImVector(0, -1, 0)));
}

TEST(Roots, Examples) {
  auto [a, b] = roots_eta0({{0.5, 0}, 0.0});
  EXPECT_NEAR(std::abs(a - cd(1)), 0, 1e-15);
  EXPECT_NEAR(std::abs(b - cd(-1)), 0, 1e-15);
  auto [c, d] = roots_eta0({{0, 0.5}, 0.0});
  EXPECT_NEAR(std::abs(c - cd(0, -1)), 0, 1e-15);
  EXPECT_NEAR(std::abs(d - cd(0, 1)), 0, 1e-15);
  EXPECT_THROW(roots_eta0({0.0, 1.0}), SingularPointError);
}

TEST(Roots, Residual) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int k = 0; k < 20; ++k) {
    O2Section s{{u(rng), u(rng)}, u(rng)};
    auto [p, m] = roots_eta0(s);
    // as a polynomial: -z zeta^2 + x zeta + conj(z)
    EXPECT_LT(std::abs(-s.z * p * p + s.x * p + std::conj(s.z)), 1e-10);
    EXPECT_LT(std::abs(section_eval(s, m)), 1e-10);
    EXPECT_LT(std::abs(p + 1.0 / std::conj(m)), 1e-10);
  }
}

TEST(CMap, ProductMatchesContourQuadrature) {
  Prepotential P = Prepotential::from_expression("X1*X2");
  std::mt19937_64 rng(8);
  for (int k = 0; k < 5; ++k) {
    auto x = random_point(rng, 2);
    ModuliPoint m = moduli_from_coordinates(x);
    auto [zp, zm] = roots_eta0(m[0]);
    double rad = std::min({0.1, 0.5 * std::abs(zp - zm), 0.5 * std::abs(zp), 0.5 * std::abs(zm)});
    auto f = [&](cd z) { return eta(x, 1, z) * eta(x, 2, z) / (z * eta(x, 0, z)); };
    cd G = circle_integral(f, zp, rad) - circle_integral(f, zm, rad);
    EXPECT_NEAR(cmap_F(P, m), G.real(), 1e-7);
  }
}

// eta ln eta has its cut between the roots; shrinking the eight-shape contour
// onto the cut leaves the integral of the discontinuity 2 pi i eta / zeta.
// The cut is taken along a half circle through the roots (zeta = 0 lies on
// the straight segment); the side only changes the imaginary part.
TEST(ToyLog, MatchesCollapsedContour) {
  std::mt19937_64 rng(12);
  for (int k = 0; k < 10; ++k) {
    auto x = random_point(rng, 0);
    ModuliPoint m = moduli_from_coordinates(x);
    auto [zp, zm] = roots_eta0(m[0]);
    cd c = 0.5 * (zp + zm), w = zm - c;
    const int N = 4096;
    cd sum = 0.0;
    for (int j = 0; j <= N; ++j) {
      double t = double(j) / N;
      cd z = c + w * std::polar(1.0, std::numbers::pi * t);
      cd dz = w * cd(0, std::numbers::pi) * std::polar(1.0, std::numbers::pi * t);
      double wt = (j == 0 || j == N) ? 1.0 : (j % 2 ? 4.0 : 2.0);
      sum += wt * eta(x, 0, z) / z * dz;
    }
    sum /= 3.0 * N;
    EXPECT_NEAR(toy_log_F(m), -0.5 * sum.real(), 1e-6);
    EXPECT_NEAR(std::abs(sum.imag()), std::numbers::pi * std::abs(x[2]), 1e-6);
  }
}

TEST(ToyLog, ClosedForm) {
  EXPECT_NEAR(toy_log_F({{{0, 0.5}, 0.0}}), 1.0, 1e-15);
  EXPECT_NEAR(toy_log_F({{{0.3, 0.4}, 0.0}}), 1.0, 1e-15);
  EXPECT_THROW(toy_log_F({{0.0, 1.0}}), DomainError);
}

TEST(CMap, BracketIsReal) {
  Prepotential P = Prepotential::from_expression("X2^3/X1");
  std::mt19937_64 rng(9);
  for (int k = 0; k < 20; ++k) {
    auto m = moduli_from_coordinates(random_point(rng, 2));
    cd s = cmap_bracket(P, m);
    EXPECT_LT(std::abs(s.imag()), 1e-9 * std::max(1.0, std::abs(s)));
  }
}

TEST(CMap, ScalingAndAxialRotation) {
  FFunction F = FFunction::cmap(Prepotential::from_expression("X1*X2"));
  std::mt19937_64 rng(10);
  for (int k = 0; k < 10; ++k) {
    auto x = random_point(rng, 2);
    double f = F(x);
    std::vector<double> y(x);
    for (auto& v : y) v *= 1.7;
    EXPECT_NEAR(F(y), 1.7 * f, 1e-9 * std::max(1.0, std::abs(f)));
    // rotation about the third axis is the L3 symmetry
    auto r = rotate_coordinates(x, {std::cos(0.35), 0, 0, std::sin(0.35)});
    EXPECT_NEAR(F(r), f, 1e-8 * std::max(1.0, std::abs(f)));
  }
}

TEST(CMap, Errors) {
  Prepotential P = Prepotential::from_expression("X1^2");
  EXPECT_THROW(cmap_F(P, {{0.0, 1.0}, {{0.1, 0.2}, 0.3}}), SingularPointError);
  EXPECT_THROW(cmap_F(P, {{{0.5, 0}, 0.0}}), std::invalid_argument);
  EXPECT_THROW(Prepotential::from_expression("Y^2"), ParseError);
}

TEST(Prepotential, Homogeneity) {
  for (const char* e : {"X1^2", "X1*X2", "X2^3/X1"}) {
    auto h = prepotential_homogeneity(Prepotential::from_expression(e), 2.0, 20, 3);
    EXPECT_LT(h.scaling, 1e-12) << e;
    EXPECT_LT(h.euler, 1e-7) << e;  // central difference
  }
  auto bad = prepotential_homogeneity(Prepotential::from_expression("X1^2*X2"), 2.0, 20, 3);
  EXPECT_GT(bad.scaling, 1e-2);
}

TEST(Residuals, Polyharmonic) {
  std::mt19937_64 rng(13);
  std::vector<FFunction> models{FFunction::cmap(Prepotential::from_expression("X1^2")), FFunction::toy_log()};
  for (const auto& F : models)
    for (int k = 0; k < 50; ++k) {
      auto x = random_point(rng, F.n());
      auto p = polyharmonicity_residual(F, x, {Backend::Stencil});
      EXPECT_LT(p.relative(), 1e-5);
      auto t = polyharmonicity_residual(F, x, {Backend::Taylor});
      EXPECT_LT(std::max(t.laplace, t.symmetry), 1e-9);
    }
  FFunction sq = FFunction::custom(0, "x0^2", [](auto x) { return x[2] * x[2]; });
  std::vector<double> x{0.3, 0.2, 0.5};
  EXPECT_NEAR(polyharmonicity_residual(sq, x).laplace, 2.0, 1e-6);
}

TEST(Residuals, Swann) {
  std::mt19937_64 rng(14);
  std::vector<FFunction> models{FFunction::cmap(Prepotential::from_expression("X1^2")),
                                FFunction::cmap(Prepotential::from_expression("X1*X2")),
                                FFunction::cmap(Prepotential::from_expression("X2^3/X1")), FFunction::toy_log()};
  for (const auto& F : models)
    for (int k = 0; k < 50; ++k) {
      auto x = random_point(rng, F.n());
      EXPECT_LT(swann_homogeneity_residual(F, x, {Backend::Stencil}).relative(), 1e-5) << F.label();
    }
  FFunction cube = FFunction::custom(0, "x0^3", [](auto x) { return x[2] * x[2] * x[2]; });
  std::vector<double> x{0.3, 0.2, 0.5};
  EXPECT_GT(swann_homogeneity_residual(cube, x).l0, 0.1);
}
