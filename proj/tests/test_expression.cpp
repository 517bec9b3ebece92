#include <gtest/gtest.h>

#include <complex>

#include "qkforge/expression.hpp"
#include "qkforge/twistor.hpp"

using namespace qkforge;

TEST(Expression, Arithmetic) {
  auto e = Expression::parse("2*rho1^2 - eta1/(1+rho1) + 3^2", {"rho1", "eta1"});
  std::vector<double> x{1.5, 0.5};
  EXPECT_NEAR(e.eval<double>(x), 2 * 2.25 - 0.5 / 2.5 + 9, 1e-14);
  EXPECT_TRUE(e.uses(0));
  EXPECT_TRUE(e.uses(1));
  auto u = Expression::parse("-(-x)^3", {"x"});
  std::vector<double> y{2.0};
  EXPECT_NEAR(u.eval<double>(y), 8.0, 1e-14);
  EXPECT_NEAR(Expression::parse("1e-1*x^0.5", {"x"}).eval<double>(std::vector<double>{4.0}), 0.2, 1e-14);
}

TEST(Expression, Errors) {
  std::vector<std::string> v{"x"};
  EXPECT_THROW(Expression::parse("", v), ParseError);
  EXPECT_THROW(Expression::parse("x +", v), ParseError);
  EXPECT_THROW(Expression::parse("(x", v), ParseError);
  EXPECT_THROW(Expression::parse("y", v), ParseError);
  EXPECT_THROW(Expression::parse("x $ 2", v), ParseError);
}

TEST(Expression, ComplexAndDivisors) {
  auto e = Expression::parse("X2^3/X1", prepotential_variable_names(2));
  std::vector<Cplx<double>> z{from_std({0.0, 2.0}), from_std({1.0, 1.0})};
  auto r = to_std(e.eval<Cplx<double>>(z));
  std::complex<double> want = std::pow(std::complex<double>(1, 1), 3) / std::complex<double>(0, 2);
  EXPECT_NEAR(std::abs(r - want), 0.0, 1e-14);
  EXPECT_NEAR(e.min_divisor(z), 2.0, 1e-14);
}

TEST(Expression, ChartNames) {
  auto n = chart_variable_names(2);
  std::vector<std::string> want{"chi2", "rho1", "rho2", "eta1", "eta2"};
  EXPECT_EQ(n, want);
  EXPECT_EQ(chart_variable_names(1), (std::vector<std::string>{"rho1", "eta1"}));
}
