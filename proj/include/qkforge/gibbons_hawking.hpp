#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qkforge/twistor.hpp"

namespace qkforge {

struct DegeneratePointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Orientation of the R^3 factor used by the star operators and by the
// hyperkahler 2-forms.  With r = (2 Im z, -2 Re z, x) and A = -Im(F_xz dz) the
// monopole equation closes for the reversed orientation.
inline constexpr int kLegendreOrientation = -1;

// Derivatives of F at one point, up to third order, exact (Taylor) or by
// stencils (cached per sorted multi-index).
class FDerivatives {
 public:
  FDerivatives(const FFunction& F, std::span<const double> x, const EvalOptions& opt, int max_order);

  int dim() const { return F_.dim(); }
  std::span<const double> point() const { return x_; }
  double value() const { return value_; }
  double d(int a) const;
  double d(int a, int b) const;
  double d(int a, int b, int c) const;

 private:
  double stencil(std::vector<int> idx) const;

  FFunction F_;
  std::vector<double> x_;
  EvalOptions opt_;
  int order_;
  double value_ = 0.0;
  std::optional<Jet> jet_;
  mutable std::map<std::vector<int>, double> cache_;
};

// Coefficients over the 3(n+1) coordinates x_i^I, one covector per K.
struct ConnectionForm {
  std::vector<Eigen::VectorXd> a;
};

Eigen::MatrixXd higgs_from_F(const FFunction& F, std::span<const double> x, const EvalOptions& opt = {});
ConnectionForm connection_from_F(const FFunction& F, std::span<const double> x, const EvalOptions& opt = {});
ConnectionForm shifted_connection(const FFunction& F, std::span<const double> x, const EvalOptions& opt = {});

// shift potential psi'_K = c_K Im(z^0 F_{z^0 x^K}), c_0 = 1/2, c_K = 1 otherwise
Eigen::VectorXd shift_potential(const FFunction& F, std::span<const double> x, const EvalOptions& opt = {});

// Covector over (Re z^J, Im z^J, x^J) from one over x_i^J.
Eigen::VectorXd to_moduli_basis(const Eigen::VectorXd& covector);

struct StarOperator {
  int I = 0;
  int n = 0;
  int orientation = 1;
};
// 2-form as an antisymmetric matrix M, form = 1/2 M_ab dx^a ^ dx^b
Eigen::MatrixXd star_apply(const StarOperator& op, const Eigen::VectorXd& covector);
// matrix of the 2-form a ^ b
Eigen::MatrixXd wedge(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

struct MonopoleResidual {
  double first = 0.0;
  double second = 0.0;
  double scale = 0.0;  // largest third derivative of F that enters
  // residual relative to max(1, scale)
  double relative() const { return std::max(first, second) / std::max(1.0, scale); }
};
MonopoleResidual monopole_residual(const FFunction& F, std::span<const double> x,
                                   const EvalOptions& opt = {Backend::Stencil});

struct LegendreResult {
  double K = 0.0;
  Eigen::VectorXd uplusubar;
};
LegendreResult legendre_transform(const FFunction& F, std::span<const double> x, const EvalOptions& opt = {});

struct HyperkahlerData {
  Eigen::MatrixXd G;                    // basis (x_i^I, psi_I)
  std::array<Eigen::MatrixXd, 3> Omega;  // same basis
};

// G = 1/2 Phi dr.dr + 1/2 Phi^{-1} (dpsi + A)(dpsi + A) from values of Phi and A
Eigen::MatrixXd gh_metric(const Eigen::MatrixXd& Phi, const ConnectionForm& A);
std::array<Eigen::MatrixXd, 3> gh_two_forms(const Eigen::MatrixXd& Phi, const ConnectionForm& A);

HyperkahlerData hk_assemble(const FFunction& F, std::span<const double> x, std::span<const double> psi,
                            const EvalOptions& opt = {}, bool shifted = false);

// max |d Omega_k| over all 3-form components
double closure_residual(const FFunction& F, std::span<const double> x, const EvalOptions& opt = {});

// Pivoted-LU inverse with a condition number guard.
Eigen::MatrixXd guarded_inverse(const Eigen::MatrixXd& M, double max_condition = 1e12);

}  // namespace qkforge
