#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qkforge/derivatives.hpp"
#include "qkforge/expression.hpp"
#include "qkforge/swann.hpp"

namespace qkforge {

// Scalar V over the 3n-1 free chart coordinates.  Expressions are
// differentiated with Taylor jets, everything else with Richardson stencils.
class VFunction {
 public:
  static VFunction from_expression(std::string_view text, int n);
  static VFunction from_callable(int n, std::function<double(std::span<const double>)> f,
                                 std::function<bool(std::span<const double>)> singular = {});
  // V extracted from the Legendre pipeline at a fixed fiber point
  static VFunction from_model(const FFunction& F);

  int n() const { return n_; }
  int dim() const { return 3 * n_ - 1; }
  bool has_jet() const { return expr_.has_value(); }
  const std::string& label() const { return label_; }

  double operator()(std::span<const double> c) const;
  bool singular(std::span<const double> c) const;
  ScalarField field() const;

 private:
  friend struct VDerivatives;
  int n_ = 1;
  std::string label_;
  std::optional<Expression> expr_;
  std::function<double(std::span<const double>)> f_;
  std::function<bool(std::span<const double>)> singular_;
};

struct VDerivatives {
  double V = 0.0;
  Eigen::VectorXd g;
  Eigen::MatrixXd H;

  VDerivatives(const VFunction& V, std::span<const double> c, const StencilOptions& st = {true});
};

std::vector<ImVector> B_from_V(const VFunction& V, std::span<const double> c);
std::vector<ImVector> B_from_V(const BaseChart& chart, const VDerivatives& d);

Eigen::MatrixXd U_from_V(const VFunction& V, std::span<const double> c);
Eigen::MatrixXd U_from_V(const BaseChart& chart, const VDerivatives& d);

Eigen::Matrix3d W_matrix(const BaseChart& chart, const VDerivatives& d);

struct ConstraintResiduals {
  double symmetry = 0.0;  // mixed-partial trio
  double closure = 0.0;   // W trio
  std::vector<std::pair<std::string, double>> items;
  double max() const { return std::max(symmetry, closure); }
};

// Independent subset by default (j = 3 for all three W equations plus the
// first one with j = 2); every j under exhaustive.
ConstraintResiduals constraint_residuals(const VFunction& V, std::span<const double> c, bool exhaustive = false);

// n = 1: |rho (V_rho rho + V_eta eta) - V_rho| at c = (rho, eta)
double cp_residual(const VFunction& V, std::span<const double> c);

struct CPOutput {
  Eigen::Matrix4d metric;  // basis (rho, eta, psi0, psi1)
  Eigen::Vector4d omega0;
  std::array<Eigen::Vector4d, 3> omega;
};
CPOutput cp_assemble(const VFunction& V, std::span<const double> c);

}  // namespace qkforge
