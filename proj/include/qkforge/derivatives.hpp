#pragma once

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qkforge/jet.hpp"

namespace qkforge {

// Raised when an evaluation (or any stencil node) lands on a singular locus.
class SingularPointError : public std::runtime_error {
 public:
  SingularPointError(const std::string& what, std::vector<double> point)
      : std::runtime_error(what), point_(std::move(point)) {}
  const std::vector<double>& point() const { return point_; }

 private:
  std::vector<double> point_;
};

struct ScalarField {
  int dim = 0;
  std::function<double(std::span<const double>)> eval;
  std::function<bool(std::span<const double>)> singular;  // optional

  // guarded evaluation; throws SingularPointError
  double operator()(std::span<const double> x) const;
};

struct DerivativeRequest {
  std::vector<double> point;
  std::vector<int> multi_index;  // 1 to 3 entries
  std::optional<double> step;    // absolute step for every coordinate
};

struct StencilOptions {
  // (4 D(h/2) - D(h)) / 3 with a larger base step
  bool richardson = false;
};

double default_step(int order, double coordinate, bool richardson = false);

double partial(const ScalarField& f, const DerivativeRequest& req, const StencilOptions& opt = {});
Eigen::VectorXd gradient(const ScalarField& f, std::span<const double> x, const StencilOptions& opt = {});
Eigen::MatrixXd hessian(const ScalarField& f, std::span<const double> x, const StencilOptions& opt = {});

// Stencil derivative of a vector-valued map, one column per coordinate.
Eigen::MatrixXd jacobian(const std::function<Eigen::VectorXd(std::span<const double>)>& g, std::span<const double> x,
                         const StencilOptions& opt = {});

// Independent Taylor variables at x.
std::vector<Jet> seed_jets(std::span<const double> x, int order);

}  // namespace qkforge
