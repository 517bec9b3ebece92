#include "qkforge/derivatives.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace qkforge {

namespace {

struct Node {
  std::vector<std::pair<int, int>> shift;  // (coordinate, multiple of its step)
  double weight;
};

// 1D central stencils of second order accuracy, offsets in units of h
const std::vector<std::pair<int, double>>& central(int m) {
  static const std::vector<std::pair<int, double>> d1{{-1, -0.5}, {1, 0.5}};
  static const std::vector<std::pair<int, double>> d2{{-1, 1.0}, {0, -2.0}, {1, 1.0}};
  static const std::vector<std::pair<int, double>> d3{{-2, -0.5}, {-1, 1.0}, {1, -1.0}, {2, 0.5}};
  switch (m) {
    case 1: return d1;
    case 2: return d2;
    case 3: return d3;
  }
  throw std::invalid_argument("partial: multi-index longer than 3");
}

double stencil(const ScalarField& f, std::span<const double> x, const std::map<int, int>& mult,
               const std::vector<double>& h) {
  std::vector<Node> nodes{{{}, 1.0}};
  for (auto [coord, m] : mult) {
    std::vector<Node> next;
    for (const auto& n : nodes)
      for (auto [off, w] : central(m)) {
        Node c = n;
        c.shift.emplace_back(coord, off);
        c.weight *= w;
        next.push_back(std::move(c));
      }
    nodes = std::move(next);
  }
  double scale = 1.0;
  for (auto [coord, m] : mult) scale *= std::pow(h[coord], m);
  std::vector<double> y(x.begin(), x.end());
  double acc = 0.0;
  for (const auto& n : nodes) {
    std::copy(x.begin(), x.end(), y.begin());
    for (auto [coord, off] : n.shift) y[coord] += off * h[coord];
    acc += n.weight * f(y);
  }
  return acc / scale;
}

}  // namespace

double ScalarField::operator()(std::span<const double> x) const {
  if (singular && singular(x)) throw SingularPointError("evaluation on singular locus", {x.begin(), x.end()});
  double v = eval(x);
  if (!std::isfinite(v)) throw SingularPointError("non-finite field value", {x.begin(), x.end()});
  return v;
}

double default_step(int order, double coordinate, bool richardson) {
  const double eps = std::numeric_limits<double>::epsilon();
  return std::pow(eps, 1.0 / (order + (richardson ? 4 : 2))) * std::max(1.0, std::abs(coordinate));
}

double partial(const ScalarField& f, const DerivativeRequest& req, const StencilOptions& opt) {
  const int order = static_cast<int>(req.multi_index.size());
  if (order < 1 || order > 3) throw std::invalid_argument("partial: multi-index length must be 1..3");
  if (static_cast<int>(req.point.size()) != f.dim) throw std::invalid_argument("partial: dimension mismatch");
  std::map<int, int> mult;
  for (int i : req.multi_index) {
    if (i < 0 || i >= f.dim) throw std::out_of_range("partial: coordinate index");
    ++mult[i];
  }
  std::vector<double> h(f.dim);
  for (int i = 0; i < f.dim; ++i)
    h[i] = req.step ? *req.step : default_step(order, req.point[i], opt.richardson);
  if (!opt.richardson) return stencil(f, req.point, mult, h);
  double coarse = stencil(f, req.point, mult, h);
  for (double& s : h) s *= 0.5;
  double fine = stencil(f, req.point, mult, h);
  return (4.0 * fine - coarse) / 3.0;
}

Eigen::VectorXd gradient(const ScalarField& f, std::span<const double> x, const StencilOptions& opt) {
  Eigen::VectorXd g(f.dim);
  DerivativeRequest req{{x.begin(), x.end()}, {0}, std::nullopt};
  for (int i = 0; i < f.dim; ++i) {
    req.multi_index = {i};
    g[i] = partial(f, req, opt);
  }
  return g;
}

Eigen::MatrixXd hessian(const ScalarField& f, std::span<const double> x, const StencilOptions& opt) {
  Eigen::MatrixXd H(f.dim, f.dim);
  DerivativeRequest req{{x.begin(), x.end()}, {}, std::nullopt};
  for (int i = 0; i < f.dim; ++i)
    for (int j = i; j < f.dim; ++j) {
      req.multi_index = {i, j};
      double a = partial(f, req, opt);
      req.multi_index = {j, i};
      double b = partial(f, req, opt);
      H(i, j) = H(j, i) = 0.5 * (a + b);
    }
  return H;
}

Eigen::MatrixXd jacobian(const std::function<Eigen::VectorXd(std::span<const double>)>& g, std::span<const double> x,
                         const StencilOptions& opt) {
  std::vector<double> y(x.begin(), x.end());
  Eigen::MatrixXd J;
  for (size_t i = 0; i < x.size(); ++i) {
    auto diff = [&](double h) {
      y[i] = x[i] + h;
      Eigen::VectorXd p = g(y);
      y[i] = x[i] - h;
      Eigen::VectorXd m = g(y);
      y[i] = x[i];
      return Eigen::VectorXd((p - m) / (2.0 * h));
    };
    double h = default_step(1, x[i], opt.richardson);
    Eigen::VectorXd col = diff(h);
    if (opt.richardson) col = (4.0 * diff(0.5 * h) - col) / 3.0;
    if (J.size() == 0) J.resize(col.size(), static_cast<Eigen::Index>(x.size()));
    J.col(static_cast<Eigen::Index>(i)) = col;
  }
  return J;
}

std::vector<Jet> seed_jets(std::span<const double> x, int order) {
  auto space = JetSpace::make(static_cast<int>(x.size()), order);
  std::vector<Jet> v;
  v.reserve(x.size());
  for (size_t i = 0; i < x.size(); ++i) v.push_back(Jet::variable(space, static_cast<int>(i), x[i]));
  return v;
}

}  // namespace qkforge
