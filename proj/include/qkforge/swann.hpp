#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qkforge/gibbons_hawking.hpp"
#include "qkforge/quaternion.hpp"
#include "qkforge/twistor.hpp"

namespace qkforge {

struct ModelInconsistencyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GaugeRepresentativeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Gauge-fixed base chart: chi^0 = chi^1 = rho^0 = 0, eta^0 = 1.  Free
// coordinates in the order chi^2..chi^n, rho^1..rho^n, eta^1..eta^n.
struct BaseChart {
  int n = 1;
  std::vector<double> chi, rho, eta;  // indexed by I = 0..n
  std::vector<double> psi;            // n+1 angles, enter only through dpsi

  static BaseChart from_coordinates(int n, std::span<const double> c);
  std::vector<double> coordinates() const;
  int num_coordinates() const { return 3 * n - 1; }
  ImVector chi_vec(int I) const { return {chi[I], rho[I], eta[I]}; }
};

// positions of chi^I (I >= 2), rho^I and eta^I (I >= 1) among the free coordinates
inline int chi_index(int, int I) { return I - 2; }
inline int rho_index(int n, int I) { return n - 2 + I; }
inline int eta_index(int n, int I) { return 2 * n - 2 + I; }

// chi_vec components of every I as functions of the free coordinates
template <class T>
std::vector<std::array<T, 3>> chi_vectors(int n, std::span<const T> c) {
  std::vector<std::array<T, 3>> v(n + 1, {T(0.0), T(0.0), T(0.0)});
  v[0][2] = T(1.0);
  for (int I = 1; I <= n; ++I) {
    if (I >= 2) v[I][0] = c[I - 2];
    v[I][1] = c[n - 1 + I - 1];
    v[I][2] = c[2 * n - 1 + I - 1];
  }
  return v;
}

// Positions q chi^I conj(q) * scale, flattened.
template <class T>
std::vector<T> embed_coordinates(int n, std::span<const T> c, const Quat<T>& q, const T& scale) {
  auto chis = chi_vectors<T>(n, c);
  std::vector<T> x;
  x.reserve(3 * (n + 1));
  for (const auto& ch : chis)
    for (const T& r : sandwich(q, ch)) x.push_back(r * scale);
  return x;
}

// Unscaled r = q chi conj(q); scaled r = q chi conj(q) / V.
ModuliPoint embed(const BaseChart& chart, const Quaternion& q, bool scaled, double V = 1.0);

double extract_V(const FFunction& F, const BaseChart& chart, const Quaternion& q, const EvalOptions& opt = {});
Eigen::MatrixXd extract_U(const FFunction& F, const BaseChart& chart, const Quaternion& q, const EvalOptions& opt = {});
// gradient of V over the free chart coordinates (chain rule through the embedding)
Eigen::VectorXd extract_dV(const FFunction& F, const BaseChart& chart, const Quaternion& q);
// U from the scaled embedding, |q|^2 Phi / V
Eigen::MatrixXd extract_U_scaled(const FFunction& F, const BaseChart& chart, const Quaternion& q, double V,
                                 const EvalOptions& opt = {});

std::vector<ImVector> compute_B(const Eigen::MatrixXd& U, const BaseChart& chart);

struct CExtraction {
  std::vector<Eigen::VectorXd> C;  // per K, over the free chart coordinates
  double sigma_residual = 0.0;     // max |sigma_0| and |sigma - B| over samples
  double spread = 0.0;             // max deviation of C between samples
};

// Pulls the shifted connection back along the scaled embedding at each q.
CExtraction extract_C(const FFunction& F, const BaseChart& chart, std::span<const Quaternion> qs, double V,
                      const Eigen::VectorXd& dV, const std::vector<ImVector>& B, double sigma_tol = 1e-6);

struct ReducedData {
  double V = 0.0;
  Eigen::VectorXd dV;
  Eigen::MatrixXd U;
  std::vector<ImVector> B;
  std::vector<Eigen::VectorXd> C;
  double q_spread_V = 0.0;  // relative
  double q_spread_U = 0.0;  // relative to max |U|
  double sigma_residual = 0.0;
  double c_spread = 0.0;
};

struct ReduceOptions {
  std::vector<Quaternion> q_samples;  // first one is the reference; empty = built-in
  bool compute_C = true;
  double q_tol = 1e-8;  // raise ModelInconsistencyError above this
  double sigma_tol = 1e-6;
};

// Fixed fiber points used for extraction (away from the z^0 = 0 axis).
const std::vector<Quaternion>& default_fiber_points();

ReducedData reduce(const FFunction& F, const BaseChart& chart, const ReduceOptions& opt = {});

struct QKConnection {
  Eigen::VectorXd omega0;              // over (chart, psi), length 4n
  std::array<Eigen::VectorXd, 3> omega;
};

QKConnection qk_connection(const BaseChart& chart, const ReducedData& r);
Eigen::MatrixXd qk_metric(const BaseChart& chart, const ReducedData& r);
Eigen::MatrixXd qk_metric(const BaseChart& chart, const ReducedData& r, const QKConnection& w);

// F_K of the reduced Bogomol'nyi equation from U and its chart derivatives
// dU[c] = d U / d c_c.
Eigen::MatrixXd bogomolnyi_F(const BaseChart& chart, const std::vector<Eigen::MatrixXd>& dU, int K);

// max_K |dC_K - F_K|, C and U differentiated by stencils over the chart
double bogomolnyi_residual(const FFunction& F, const BaseChart& chart, const StencilOptions& st = {true});

// |GH metric pulled back along the scaled embedding - |q|^2[sigma0^2 + sg + (sigma + omega)^2]|
double cone_reassembly_residual(const FFunction& F, const BaseChart& chart, const Quaternion& q);

// Flat-space check for the toy model at fiber point q: max-norm of
// (GH metric in the sigma basis) - |q|^2 identity.
double toy_flat_residual(const Quaternion& q);

struct AlmostComplexResult {
  double algebra = 0.0;  // max |J_i J_j + delta_ij - eps_ijk J_k|
  double j1_square = 0.0;  // |J_1^2 + 1|
};
AlmostComplexResult almost_complex_check(const FFunction& F, const BaseChart& chart);

}  // namespace qkforge
