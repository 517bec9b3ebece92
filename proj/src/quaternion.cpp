#include "qkforge/quaternion.hpp"

#include <algorithm>
#include <cmath>

namespace qkforge {

namespace {

void require_nonzero(const Quaternion& q, const char* what) {
  if (norm2(q) == 0.0) throw DomainError(std::string(what) + ": zero quaternion");
}

// matrix of v -> q v conj(q) / |q|^2
Eigen::Matrix3d rotation_of(const Quaternion& q) {
  Eigen::Matrix3d R;
  for (int c = 0; c < 3; ++c) {
    std::array<double, 3> e{0.0, 0.0, 0.0};
    e[c] = 1.0;
    auto r = sandwich(q, e);
    for (int i = 0; i < 3; ++i) R(i, c) = r[i];
  }
  return R / norm2(q);
}

}  // namespace

ImVector rotate_vector(const Quaternion& q, const ImVector& v) {
  require_nonzero(q, "rotate_vector");
  auto r = sandwich(q, std::array<double, 3>{v[0], v[1], v[2]});
  return {r[0], r[1], r[2]};
}

Quaternion from_euler(double r, double phi, double theta, double psi) {
  if (!(r > 0.0)) throw DomainError("from_euler: r must be positive");
  Quaternion a{std::cos(phi / 2), -std::sin(phi / 2), 0.0, 0.0};
  Quaternion b{std::cos(theta / 2), 0.0, -std::sin(theta / 2), 0.0};
  Quaternion c{std::cos(psi / 2), 0.0, 0.0, -std::sin(psi / 2)};
  return r * mul(mul(a, b), c);
}

EulerAngles to_euler(const Quaternion& q) {
  require_nonzero(q, "to_euler");
  Eigen::Matrix3d R = rotation_of(q);
  // R = Rx(-phi) Ry(-theta) Rz(-psi)
  double s = std::clamp(R(0, 2), -1.0, 1.0);
  double theta = -std::asin(s);
  if (std::abs(std::cos(theta)) < 1e-10) throw DomainError("to_euler: gimbal lock");
  double psi = std::atan2(R(0, 1), R(0, 0));
  double phi = std::atan2(R(1, 2), R(2, 2));
  return {std::sqrt(norm2(q)), phi, theta, psi};
}

Eigen::Matrix4d left_invariant_matrix(const Quaternion& q) {
  require_nonzero(q, "left_invariant_matrix");
  double q0 = q.w, q1 = q.x, q2 = q.y, q3 = q.z;
  Eigen::Matrix4d M;
  M << q0, q1, q2, q3,
       q1, -q0, -q3, q2,
       q2, q3, -q0, -q1,
       q3, -q2, q1, -q0;
  return M / norm2(q);
}

Eigen::Vector4d left_invariant_eval(const Quaternion& q, const Eigen::Vector4d& v) {
  return left_invariant_matrix(q) * v;
}

Eigen::Matrix4d hx_generators(const Quaternion& q) {
  double q0 = q.w, q1 = q.x, q2 = q.y, q3 = q.z;
  Eigen::Matrix4d X;
  X.col(0) << q0, q1, q2, q3;
  X.col(1) << q1, -q0, q3, -q2;
  X.col(2) << q2, -q3, -q0, q1;
  X.col(3) << q3, q2, -q1, -q0;
  return X;
}

}  // namespace qkforge
