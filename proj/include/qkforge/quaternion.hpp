#pragma once

#include <array>
#include <stdexcept>

#include <Eigen/Dense>

namespace qkforge {

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// Hamilton quaternion w + x i + y j + z k, generic over the scalar so the
// same formulas serve values and Taylor jets.
template <class T>
struct Quat {
  T w, x, y, z;

  Quat() : w(0.0), x(0.0), y(0.0), z(0.0) {}
  Quat(T w_, T x_, T y_, T z_) : w(std::move(w_)), x(std::move(x_)), y(std::move(y_)), z(std::move(z_)) {}
};

using Quaternion = Quat<double>;
using ImVector = Eigen::Vector3d;

template <class T>
Quat<T> mul(const Quat<T>& a, const Quat<T>& b) {
  return Quat<T>(a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
                 a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
                 a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
                 a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w);
}

template <class T>
Quat<T> conj(const Quat<T>& q) {
  return Quat<T>(q.w, -q.x, -q.y, -q.z);
}

template <class T>
T norm2(const Quat<T>& q) {
  return q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z;
}

// Im(q v conj(q)) without normalization; scales lengths by |q|^2
template <class T>
std::array<T, 3> sandwich(const Quat<T>& q, const std::array<T, 3>& v) {
  Quat<T> p(T(0.0), v[0], v[1], v[2]);
  Quat<T> r = mul(mul(q, p), conj(q));
  return {r.x, r.y, r.z};
}

inline Quaternion operator*(const Quaternion& a, const Quaternion& b) { return mul(a, b); }
inline Quaternion operator+(const Quaternion& a, const Quaternion& b) {
  return {a.w + b.w, a.x + b.x, a.y + b.y, a.z + b.z};
}
inline Quaternion operator*(double s, const Quaternion& a) { return {s * a.w, s * a.x, s * a.y, s * a.z}; }

inline Eigen::Vector4d to_vec(const Quaternion& q) { return {q.w, q.x, q.y, q.z}; }
inline Quaternion from_vec(const Eigen::Vector4d& v) { return {v[0], v[1], v[2], v[3]}; }
inline Quaternion from_im(const ImVector& v) { return {0.0, v[0], v[1], v[2]}; }
inline ImVector im_part(const Quaternion& q) { return {q.x, q.y, q.z}; }

ImVector rotate_vector(const Quaternion& q, const ImVector& v);

// q = r exp(-i phi/2) exp(-j theta/2) exp(-k psi/2)
Quaternion from_euler(double r, double phi, double theta, double psi);

struct EulerAngles {
  double r, phi, theta, psi;
};
// principal branches, theta in (-pi/2, pi/2); rejects gimbal lock
EulerAngles to_euler(const Quaternion& q);

// Rows are sigma_0..sigma_3 as covectors in (dq0,dq1,dq2,dq3).
Eigen::Matrix4d left_invariant_matrix(const Quaternion& q);
Eigen::Vector4d left_invariant_eval(const Quaternion& q, const Eigen::Vector4d& v);

// Columns are X0..X3 as tangent vectors in (q0,q1,q2,q3) coordinates.
Eigen::Matrix4d hx_generators(const Quaternion& q);

}  // namespace qkforge
