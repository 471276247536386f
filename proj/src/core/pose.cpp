#include "subsplat/core/pose.hpp"

#include <cmath>

namespace subsplat::core {

Eigen::Quaterniond so3_exp(const Eigen::Vector3d& omega) {
  const double theta2 = omega.squaredNorm();
  const double theta = std::sqrt(theta2);
  double half_sinc;  // sin(theta/2) / theta
  if (theta < 1e-8) {
    half_sinc = 0.5 - theta2 / 48.0;
  } else {
    half_sinc = std::sin(0.5 * theta) / theta;
  }
  Eigen::Quaterniond q(std::cos(0.5 * theta), half_sinc * omega.x(), half_sinc * omega.y(),
                       half_sinc * omega.z());
  q.normalize();
  return q;
}

Eigen::Vector3d so3_log(const Eigen::Quaterniond& q_in) {
  Eigen::Quaterniond q = q_in.normalized();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  const Eigen::Vector3d v(q.x(), q.y(), q.z());
  const double norm_v = v.norm();
  const double theta = 2.0 * std::atan2(norm_v, q.w());
  if (norm_v < 1e-12) return 2.0 * v;  // first-order: q ~ (1, omega/2)
  return (theta / norm_v) * v;
}

Pose Pose::from_rt(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation) {
  return Pose(Eigen::Quaterniond(rotation), translation);
}

Pose Pose::from_matrix(const Eigen::Matrix4d& transform) {
  return from_rt(transform.topLeftCorner<3, 3>(), transform.topRightCorner<3, 1>());
}

Eigen::Matrix4d Pose::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation();
  m.topRightCorner<3, 1>() = t_;
  return m;
}

Pose Pose::inverse() const {
  const Eigen::Quaterniond qi = q_.conjugate();
  return Pose(qi, -(qi * t_));
}

Pose Pose::operator*(const Pose& other) const {
  Pose out(q_ * other.q_, q_ * other.t_ + t_);
  out.renormalize();
  return out;
}

Pose Pose::right_update(const Eigen::Vector3d& d_rot, const Eigen::Vector3d& d_trans) const {
  return *this * Pose(so3_exp(d_rot), d_trans);
}

Pose Pose::left_update(const Eigen::Vector3d& d_rot, const Eigen::Vector3d& d_trans) const {
  return Pose(so3_exp(d_rot), d_trans) * *this;
}

void Pose::renormalize() { q_.normalize(); }

bool Pose::is_approx(const Pose& other, double tol) const {
  const double rot_gap = 1.0 - std::abs(q_.dot(other.q_));
  return rot_gap < tol && (t_ - other.t_).norm() < tol;
}

}  // namespace subsplat::core
