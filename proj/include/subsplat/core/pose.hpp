#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace subsplat::core {

// Rotation part of an SO(3) exponential. Safe for small angles.
Eigen::Quaterniond so3_exp(const Eigen::Vector3d& omega);

// Inverse of so3_exp. Returns the rotation vector with angle in [0, pi].
Eigen::Vector3d so3_log(const Eigen::Quaterniond& q);

/// Rigid SE(3) transform stored as unit quaternion + translation (meters).
/// Composition and point action follow the usual convention:
/// p' = R p + t, (A*B) p = A (B p).
class Pose {
 public:
  Pose() : q_(Eigen::Quaterniond::Identity()), t_(Eigen::Vector3d::Zero()) {}
  Pose(const Eigen::Quaterniond& q, const Eigen::Vector3d& t) : q_(q.normalized()), t_(t) {}

  static Pose identity() { return Pose(); }
  static Pose from_rt(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation);
  static Pose from_matrix(const Eigen::Matrix4d& transform);

  const Eigen::Quaterniond& quaternion() const { return q_; }
  const Eigen::Vector3d& translation() const { return t_; }
  Eigen::Vector3d& translation() { return t_; }
  Eigen::Matrix3d rotation() const { return q_.toRotationMatrix(); }
  Eigen::Matrix4d matrix() const;

  Pose inverse() const;
  Pose operator*(const Pose& other) const;
  Eigen::Vector3d operator*(const Eigen::Vector3d& point) const { return q_ * point + t_; }

  /// this * [exp(d_rot), d_trans] — body-frame increment, used by pose optimizers.
  Pose right_update(const Eigen::Vector3d& d_rot, const Eigen::Vector3d& d_trans) const;
  /// [exp(d_rot), d_trans] * this — world-frame increment, used by submap transforms.
  Pose left_update(const Eigen::Vector3d& d_rot, const Eigen::Vector3d& d_trans) const;

  /// Re-unitizes the quaternion; called after every optimizer update.
  void renormalize();

  bool is_approx(const Pose& other, double tol = 1e-9) const;

 private:
  Eigen::Quaterniond q_;
  Eigen::Vector3d t_;
};

/// Similarity alignment result: dst ~= scale * (R src) + t.
struct Sim3Alignment {
  double scale = 1.0;
  Pose pose;

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const {
    return pose.quaternion() * (scale * p) + pose.translation();
  }
};

}  // namespace subsplat::core
