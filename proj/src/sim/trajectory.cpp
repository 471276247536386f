#include "subsplat/sim/trajectory.hpp"

#include <cmath>
#include <stdexcept>

namespace subsplat::sim {

using core::Pose;

TrajectoryKind trajectory_kind_from_string(const std::string& name) {
  if (name == "orbit") return TrajectoryKind::kOrbit;
  if (name == "square_loop") return TrajectoryKind::kSquareLoop;
  if (name == "corridor_out_back") return TrajectoryKind::kCorridorOutBack;
  throw std::invalid_argument("unknown trajectory kind: " + name);
}

Pose look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target) {
  const Eigen::Vector3d forward = (target - eye).normalized();
  if (std::abs(forward.z()) > 0.999)
    throw std::invalid_argument("look_at: viewing direction too close to vertical");
  const Eigen::Vector3d down(0.0, 0.0, -1.0);
  const Eigen::Vector3d right = down.cross(forward).normalized();
  const Eigen::Vector3d cam_down = forward.cross(right);
  Eigen::Matrix3d rot;
  rot.col(0) = right;
  rot.col(1) = cam_down;
  rot.col(2) = forward;
  return Pose::from_rt(rot, eye);
}

namespace {

// Point and tangent on a CCW square of half-side r, arc-length parameter
// s in [0, 8r), starting at the corner (r, -r) heading +y.
void square_path(double s, double r, Eigen::Vector2d& pos, Eigen::Vector2d& tan) {
  const double side = 2.0 * r;
  const double seg = std::fmod(s, 8.0 * r) / side;  // [0, 4)
  const int edge = int(seg);
  const double t = seg - edge;
  switch (edge) {
    case 0:
      pos = {r, -r + side * t};
      tan = {0.0, 1.0};
      break;
    case 1:
      pos = {r - side * t, r};
      tan = {-1.0, 0.0};
      break;
    case 2:
      pos = {-r, r - side * t};
      tan = {0.0, -1.0};
      break;
    default:
      pos = {-r + side * t, -r};
      tan = {1.0, 0.0};
      break;
  }
}

}  // namespace

std::vector<Pose> generate_trajectory(TrajectoryKind kind, int n_frames,
                                      const Eigen::Vector3d& center, double radius) {
  if (n_frames < 2) throw std::invalid_argument("generate_trajectory: need >= 2 frames");
  std::vector<Pose> out;
  out.reserve(n_frames);
  const double eye_height = center.z() + 0.2;

  switch (kind) {
    case TrajectoryKind::kOrbit: {
      for (int i = 0; i < n_frames; ++i) {
        const double theta = 2.0 * M_PI * double(i) / double(n_frames);
        const Eigen::Vector3d eye = center + Eigen::Vector3d(radius * std::cos(theta),
                                                             radius * std::sin(theta), 0.2);
        out.push_back(look_at(eye, center));
      }
      break;
    }
    case TrajectoryKind::kSquareLoop: {
      // Path starts and ends at (r, -r) + half-side offset; the last frame
      // repeats the first exactly, closing a true loop.
      const double total = 8.0 * radius;
      for (int i = 0; i < n_frames; ++i) {
        const double s = total * double(i) / double(n_frames - 1);
        Eigen::Vector2d pos, tan;
        square_path(std::min(s, total * (1.0 - 1e-12)), radius, pos, tan);
        if (i == n_frames - 1) square_path(0.0, radius, pos, tan);
        const Eigen::Vector3d eye(center.x() + pos.x(), center.y() + pos.y(), eye_height);
        const Eigen::Vector3d target = eye + Eigen::Vector3d(tan.x(), tan.y(), -0.1);
        out.push_back(look_at(eye, target));
      }
      break;
    }
    case TrajectoryKind::kCorridorOutBack: {
      const int turn = n_frames / 2;
      const double length = 2.0 * radius;  // out distance
      for (int i = 0; i < n_frames; ++i) {
        double x;
        double heading;
        if (i <= turn) {
          x = center.x() - radius + length * double(i) / double(turn);
          heading = 1.0;
        } else {
          x = center.x() + radius - length * double(i - turn) / double(n_frames - 1 - turn);
          heading = -1.0;
        }
        const Eigen::Vector3d eye(x, center.y(), eye_height);
        const Eigen::Vector3d target = eye + Eigen::Vector3d(heading, 0.0, -0.1);
        out.push_back(look_at(eye, target));
      }
      break;
    }
  }
  return out;
}

}  // namespace subsplat::sim
