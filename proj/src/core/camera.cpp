#include "subsplat/core/camera.hpp"

#include <cmath>
#include <stdexcept>

namespace subsplat::core {

size_t DepthMap::count_valid() const {
  size_t n = 0;
  for (uint8_t v : valid.data()) n += (v != 0);
  return n;
}

size_t PointMap::count_valid() const {
  size_t n = 0;
  for (uint8_t v : valid.data()) n += (v != 0);
  return n;
}

PointMap unproject(const DepthMap& depth, const Intrinsics& intr, const Pose& pose) {
  if (!depth.value.same_size(intr.width, intr.height))
    throw std::invalid_argument("unproject: depth/intrinsics dimension mismatch");
  PointMap out(depth.width(), depth.height());
  const Eigen::Matrix3d rot = pose.rotation();
  const Eigen::Vector3d& trans = pose.translation();
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      if (!depth.valid.at(x, y)) continue;
      const double d = depth.value.at(x, y);
      const Eigen::Vector3d p_cam(d * (x - intr.cx) / intr.fx, d * (y - intr.cy) / intr.fy, d);
      out.point.at(x, y) = rot * p_cam + trans;
      out.valid.at(x, y) = 1;
    }
  }
  return out;
}

Projection project(const PointMap& points, const Intrinsics& intr, const Pose& pose) {
  Projection out;
  out.pixel = Image<Eigen::Vector2d>(points.width(), points.height(), Eigen::Vector2d::Zero());
  out.depth = GrayImage(points.width(), points.height(), 0.0);
  out.valid = Mask(points.width(), points.height(), uint8_t{0});
  const Pose world_to_cam = pose.inverse();
  const Eigen::Matrix3d rot = world_to_cam.rotation();
  const Eigen::Vector3d& trans = world_to_cam.translation();
  for (size_t i = 0; i < points.point.size(); ++i) {
    if (!points.valid[i]) continue;
    const Eigen::Vector3d p_cam = rot * points.point[i] + trans;
    if (p_cam.z() <= kBehindCameraEps) continue;
    out.pixel[i] = Eigen::Vector2d(intr.fx * p_cam.x() / p_cam.z() + intr.cx,
                                   intr.fy * p_cam.y() / p_cam.z() + intr.cy);
    out.depth[i] = p_cam.z();
    out.valid[i] = 1;
  }
  return out;
}

NormalMap depth_to_normal(const DepthMap& depth, const Intrinsics& intr) {
  NormalMap out(depth.width(), depth.height());
  // Camera-frame points; pose plays no role in the normal direction convention.
  const PointMap pts = unproject(depth, intr, Pose::identity());
  for (int y = 1; y + 1 < depth.height(); ++y) {
    for (int x = 1; x + 1 < depth.width(); ++x) {
      bool ok = true;
      for (int dy = -1; dy <= 1 && ok; ++dy)
        for (int dx = -1; dx <= 1 && ok; ++dx) ok = depth.valid.at(x + dx, y + dy) != 0;
      if (!ok) continue;
      const Eigen::Vector3d tu = pts.point.at(x + 1, y) - pts.point.at(x - 1, y);
      const Eigen::Vector3d tv = pts.point.at(x, y + 1) - pts.point.at(x, y - 1);
      Eigen::Vector3d n = tu.cross(tv);
      const double len = n.norm();
      if (len < 1e-15) continue;
      n /= len;
      if (n.z() > 0.0) n = -n;  // toward the camera
      out.normal.at(x, y) = n;
      out.valid.at(x, y) = 1;
    }
  }
  return out;
}

}  // namespace subsplat::core
