#include "subsplat/sim/render.hpp"

#include <cmath>

namespace subsplat::sim {

namespace {

const Eigen::Vector3d kLightDir = Eigen::Vector3d(0.35, 0.25, 0.9).normalized();

// Smooth two-octave world-space pattern in [0,1]; gives the photometric
// losses texture to lock onto without aliasing at coarse resolutions.
double texture_value(const Eigen::Vector3d& p) {
  const double a =
      std::sin(5.3 * p.x() + 1.1) * std::sin(4.7 * p.y() + 0.7) * std::sin(5.9 * p.z() + 1.7);
  const double b =
      std::sin(11.1 * p.x() + 0.3) * std::sin(9.7 * p.y() + 2.1) * std::sin(10.3 * p.z() + 0.9);
  return 0.5 + 0.35 * a + 0.15 * b;
}

}  // namespace

Frame render_ground_truth(const SyntheticScene& scene, const core::Pose& pose,
                          const core::Intrinsics& intr, const ShadingOptions& opts) {
  Frame frame;
  frame.color = core::ColorImage(intr.width, intr.height, Eigen::Vector3d::Zero());
  frame.gt_depth = core::DepthMap(intr.width, intr.height);
  frame.gt_pose = pose;

  const Eigen::Matrix3d rot = pose.rotation();
  const Eigen::Vector3d origin = pose.translation();
  for (int y = 0; y < intr.height; ++y) {
    for (int x = 0; x < intr.width; ++x) {
      // Unit-z camera ray: the hit parameter is the z-depth directly.
      const Eigen::Vector3d dir_cam((x - intr.cx) / intr.fx, (y - intr.cy) / intr.fy, 1.0);
      const Eigen::Vector3d dir = rot * dir_cam;
      const auto hit = scene.raycast(origin, dir);
      if (!hit) continue;
      frame.gt_depth.value.at(x, y) = hit->t;
      frame.gt_depth.valid.at(x, y) = 1;

      Eigen::Vector3d c = hit->primitive->albedo;
      double shade = 1.0;
      if (opts.lambert) shade = 0.45 + 0.55 * std::max(0.0, hit->normal.dot(kLightDir));
      if (opts.texture) shade *= 0.6 + 0.4 * texture_value(hit->point);
      c *= shade * opts.exposure_gain;
      frame.color.at(x, y) = c.cwiseMin(1.0).cwiseMax(0.0);
    }
  }
  frame.features = patch_features(frame.color, frame.gt_depth, intr);
  return frame;
}

}  // namespace subsplat::sim
