#pragma once

#include <Eigen/Core>
#include <functional>

#include "subsplat/core/camera.hpp"
#include "subsplat/core/pose.hpp"
#include "subsplat/sim/rng.hpp"
#include "subsplat/splat/types.hpp"

namespace testutil {

using subsplat::core::DepthMap;
using subsplat::core::Intrinsics;
using subsplat::core::Pose;

inline Pose random_pose(subsplat::sim::Rng& rng, double rot_scale = 1.0,
                        double trans_scale = 1.0) {
  const Eigen::Vector3d axis(rng.normal(), rng.normal(), rng.normal());
  const Eigen::Vector3d t(rng.normal(0.0, trans_scale), rng.normal(0.0, trans_scale),
                          rng.normal(0.0, trans_scale));
  return Pose(subsplat::core::so3_exp(rot_scale * axis.normalized() * rng.uniform(0.0, 1.0)), t);
}

inline DepthMap random_depth(subsplat::sim::Rng& rng, int w, int h, double lo = 0.5,
                             double hi = 3.0) {
  DepthMap d(w, h);
  for (size_t i = 0; i < d.value.size(); ++i) {
    d.value[i] = rng.uniform(lo, hi);
    d.valid[i] = 1;
  }
  return d;
}

/// Small random splat scene for gradient checks: opacities and footprints
/// kept away from clamping boundaries.
inline subsplat::splat::SplatMap random_splats(subsplat::sim::Rng& rng, int count,
                                               double z_near = 0.8, double z_far = 2.5) {
  subsplat::splat::SplatMap map;
  for (int i = 0; i < count; ++i) {
    subsplat::splat::Splat s;
    s.position = Eigen::Vector3d(rng.uniform(-0.5, 0.5), rng.uniform(-0.4, 0.4),
                                 rng.uniform(z_near, z_far));
    const Eigen::Vector3d axis(rng.normal(), rng.normal(), rng.normal());
    s.rotation = subsplat::core::so3_exp(axis.normalized() * rng.uniform(0.0, 1.5));
    s.scale = Eigen::Vector3d(rng.uniform(0.05, 0.2), rng.uniform(0.05, 0.2),
                              rng.uniform(0.02, 0.08));
    s.opacity = rng.uniform(0.35, 0.85);
    s.color = Eigen::Vector3d(rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9));
    s.origin_submap = 0;
    map.add(s);
  }
  return map;
}

/// Central finite difference of a scalar function.
inline double central_difference(const std::function<double(double)>& f, double x0,
                                 double step = 1e-4) {
  return (f(x0 + step) - f(x0 - step)) / (2.0 * step);
}

/// Relative gradient error |analytic - fd| / max(|fd|, floor).
inline double rel_error(double analytic, double fd, double floor = 1e-7) {
  return std::abs(analytic - fd) / std::max(std::abs(fd), floor);
}

}  // namespace testutil
