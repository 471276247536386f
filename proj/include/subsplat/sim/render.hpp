#pragma once

#include "subsplat/core/camera.hpp"
#include "subsplat/core/image.hpp"
#include "subsplat/core/intrinsics.hpp"
#include "subsplat/core/pose.hpp"
#include "subsplat/sim/features.hpp"
#include "subsplat/sim/scene.hpp"

namespace subsplat::sim {

struct Frame {
  int index = 0;
  double timestamp = 0.0;
  core::ColorImage color;
  core::DepthMap gt_depth;
  core::Pose gt_pose;
  FeatureMap features;
};

struct ShadingOptions {
  bool lambert = true;        // fixed-light diffuse shading
  bool texture = true;        // procedural world-space albedo modulation
  double exposure_gain = 1.0; // uniform gain applied to the final color
};

/// Exact per-pixel ray cast of the scene. Pixels that hit nothing keep an
/// invalid depth and the background color (black).
Frame render_ground_truth(const SyntheticScene& scene, const core::Pose& pose,
                          const core::Intrinsics& intr, const ShadingOptions& opts = {});

}  // namespace subsplat::sim
