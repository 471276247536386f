#pragma once

#include <cstdint>
#include <vector>

#include "subsplat/core/camera.hpp"
#include "subsplat/sim/render.hpp"

namespace subsplat::sim {

/// Error model for the simulated 3D encoder. All sigmas at zero reproduces
/// ground truth exactly (in frame-0 coordinates).
struct CorruptionConfig {
  double scale_sigma = 0.0;       // lognormal sigma of the per-window scale
  double pose_drift_rot = 0.0;    // per-frame rotation random walk (rad)
  double pose_drift_trans = 0.0;  // per-frame translation random walk (m)
  double depth_noise_rel = 0.0;   // multiplicative per-pixel depth noise
  double dropout = 0.0;           // probability a pixel becomes invalid
  uint64_t seed = 0;

  void validate() const;
};

/// What the sequential 3D encoder hands back for one submap window:
/// per-frame point maps in each frame's own camera coordinates, plus local
/// camera poses with frame 0 fixed to the identity. A single scale factor
/// (unknown to consumers, recorded here for test oracles) multiplies both
/// the point maps and the local pose translations.
struct LocalSubmapOutput {
  std::vector<core::PointMap> self_points;  // camera-frame points, one map per frame
  std::vector<core::DepthMap> depths;       // z of self_points (what Eq. 2 compares)
  std::vector<core::Pose> local_poses;      // frame 0 is identity
  std::vector<int> frame_indices;
  double injected_scale = 1.0;  // simulator bookkeeping, not visible to the tracker

  size_t size() const { return local_poses.size(); }
};

/// Simulates the sequential 3D encoder on a window of K+1 frames.
/// `window_key` seeds the per-window corruption stream so output depends only
/// on (cfg.seed, window_key, frames), not on call order.
LocalSubmapOutput simulate_encoder(const std::vector<Frame>& window, const core::Intrinsics& intr,
                                   const CorruptionConfig& cfg, uint64_t window_key);

}  // namespace subsplat::sim
