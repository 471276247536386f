#pragma once

#include <optional>
#include <vector>

#include "subsplat/core/camera.hpp"
#include "subsplat/sim/encoder.hpp"

namespace subsplat::track {

/// A registered submap: K+1 frames in world coordinates, where frame 0
/// duplicates the previous submap's last frame.
struct Submap {
  int id = 0;
  std::vector<int> frame_indices;           // source frame ids, size K+1
  std::vector<int> keyframe_ids;            // keyframe-buffer ids, size K+1
  std::vector<core::Pose> world_poses;      // camera-to-world
  std::vector<core::PointMap> world_points;
  std::vector<core::DepthMap> depths;       // registered (scale-corrected) depths
  double scale_factor = 1.0;                // s_i applied at registration
  bool scale_fallback = false;              // too few overlap pixels, s_i forced to 1

  size_t size() const { return world_poses.size(); }
  const core::Pose& anchor_pose() const { return world_poses.back(); }
  const core::DepthMap& anchor_depth() const { return depths.back(); }
};

struct ScaleFactor {
  double value = 1.0;
  bool fallback = false;  // fewer than the required jointly-valid pixels
};

/// Inter-submap scale correction: exp of the trimmed mean (2% per tail) of
/// log(prev) - log(cur) over jointly valid pixels of the shared overlap frame.
/// Falls back to 1 when fewer than `min_pixels` pixels are jointly valid.
ScaleFactor compute_scale_factor(const core::DepthMap& prev_tail_depth,
                                 const core::DepthMap& cur_head_depth, size_t min_pixels = 100);

/// Anchors the first submap: world frame is frame (0,0), scale 1.
Submap bootstrap_first_submap(const sim::LocalSubmapOutput& local, const core::Intrinsics& intr);

/// Optimization-free inter-submap registration. Lifts encoder-local poses and
/// point maps into world coordinates through the shared overlap frame:
///   T_world[j] = anchor * rel(j),  rel(j) = inv(local[0]) * local[j]
/// with rel's translation and the point maps rescaled by the recovered scale
/// factor, so the chain stays in the gauge fixed by the first submap.
Submap register_submap(const Submap& prev, const sim::LocalSubmapOutput& local,
                       const core::Intrinsics& intr);

/// Same lift as register_submap, but anchored at an arbitrary (pose, depth)
/// pair; used for loop submaps anchored at the matched frame.
Submap register_submap_at(const core::Pose& anchor_pose, const core::DepthMap& anchor_depth,
                          int next_id, const sim::LocalSubmapOutput& local,
                          const core::Intrinsics& intr);

/// Map-refined replacement values for every frame of a submap (Eq-7-style
/// feedback: updated world poses and depths; point maps are reprojected).
struct SubmapFeedback {
  std::vector<core::Pose> poses;
  std::vector<core::DepthMap> depths;
};

/// Replaces the submap's poses, depths, and point maps. The submap's last
/// frame then anchors the next registration.
void apply_feedback(Submap& submap, const SubmapFeedback& updated, const core::Intrinsics& intr);

}  // namespace subsplat::track
