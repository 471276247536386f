#pragma once

#include <vector>

#include "subsplat/core/pose.hpp"
#include "subsplat/splat/types.hpp"
#include "subsplat/track/tracker.hpp"

namespace subsplat::loop {

/// One rigid transform per submap; index 0 is pinned to the identity (gauge).
struct SubmapTransforms {
  std::vector<core::Pose> transforms;

  const core::Pose& of(int submap_id) const { return transforms.at(size_t(submap_id)); }
};

/// Residual block tying two submaps through paired 3D points:
/// r_k = T_a(points_a[k]) - T_b(points_b[k]).
struct PointPairBlock {
  int submap_a = 0;
  int submap_b = 0;
  std::vector<Eigen::Vector3d> points_a;
  std::vector<Eigen::Vector3d> points_b;
};

/// Pairs the jointly valid pixels of two world point maps of the same frame,
/// uniformly subsampled to at most `max_points`.
PointPairBlock make_point_block(int submap_a, int submap_b, const core::PointMap& map_a,
                                const core::PointMap& map_b, size_t max_points = 2000);

/// Adjacency blocks for a submap chain: overlap frame world points as stored
/// by submap t-1 (last frame) and submap t (first frame).
std::vector<PointPairBlock> adjacency_blocks(const std::vector<track::Submap>& submaps,
                                             size_t max_points = 2000);

struct LoopOptimizeOptions {
  int max_iters = 1000;
  double fallback_lr = 0.005;  // gradient-descent fallback step
  double rel_tol = 1e-9;
  std::vector<core::Pose> init;  // optional warm start; index 0 must stay identity
};

struct LoopOptimizeResult {
  SubmapTransforms transforms;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  int iterations = 0;
  bool used_gd_fallback = false;
};

/// Joint rigid alignment of all submaps: minimizes the summed squared point
/// distances over per-submap SE(3) transforms with transform 0 fixed.
/// Levenberg-Marquardt on the pose tangents, gradient-descent fallback when
/// damping saturates.
LoopOptimizeResult optimize_loop(int n_submaps, const std::vector<PointPairBlock>& blocks,
                                 const LoopOptimizeOptions& opts = {});

/// Moves every splat by its origin submap's transform (Eq-9-style update):
/// position mapped through T, orientation premultiplied by T's rotation.
void apply_transforms_to_map(splat::SplatMap& map, const SubmapTransforms& transforms);

}  // namespace subsplat::loop
