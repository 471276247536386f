#include "subsplat/track/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace subsplat::track {

ScaleFactor compute_scale_factor(const core::DepthMap& prev_tail_depth,
                                 const core::DepthMap& cur_head_depth, size_t min_pixels) {
  if (!prev_tail_depth.value.same_size(cur_head_depth.value))
    throw std::invalid_argument("compute_scale_factor: depth dimension mismatch");

  std::vector<double> log_ratios;
  log_ratios.reserve(prev_tail_depth.value.size());
  for (size_t i = 0; i < prev_tail_depth.value.size(); ++i) {
    if (!prev_tail_depth.valid[i] || !cur_head_depth.valid[i]) continue;
    log_ratios.push_back(std::log(prev_tail_depth.value[i]) - std::log(cur_head_depth.value[i]));
  }
  ScaleFactor out;
  if (log_ratios.size() < min_pixels) {
    out.fallback = true;
    return out;
  }
  // Trimmed mean of the log ratios: ML scale under lognormal noise, with the
  // 2% tails discarded against outliers.
  std::sort(log_ratios.begin(), log_ratios.end());
  const size_t trim = size_t(0.02 * double(log_ratios.size()));
  double sum = 0.0;
  for (size_t i = trim; i < log_ratios.size() - trim; ++i) sum += log_ratios[i];
  out.value = std::exp(sum / double(log_ratios.size() - 2 * trim));
  return out;
}

namespace {

core::DepthMap scaled_depth(const core::DepthMap& depth, double s) {
  core::DepthMap out = depth;
  for (size_t i = 0; i < out.value.size(); ++i)
    if (out.valid[i]) out.value[i] *= s;
  return out;
}

// World lift shared by chain and loop registration.
Submap lift_local(const core::Pose& anchor_pose, const ScaleFactor& scale, int id,
                  const sim::LocalSubmapOutput& local, const core::Intrinsics& intr) {
  Submap out;
  out.id = id;
  out.frame_indices = local.frame_indices;
  out.scale_factor = scale.value;
  out.scale_fallback = scale.fallback;

  // Encoder contract: local pose 0 is identity. Renormalize so the relative
  // pose below is exact even if a caller hands in an unnormalized window.
  const core::Pose local0_inv = local.local_poses.front().inverse();
  for (size_t j = 0; j < local.size(); ++j) {
    core::Pose rel = local0_inv * local.local_poses[j];
    rel.translation() *= scale.value;  // keep pose offsets in the chain gauge
    const core::Pose world_pose = anchor_pose * rel;
    out.world_poses.push_back(world_pose);
    out.depths.push_back(scaled_depth(local.depths[j], scale.value));
    out.world_points.push_back(core::unproject(out.depths.back(), intr, world_pose));
  }
  return out;
}

}  // namespace

Submap bootstrap_first_submap(const sim::LocalSubmapOutput& local, const core::Intrinsics& intr) {
  return lift_local(core::Pose::identity(), ScaleFactor{}, 0, local, intr);
}

Submap register_submap(const Submap& prev, const sim::LocalSubmapOutput& local,
                       const core::Intrinsics& intr) {
  if (local.size() < 2) throw std::invalid_argument("register_submap: window too short");
  const ScaleFactor s = compute_scale_factor(prev.anchor_depth(), local.depths.front());
  return lift_local(prev.anchor_pose(), s, prev.id + 1, local, intr);
}

Submap register_submap_at(const core::Pose& anchor_pose, const core::DepthMap& anchor_depth,
                          int next_id, const sim::LocalSubmapOutput& local,
                          const core::Intrinsics& intr) {
  if (local.size() < 2) throw std::invalid_argument("register_submap_at: window too short");
  const ScaleFactor s = compute_scale_factor(anchor_depth, local.depths.front());
  return lift_local(anchor_pose, s, next_id, local, intr);
}

void apply_feedback(Submap& submap, const SubmapFeedback& updated, const core::Intrinsics& intr) {
  if (updated.poses.size() != submap.size() || updated.depths.size() != submap.size())
    throw std::invalid_argument("apply_feedback: update must cover every frame of the submap");
  for (size_t j = 0; j < submap.size(); ++j) {
    submap.world_poses[j] = updated.poses[j];
    submap.depths[j] = updated.depths[j];
    submap.world_points[j] = core::unproject(updated.depths[j], intr, updated.poses[j]);
  }
}

}  // namespace subsplat::track
