#include "subsplat/loop/backend.hpp"

#include <cmath>

namespace subsplat::loop {

std::optional<track::Submap> build_loop_submap(const std::vector<sim::Frame>& matched_frames,
                                               const sim::Frame& current_frame,
                                               const core::Pose& anchor_pose,
                                               const core::DepthMap& anchor_depth,
                                               const core::Intrinsics& intr,
                                               const sim::CorruptionConfig& encoder_cfg,
                                               uint64_t window_key, int loop_submap_id) {
  if (matched_frames.empty()) return std::nullopt;
  std::vector<sim::Frame> window = matched_frames;
  window.push_back(current_frame);
  try {
    const sim::LocalSubmapOutput local = simulate_encoder(window, intr, encoder_cfg, window_key);
    return track::register_submap_at(anchor_pose, anchor_depth, loop_submap_id, local, intr);
  } catch (const std::exception&) {
    return std::nullopt;  // encoder failure: the loop is skipped upstream
  }
}

PoseAdjustStats global_pose_adjust(const splat::SplatMap& map,
                                   std::vector<splat::RegisteredView*>& views,
                                   const core::Intrinsics& intr,
                                   const splat::LossWeights& weights, int iters,
                                   const splat::LearningRates& lrs) {
  PoseAdjustStats stats;
  for (splat::RegisteredView* view : views) {
    splat::ViewObservation obs{view->color, view->depth, view->pose};
    const splat::PoseRefineResult res =
        splat::refine_pose_intra(map, obs, intr, weights, iters, lrs);
    if (res.skipped) {
      ++stats.skipped;
      continue;
    }
    stats.max_pose_change =
        std::max(stats.max_pose_change,
                 (res.pose.translation() - view->pose.translation()).norm());
    view->pose = res.pose;
    ++stats.refined;
  }
  return stats;
}

splat::OptimizeStats global_bundle_adjust(splat::SplatMap& map,
                                          std::vector<splat::RegisteredView*>& views,
                                          const core::Intrinsics& intr,
                                          const splat::LossWeights& weights,
                                          const GlobalBaOptions& opts,
                                          const splat::LearningRates& lrs) {
  splat::OptimizeOptions o;
  o.iters = opts.iters;
  o.lambda_depth = opts.lambda_depth;
  o.use_normal_loss = true;
  o.use_scale_reg = false;
  o.exposure = opts.exposure;
  o.densify_every = opts.densify_every;
  o.densify_stride = opts.densify_stride;
  return splat::optimize_map(map, views, intr, weights, o, lrs);
}

}  // namespace subsplat::loop
