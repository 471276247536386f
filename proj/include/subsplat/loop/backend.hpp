#pragma once

#include <optional>
#include <vector>

#include "subsplat/loop/covisibility.hpp"
#include "subsplat/loop/optimize.hpp"
#include "subsplat/sim/encoder.hpp"
#include "subsplat/splat/mapper.hpp"
#include "subsplat/track/tracker.hpp"

namespace subsplat::loop {

/// Runs the encoder on [first K frames of the matched submap] + [current
/// frame] and lifts the result into world coordinates anchored at the matched
/// submap's first frame. Returns nullopt when the encoder window is too short.
std::optional<track::Submap> build_loop_submap(const std::vector<sim::Frame>& matched_frames,
                                               const sim::Frame& current_frame,
                                               const core::Pose& anchor_pose,
                                               const core::DepthMap& anchor_depth,
                                               const core::Intrinsics& intr,
                                               const sim::CorruptionConfig& encoder_cfg,
                                               uint64_t window_key, int loop_submap_id);

struct PoseAdjustStats {
  int refined = 0;
  int skipped = 0;  // views with silhouette coverage below 1%
  double max_pose_change = 0.0;  // translation magnitude
};

/// Pose refinement of every view against the (transformed) map; poses are
/// updated in place.
PoseAdjustStats global_pose_adjust(const splat::SplatMap& map,
                                   std::vector<splat::RegisteredView*>& views,
                                   const core::Intrinsics& intr,
                                   const splat::LossWeights& weights, int iters,
                                   const splat::LearningRates& lrs = {});

struct GlobalBaOptions {
  int iters = 400;
  int densify_every = 200;
  int densify_stride = 2;
  double lambda_depth = 0.5;  // the global-BA depth weight
  bool exposure = true;
};

/// Global bundle adjustment: all views, photometric + inverted-depth +
/// depth-normal + rendered-normal losses, periodic densification.
splat::OptimizeStats global_bundle_adjust(splat::SplatMap& map,
                                          std::vector<splat::RegisteredView*>& views,
                                          const core::Intrinsics& intr,
                                          const splat::LossWeights& weights,
                                          const GlobalBaOptions& opts,
                                          const splat::LearningRates& lrs = {});

}  // namespace subsplat::loop
