#pragma once

#include <optional>
#include <vector>

#include "subsplat/splat/losses.hpp"
#include "subsplat/splat/renderer.hpp"
#include "subsplat/splat/types.hpp"

namespace subsplat::splat {

/// Per-parameter-group step sizes (Adam).
struct LearningRates {
  double pose_rot = 0.001;
  double pose_trans = 0.005;
  double position = 0.0005;
  double color = 0.005;  // "feature" rate
  double opacity = 0.05;
  double scale = 0.001;
  double rotation = 0.001;
};

/// An incoming view before registration: observed color, tracker depth, and
/// the tracker's world pose estimate.
struct ViewObservation {
  core::ColorImage color;
  core::DepthMap depth;
  core::Pose pose;
};

struct PoseRefineResult {
  core::Pose pose;
  double coverage = 0.0;      // fraction of pixels with silhouette above threshold
  double initial_loss = 0.0;
  double final_loss = 0.0;
  int accepted_steps = 0;
  bool skipped = false;       // coverage below 1%, pose returned unchanged
};

/// Photometric + scale-invariant-depth pose refinement against the map
/// (rendered pixels only; empty regions are masked out). Adam on the 6-dof
/// body tangent with per-group rates and step rollback on loss increase;
/// returns the lowest-loss iterate, which may be the initialization.
PoseRefineResult refine_pose_intra(const SplatMap& map, const ViewObservation& view,
                                   const core::Intrinsics& intr, const LossWeights& weights,
                                   int iters, const LearningRates& lrs = {});

struct RescaleResult {
  core::DepthMap depth;   // scale-corrected view depth
  core::PointMap points;  // reprojected through the refined pose
  double factor = 1.0;
  bool empty_mask = false;  // no silhouette-valid overlap; depth returned unchanged
};

/// Depth update after pose refinement: a single multiplicative factor
/// exp(trimmed mean of log d_rendered - log d_view) over silhouette-valid
/// pixels, then reprojection with the refined pose.
RescaleResult rescale_and_reproject(const ViewObservation& view, const core::Pose& refined_pose,
                                    const RenderOutput& rendered, const core::Intrinsics& intr);

/// Adds surfels in previously uncovered regions (silhouette below threshold),
/// stride-subsampled. Isotropic radius = depth / fx * stride; surfel normals
/// follow the view's depth normals. Returns the new splat ids.
std::vector<uint64_t> densify(SplatMap& map, const RegisteredView& view,
                              const core::Intrinsics& intr, int stride = 2);

struct OptimizeOptions {
  int iters = 20;
  bool optimize_poses = true;
  bool use_normal_loss = false;   // global BA adds the rendered-normal term
  bool use_scale_reg = true;      // map update adds the anisotropy penalty
  bool exposure = false;          // fit/apply exposure before photometric terms
  int densify_every = 0;          // 0 disables periodic densification
  int densify_stride = 2;
  double lambda_depth = 5.0;
};

struct OptimizeStats {
  double initial_loss = 0.0;
  double final_loss = 0.0;
  int accepted = 0;
  int rejected = 0;
  size_t densified = 0;
  size_t pruned = 0;
};

/// Stochastic single-view bundle adjustment cycling `views`: each iteration
/// renders one view, steps the splat parameters (and that view's pose) with
/// Adam, and rolls the step back if the view loss did not decrease. Views are
/// updated in place. Transparent splats are pruned afterwards.
OptimizeStats optimize_map(SplatMap& map, std::vector<RegisteredView*>& views,
                           const core::Intrinsics& intr, const LossWeights& weights,
                           const OptimizeOptions& opts, const LearningRates& lrs = {});

/// Eq-6 map update over the rendering window (L_pho + depth + depth-normal +
/// scale regularizer).
OptimizeStats bundle_adjust_window(SplatMap& map, std::vector<RegisteredView*>& views,
                                   const core::Intrinsics& intr, const LossWeights& weights,
                                   int iters, const LearningRates& lrs = {});

struct ViewFeedback {
  int keyframe_id = 0;
  core::Pose pose;
  core::DepthMap depth;
  core::PointMap points;
  double factor = 1.0;
};

/// Map-to-tracker feedback: per view, depth rescaled by the rendered/view
/// log-ratio and reprojected through the current (optimized) pose.
std::vector<ViewFeedback> feedback_views(const SplatMap& map,
                                         const std::vector<const RegisteredView*>& views,
                                         const core::Intrinsics& intr);

struct ExposureFit {
  Eigen::Matrix3d gain = Eigen::Matrix3d::Identity();
  Eigen::Vector3d bias = Eigen::Vector3d::Zero();
  bool degenerate = false;  // rank-deficient fit, identity/zero returned
};

/// Closed-form least squares for observed ~= gain * rendered + bias over
/// masked pixels. Needs at least 12 valid pixels.
ExposureFit fit_exposure(const core::ColorImage& rendered, const core::ColorImage& observed,
                         const core::Mask& mask);

core::ColorImage apply_exposure(const core::ColorImage& image, const ExposureFit& fit);

}  // namespace subsplat::splat
