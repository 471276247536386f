#include "subsplat/sim/encoder.hpp"

#include <cmath>
#include <stdexcept>

#include "subsplat/sim/rng.hpp"

namespace subsplat::sim {

void CorruptionConfig::validate() const {
  if (scale_sigma < 0.0 || pose_drift_rot < 0.0 || pose_drift_trans < 0.0 ||
      depth_noise_rel < 0.0)
    throw std::invalid_argument("CorruptionConfig: sigmas must be nonnegative");
  if (dropout < 0.0 || dropout > 1.0)
    throw std::invalid_argument("CorruptionConfig: dropout must be in [0,1]");
}

LocalSubmapOutput simulate_encoder(const std::vector<Frame>& window, const core::Intrinsics& intr,
                                   const CorruptionConfig& cfg, uint64_t window_key) {
  cfg.validate();
  if (window.size() < 2)
    throw std::invalid_argument("simulate_encoder: window must hold at least 2 frames");

  Rng rng = Rng(cfg.seed).fork(window_key);
  LocalSubmapOutput out;
  out.injected_scale = cfg.scale_sigma > 0.0 ? rng.lognormal(0.0, cfg.scale_sigma) : 1.0;

  const core::Pose world_from_frame0 = window.front().gt_pose;
  const core::Pose frame0_from_world = world_from_frame0.inverse();

  core::Pose drift;  // identity for frame 0; compounds along the window
  for (size_t j = 0; j < window.size(); ++j) {
    const Frame& frame = window[j];
    out.frame_indices.push_back(frame.index);

    if (j > 0 && (cfg.pose_drift_rot > 0.0 || cfg.pose_drift_trans > 0.0)) {
      const Eigen::Vector3d d_rot(rng.normal(0.0, cfg.pose_drift_rot),
                                  rng.normal(0.0, cfg.pose_drift_rot),
                                  rng.normal(0.0, cfg.pose_drift_rot));
      const Eigen::Vector3d d_trans(rng.normal(0.0, cfg.pose_drift_trans),
                                    rng.normal(0.0, cfg.pose_drift_trans),
                                    rng.normal(0.0, cfg.pose_drift_trans));
      drift = drift.right_update(d_rot, d_trans);
    }

    // Local pose: ground-truth relative pose, drift-perturbed; the window
    // scale multiplies its translation the same way it scales the geometry.
    core::Pose local = frame0_from_world * frame.gt_pose;
    if (j > 0) local = local * drift;
    local.translation() *= out.injected_scale;
    out.local_poses.push_back(local);

    core::DepthMap depth = frame.gt_depth;
    for (size_t i = 0; i < depth.value.size(); ++i) {
      if (!depth.valid[i]) continue;
      if (cfg.dropout > 0.0 && rng.uniform() < cfg.dropout) {
        depth.valid[i] = 0;
        continue;
      }
      if (cfg.depth_noise_rel > 0.0) {
        const double factor = std::max(1.0 + rng.normal(0.0, cfg.depth_noise_rel), 1e-3);
        depth.value[i] *= factor;
      }
      depth.value[i] *= out.injected_scale;
    }
    out.depths.push_back(depth);
    out.self_points.push_back(core::unproject(depth, intr, core::Pose::identity()));
  }
  return out;
}

}  // namespace subsplat::sim
