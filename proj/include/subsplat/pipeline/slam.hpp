#pragma once

#include <optional>
#include <string>
#include <vector>

#include "subsplat/loop/backend.hpp"
#include "subsplat/pipeline/buffer.hpp"
#include "subsplat/pipeline/config.hpp"
#include "subsplat/sim/rng.hpp"
#include "subsplat/sim/trajectory.hpp"
#include "subsplat/track/tracker.hpp"

namespace subsplat::pipeline {

struct LoopEvent {
  int frame_current = 0;
  int frame_matched = 0;
  double r_points = 0.0;
  double r_features = 0.0;
  double score = 0.0;
  bool accepted = false;
};

struct HeldoutRow {
  int keyframe_id = 0;
  double psnr_db = 0.0;
  double ssim = 0.0;
  bool skipped = false;  // no map coverage at this pose
};

struct StageTimes {
  double tracking_s = 0.0;
  double mapping_s = 0.0;
  double loop_s = 0.0;
  double gba_s = 0.0;
  double total_s = 0.0;
};

struct RunReport {
  // Trajectory (meters; Sim(3)-aligned unless stated otherwise)
  double ate_rmse_m = 0.0;
  std::string ate_alignment = "sim3";
  bool ate_skipped = false;
  std::string ate_skip_reason;

  // Surface error (meters, after trajectory-gauge alignment)
  double accuracy_m = 0.0;
  double completeness_m = 0.0;
  double chamfer_m = 0.0;
  bool surface_skipped = false;
  std::string surface_skip_reason;

  // Novel view synthesis on held-out keyframes
  std::vector<HeldoutRow> heldout;
  double heldout_psnr_median_db = 0.0;
  double heldout_ssim_median = 0.0;
  bool heldout_skipped = false;
  std::string heldout_skip_reason;
  // Same metric immediately before the final global bundle adjustment.
  std::optional<double> heldout_psnr_median_pre_gba_db;

  size_t keyframes = 0;
  size_t submaps = 0;
  size_t splat_count = 0;
  std::vector<LoopEvent> loop_events;
  StageTimes times;
};

struct SlamResult {
  RunReport report;
  std::vector<double> timestamps;          // per keyframe
  std::vector<core::Pose> estimated_poses; // per keyframe, final
  std::vector<core::Pose> gt_poses;        // per keyframe
  std::vector<splat::RegisteredView> views;
  splat::SplatMap map;
  std::vector<track::Submap> submaps;
  PipelineConfig config;
};

/// The full SLAM loop over a prepared frame sequence (Frames carry color,
/// depth for the encoder simulator, ground truth pose, and features).
class SlamPipeline {
 public:
  explicit SlamPipeline(const PipelineConfig& config);

  void feed(const sim::Frame& frame);
  SlamResult finish();

  const splat::SplatMap& map() const { return map_; }
  const std::vector<track::Submap>& submaps() const { return submaps_; }
  KeyframeBuffer& buffer() { return buffer_; }

 private:
  void complete_window(std::vector<sim::Frame> window);
  void process_submap(const std::vector<sim::Frame>& window);
  void handle_candidate(const loop::LoopCandidate& cand);
  void apply_submap_transforms(const loop::SubmapTransforms& transforms);
  void run_feedback(track::Submap& submap);
  void run_global_pose_adjust_and_feedback();
  void run_gba();
  std::vector<HeldoutRow> render_heldout() const;
  std::vector<splat::RegisteredView*> mapping_views(size_t submap_index);
  bool in_cooldown(const loop::LoopCandidate& cand) const;

  PipelineConfig cfg_;
  core::Intrinsics intr_;
  sim::Rng rng_;

  std::vector<sim::Frame> pending_;
  std::optional<sim::Frame> overlap_frame_;
  std::optional<sim::FeatureMap> last_kf_features_;

  std::vector<track::Submap> submaps_;
  KeyframeBuffer buffer_;
  std::vector<sim::Frame> kf_frames_;   // per keyframe, source frame
  std::vector<int> kf_submap_;          // per keyframe, origin submap id
  splat::SplatMap map_;
  loop::CovisibilityGraph graph_;
  std::vector<LoopEvent> loop_events_;
  std::vector<std::pair<int, int>> accepted_loops_;
  StageTimes times_;
  bool finished_ = false;
};

/// Renders the synthetic source described by the config and runs the pipeline.
SlamResult run_slam_synthetic(const PipelineConfig& config);

/// Runs the pipeline on a TUM RGB-D directory (depth images stand in for the
/// encoder depth; ground truth from groundtruth.txt).
SlamResult run_slam_tum(const PipelineConfig& config, const std::string& directory);

/// Runs the pipeline over explicit frames (the synthetic and TUM paths both
/// funnel through this).
SlamResult run_slam_frames(const PipelineConfig& config, const std::vector<sim::Frame>& frames);

}  // namespace subsplat::pipeline
