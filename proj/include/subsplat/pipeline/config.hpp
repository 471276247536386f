#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "subsplat/core/intrinsics.hpp"
#include "subsplat/sim/encoder.hpp"
#include "subsplat/splat/mapper.hpp"

namespace subsplat::pipeline {

/// Stage switches mirroring the ablation rows: `loop_s` is the point-based
/// loop correction alone; `loop` additionally transforms the splat map and
/// runs the global pose adjustment.
struct AblationFlags {
  bool loop = true;
  bool loop_s = true;
  bool intra = true;
  bool mapper = true;
  bool gba = true;
};

struct PipelineConfig {
  // Submap assembly
  int submap_size = 6;  // K: new keyframes per submap (window length K+1)
  double keyframe_beta = 0.7;
  double keyframe_threshold = 0.7;

  // Loop detection / closure
  double covisibility_threshold = 0.3;
  double loop_weight_points = 0.7;
  double loop_weight_features = 0.3;
  double loop_score_threshold = 0.5;
  int loop_temporal_distance = 10;
  int loop_cooldown = 20;
  int loop_max_iters = 1000;
  double loop_lr = 0.005;

  // Mapper
  splat::LossWeights weights;       // lambda_D = 5 for the map update
  double lambda_depth_gba = 0.5;
  splat::LearningRates rates;
  int intra_iters = 50;
  int window_ba_iters = 20;
  int window_extra_views = 4;       // W = (K+1) + this many random past views
  int gba_iters = 400;
  int densify_every = 200;          // inside global BA
  int densify_stride = 2;
  bool exposure_in_gba = true;

  // Evaluation / orchestration
  int heldout_every = 8;            // every 8th keyframe withheld from mapping
  AblationFlags ablation;
  uint64_t seed = 1;
  bool deterministic = true;

  // Synthetic source (used when the run is driven by the simulator)
  std::string scene_kind = "room";
  std::string trajectory_kind = "orbit";
  int n_frames = 48;
  int image_width = 64;
  int image_height = 48;
  double focal = 55.0;
  double trajectory_radius = 1.6;
  sim::CorruptionConfig corruption;

  core::Intrinsics intrinsics() const {
    return core::Intrinsics(focal, focal, image_width / 2.0, image_height / 2.0, image_width,
                            image_height);
  }

  /// Rejects out-of-range thresholds and inconsistent stage flags
  /// (mapper off forces intra, gba, and full loop off).
  void validate() const;
  void normalize_flags();

  /// Flat key=value text file; '#' comments. Unknown keys are rejected.
  static PipelineConfig load(const std::string& path);
  void save(const std::string& path) const;
  std::map<std::string, std::string> to_key_values() const;
  void set_key_value(const std::string& key, const std::string& value);
};

}  // namespace subsplat::pipeline
