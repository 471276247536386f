#pragma once

#include "subsplat/sim/features.hpp"

namespace subsplat::track {

struct KeyframeDecision {
  double overlap_ratio = 0.0;  // r in [0,1]
  bool is_keyframe = false;    // r < threshold
};

/// Patch-level overlap ratio between the current frame and the last keyframe:
/// the fraction of current patches whose best cosine similarity against all
/// last-keyframe patches exceeds beta. A new keyframe fires when r < threshold.
KeyframeDecision keyframe_overlap(const sim::FeatureMap& current, const sim::FeatureMap& last_kf,
                                  double beta = 0.7, double threshold = 0.7);

}  // namespace subsplat::track
