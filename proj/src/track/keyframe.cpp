#include "subsplat/track/keyframe.hpp"

#include <stdexcept>

namespace subsplat::track {

KeyframeDecision keyframe_overlap(const sim::FeatureMap& current, const sim::FeatureMap& last_kf,
                                  double beta, double threshold) {
  if (!current.same_grid(last_kf))
    throw std::invalid_argument("keyframe_overlap: patch grid mismatch");
  if (current.count() == 0) throw std::invalid_argument("keyframe_overlap: empty feature map");

  int matched = 0;
  for (const Eigen::VectorXd& cur : current.descriptors) {
    double best = -1.0;
    for (const Eigen::VectorXd& ref : last_kf.descriptors)
      best = std::max(best, cur.dot(ref));  // descriptors are unit norm
    if (best > beta) ++matched;
  }
  KeyframeDecision d;
  d.overlap_ratio = double(matched) / double(current.count());
  d.is_keyframe = d.overlap_ratio < threshold;
  return d;
}

}  // namespace subsplat::track
