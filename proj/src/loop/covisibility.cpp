#include "subsplat/loop/covisibility.hpp"

#include <cmath>

#include "subsplat/core/camera.hpp"
#include "subsplat/track/keyframe.hpp"

namespace subsplat::loop {

const std::map<int, double> CovisibilityGraph::kEmpty;

void CovisibilityGraph::add_edge(int a, int b, double overlap) {
  adjacency_[a][b] = overlap;
  adjacency_[b][a] = overlap;
}

bool CovisibilityGraph::has_edge(int a, int b) const {
  auto it = adjacency_.find(a);
  return it != adjacency_.end() && it->second.count(b) > 0;
}

double CovisibilityGraph::edge_weight(int a, int b) const {
  auto it = adjacency_.find(a);
  if (it == adjacency_.end()) return 0.0;
  auto jt = it->second.find(b);
  return jt == it->second.end() ? 0.0 : jt->second;
}

const std::map<int, double>& CovisibilityGraph::neighbors(int keyframe_id) const {
  auto it = adjacency_.find(keyframe_id);
  return it == adjacency_.end() ? kEmpty : it->second;
}

double reprojection_overlap(const splat::RegisteredView& source,
                            const splat::RegisteredView& target, const core::Intrinsics& intr,
                            int stride) {
  const core::Pose target_from_world = target.pose.inverse();
  const Eigen::Matrix3d rot = target_from_world.rotation();
  const Eigen::Vector3d trans = target_from_world.translation();

  size_t total = 0, inside = 0;
  for (int y = 0; y < source.points.height(); y += stride) {
    for (int x = 0; x < source.points.width(); x += stride) {
      if (!source.points.valid.at(x, y)) continue;
      ++total;
      const Eigen::Vector3d p = rot * source.points.point.at(x, y) + trans;
      if (p.z() <= core::kBehindCameraEps) continue;
      const int u = int(std::lround(intr.fx * p.x() / p.z() + intr.cx));
      const int v = int(std::lround(intr.fy * p.y() / p.z() + intr.cy));
      if (u < 0 || u >= intr.width || v < 0 || v >= intr.height) continue;
      if (!target.depth.valid.at(u, v)) continue;
      const double d_target = target.depth.value.at(u, v);
      if (std::abs(p.z() - d_target) <= 0.1 * d_target) ++inside;
    }
  }
  return total == 0 ? 0.0 : double(inside) / double(total);
}

void covisibility_update(CovisibilityGraph& graph, const splat::RegisteredView& new_view,
                         const std::vector<const splat::RegisteredView*>& previous,
                         const core::Intrinsics& intr) {
  graph.add_node(new_view.keyframe_id);
  for (const splat::RegisteredView* prev : previous) {
    if (prev->keyframe_id == new_view.keyframe_id) continue;
    const double overlap = reprojection_overlap(new_view, *prev, intr);
    if (overlap > CovisibilityGraph::kEdgeThreshold)
      graph.add_edge(new_view.keyframe_id, prev->keyframe_id, overlap);
  }
}

std::optional<LoopCandidate> detect_loop(
    const CovisibilityGraph& graph, const splat::RegisteredView& new_view,
    const std::vector<const splat::RegisteredView*>& views,
    const std::vector<const sim::FeatureMap*>& features, const core::Intrinsics& intr,
    const LoopDetectConfig& cfg) {
  std::optional<LoopCandidate> best;
  for (const auto& [other_id, weight] : graph.neighbors(new_view.keyframe_id)) {
    if (std::abs(other_id - new_view.keyframe_id) <= cfg.min_temporal_distance) continue;
    const splat::RegisteredView* other = nullptr;
    for (const splat::RegisteredView* v : views)
      if (v->keyframe_id == other_id) {
        other = v;
        break;
      }
    if (!other) continue;

    LoopCandidate cand;
    cand.current_id = new_view.keyframe_id;
    cand.matched_id = other_id;
    cand.r_points = std::min(reprojection_overlap(new_view, *other, intr),
                             reprojection_overlap(*other, new_view, intr));
    cand.r_features =
        track::keyframe_overlap(*features[size_t(new_view.keyframe_id)],
                                *features[size_t(other_id)])
            .overlap_ratio;
    cand.score = cfg.weight_points * cand.r_points + cfg.weight_features * cand.r_features;
    if (cand.score > cfg.score_threshold && (!best || cand.score > best->score)) best = cand;
  }
  return best;
}

}  // namespace subsplat::loop
