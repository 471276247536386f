#pragma once

#include <map>
#include <optional>
#include <set>
#include <vector>

#include "subsplat/sim/features.hpp"
#include "subsplat/splat/types.hpp"

namespace subsplat::loop {

/// Undirected keyframe graph; an edge exists iff reprojection overlap > 0.3.
class CovisibilityGraph {
 public:
  static constexpr double kEdgeThreshold = 0.3;

  void add_node(int keyframe_id) { adjacency_[keyframe_id]; }
  void add_edge(int a, int b, double overlap);
  bool has_edge(int a, int b) const;
  double edge_weight(int a, int b) const;  // 0 when absent
  const std::map<int, double>& neighbors(int keyframe_id) const;
  size_t node_count() const { return adjacency_.size(); }

 private:
  std::map<int, std::map<int, double>> adjacency_;
  static const std::map<int, double> kEmpty;
};

/// Directed reprojection overlap: the fraction of `source`'s valid world
/// points that land inside `target`'s image with depth within 10% of the
/// target's depth at that pixel. Points are subsampled by `stride`.
double reprojection_overlap(const splat::RegisteredView& source,
                            const splat::RegisteredView& target, const core::Intrinsics& intr,
                            int stride = 2);

/// Adds `new_view` to the graph with edges to every previous view whose
/// overlap (new -> previous) exceeds the threshold.
void covisibility_update(CovisibilityGraph& graph, const splat::RegisteredView& new_view,
                         const std::vector<const splat::RegisteredView*>& previous,
                         const core::Intrinsics& intr);

struct LoopCandidate {
  int current_id = 0;
  int matched_id = 0;
  double r_points = 0.0;   // min of the two directed overlaps
  double r_features = 0.0; // patch-level feature overlap
  double score = 0.0;      // 0.7 * r_points + 0.3 * r_features
};

struct LoopDetectConfig {
  int min_temporal_distance = 10;  // keyframe indices
  double score_threshold = 0.5;
  double weight_points = 0.7;
  double weight_features = 0.3;
};

/// Best-scoring loop candidate among covisible keyframes far enough in the
/// past, or nullopt when none clears the score threshold. `features` must be
/// indexable by keyframe id.
std::optional<LoopCandidate> detect_loop(
    const CovisibilityGraph& graph, const splat::RegisteredView& new_view,
    const std::vector<const splat::RegisteredView*>& views,
    const std::vector<const sim::FeatureMap*>& features, const core::Intrinsics& intr,
    const LoopDetectConfig& cfg = {});

}  // namespace subsplat::loop
