#pragma once

#include <Eigen/Core>
#include <vector>

#include "subsplat/core/image.hpp"
#include "subsplat/core/intrinsics.hpp"

namespace subsplat::sim {

inline constexpr int kPatchSize = 16;
inline constexpr int kFeatureDim = 32;

/// Per-patch unit descriptors on an (H/16) x (W/16) grid.
struct FeatureMap {
  int cols = 0;
  int rows = 0;
  std::vector<Eigen::VectorXd> descriptors;  // row-major, unit norm

  int count() const { return cols * rows; }
  const Eigen::VectorXd& at(int px, int py) const { return descriptors[py * cols + px]; }
  bool same_grid(const FeatureMap& other) const {
    return cols == other.cols && rows == other.rows;
  }
};

/// Deterministic patch descriptors: unit-normalized concatenation of mean
/// color (3), mean camera-frame normal (3), log mean depth (1), and 25 fixed
/// seeded random projections of the raw color patch.
FeatureMap patch_features(const core::ColorImage& color, const core::DepthMap& depth,
                          const core::Intrinsics& intr);

}  // namespace subsplat::sim
