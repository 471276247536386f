#include "subsplat/sim/features.hpp"

#include <cmath>

#include "subsplat/core/camera.hpp"
#include "subsplat/sim/rng.hpp"

namespace subsplat::sim {

namespace {

// Projection matrix for the raw-patch components. Fixed seed: descriptors
// must be comparable across frames and across runs.
const Eigen::MatrixXd& projection_matrix() {
  static const Eigen::MatrixXd proj = [] {
    constexpr int raw_dim = kPatchSize * kPatchSize * 3;
    constexpr int n_proj = kFeatureDim - 7;
    Rng rng(0x0FEA7u);
    Eigen::MatrixXd m(n_proj, raw_dim);
    for (int r = 0; r < n_proj; ++r)
      for (int c = 0; c < raw_dim; ++c) m(r, c) = rng.normal() / std::sqrt(double(raw_dim));
    return m;
  }();
  return proj;
}

}  // namespace

FeatureMap patch_features(const core::ColorImage& color, const core::DepthMap& depth,
                          const core::Intrinsics& intr) {
  if (!color.same_size(depth.value))
    throw std::invalid_argument("patch_features: color/depth dimension mismatch");
  FeatureMap fm;
  fm.cols = color.width() / kPatchSize;
  fm.rows = color.height() / kPatchSize;
  fm.descriptors.reserve(size_t(fm.cols) * fm.rows);

  const core::NormalMap normals = core::depth_to_normal(depth, intr);
  constexpr int raw_dim = kPatchSize * kPatchSize * 3;
  Eigen::VectorXd raw(raw_dim);

  for (int py = 0; py < fm.rows; ++py) {
    for (int px = 0; px < fm.cols; ++px) {
      Eigen::Vector3d mean_color = Eigen::Vector3d::Zero();
      Eigen::Vector3d mean_normal = Eigen::Vector3d::Zero();
      double depth_sum = 0.0;
      int depth_count = 0;
      int normal_count = 0;
      for (int dy = 0; dy < kPatchSize; ++dy) {
        for (int dx = 0; dx < kPatchSize; ++dx) {
          const int x = px * kPatchSize + dx;
          const int y = py * kPatchSize + dy;
          const Eigen::Vector3d& c = color.at(x, y);
          mean_color += c;
          const int base = (dy * kPatchSize + dx) * 3;
          raw(base) = c(0);
          raw(base + 1) = c(1);
          raw(base + 2) = c(2);
          if (depth.valid.at(x, y)) {
            depth_sum += depth.value.at(x, y);
            ++depth_count;
          }
          if (normals.valid.at(x, y)) {
            mean_normal += normals.normal.at(x, y);
            ++normal_count;
          }
        }
      }
      mean_color /= double(kPatchSize * kPatchSize);
      if (normal_count > 0) mean_normal /= double(normal_count);
      const double log_depth =
          depth_count > 0 ? std::log(std::max(depth_sum / depth_count, 1e-9)) : 0.0;

      Eigen::VectorXd desc(kFeatureDim);
      desc.segment<3>(0) = mean_color;
      desc.segment<3>(3) = mean_normal;
      desc(6) = log_depth;
      desc.tail(kFeatureDim - 7) = projection_matrix() * raw;
      const double norm = desc.norm();
      if (norm > 1e-12) desc /= norm;
      fm.descriptors.push_back(std::move(desc));
    }
  }
  return fm;
}

}  // namespace subsplat::sim
