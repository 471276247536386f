#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <cstdint>
#include <vector>

#include "subsplat/core/camera.hpp"
#include "subsplat/core/image.hpp"

namespace subsplat::splat {

inline constexpr double kMaxSplatRadius = 0.5;   // m
inline constexpr double kMinSplatRadius = 1e-5;  // m
inline constexpr double kSilhouetteThreshold = 0.5;  // tau_A
inline constexpr double kPruneOpacity = 0.01;

/// One oriented, scaled, semi-transparent surface element of the global map.
struct Splat {
  uint64_t id = 0;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();      // world, m
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();
  Eigen::Vector3d scale = Eigen::Vector3d::Constant(0.01); // per-axis radii, m
  double opacity = 1.0;                                    // (0, 1]
  Eigen::Vector3d color = Eigen::Vector3d::Constant(0.5);  // RGB [0,1]
  int origin_submap = 0;

  /// Local z axis in world coordinates (the surfel normal direction).
  Eigen::Vector3d axis_z() const { return rotation * Eigen::Vector3d::UnitZ(); }

  void clamp_parameters();
};

/// Growable splat set with stable ids; ids survive pruning.
struct SplatMap {
  std::vector<Splat> splats;
  uint64_t next_id = 1;

  size_t size() const { return splats.size(); }
  uint64_t add(Splat s) {
    s.id = next_id++;
    splats.push_back(std::move(s));
    return splats.back().id;
  }
  /// Removes splats with opacity below the prune threshold; returns count removed.
  size_t prune_transparent();
};

/// Per-view render products. Depth and normal are composited with the same
/// per-splat weights as color and are valid only where the silhouette
/// (accumulated opacity) exceeds kSilhouetteThreshold.
struct RenderOutput {
  core::ColorImage color;
  core::DepthMap depth;
  core::NormalMap normal;  // camera frame, toward the camera
  core::GrayImage silhouette;

  int width() const { return silhouette.width(); }
  int height() const { return silhouette.height(); }
};

/// A view registered into the keyframe buffer after intra-submap
/// registration: refined pose, rescaled depth, reprojected points, and the
/// silhouette seen at registration time.
struct RegisteredView {
  int keyframe_id = 0;
  int frame_index = 0;
  int submap_id = 0;
  core::ColorImage color;
  core::Pose pose;
  core::DepthMap depth;
  core::PointMap points;  // world; equals pose * unproject(depth) by construction
  core::GrayImage silhouette;
  Eigen::Matrix3d exposure_gain = Eigen::Matrix3d::Identity();
  Eigen::Vector3d exposure_bias = Eigen::Vector3d::Zero();
  bool held_out = false;  // excluded from map supervision, kept for NVS metrics
};

/// Loss weights and the rendering window size for map optimization.
struct LossWeights {
  double lambda_scale_depth = 10.0;  // Eq-3 companion term
  double lambda_depth = 5.0;         // inverted depth loss (0.5 in global BA)
  double lambda_depth_normal = 0.05;
  double lambda_scale_reg = 10.0;    // anisotropy penalty
  double lambda_normal = 0.05;       // rendered-normal loss (global BA)
  double ssim_weight = 0.2;          // DSSIM share inside the photometric loss
  int window = 10;                   // rendering window W

  void validate() const;
};

}  // namespace subsplat::splat
