#pragma once

#include <vector>

#include "subsplat/core/intrinsics.hpp"
#include "subsplat/core/pose.hpp"
#include "subsplat/splat/types.hpp"

namespace subsplat::splat {

/// Weight-composited surfel splatting. Splats are projected to screen-space
/// Gaussian footprints (EWA-style 2D covariance plus a 0.25 px^2 dilation),
/// composited front to back; the per-splat depth at a pixel is the
/// intersection of the pixel ray with the splat's tangent plane, so coplanar
/// surfels reproduce planar geometry exactly.
RenderOutput render(const SplatMap& map, const core::Pose& pose, const core::Intrinsics& intr);

// ---------------------------------------------------------------------------
// Differentiable path. Forward with a cache, then backward from per-pixel
// adjoints of the outputs to splat parameters and the camera pose tangent.
// ---------------------------------------------------------------------------

struct SplatCamData {
  bool visible = false;
  Eigen::Vector3d p_cam = Eigen::Vector3d::Zero();
  Eigen::Vector3d n_cam = Eigen::Vector3d::Zero();  // flipped toward camera
  double flip = 1.0;                                // sign applied to reach n_cam
  Eigen::Matrix3d rot_cam;                          // R_cw * R_splat
  Eigen::Vector2d center = Eigen::Vector2d::Zero(); // projected mean (u, v)
  Eigen::Matrix2d cov2d = Eigen::Matrix2d::Identity();
  Eigen::Matrix2d q = Eigen::Matrix2d::Identity();  // cov2d^{-1}
  double plane_dot = 0.0;                           // n_cam . p_cam
  int x0 = 0, x1 = -1, y0 = 0, y1 = -1;             // pixel bounding box
};

struct RenderCache {
  std::vector<SplatCamData> cam;               // per splat
  std::vector<uint32_t> order;                 // visible splats, front to back
  core::Image<std::vector<uint32_t>> lists;    // per pixel: contributing splats in order
  core::Pose pose;
  core::Intrinsics intr;
};

RenderOutput render_with_cache(const SplatMap& map, const core::Pose& pose,
                               const core::Intrinsics& intr, RenderCache& cache);

/// Per-pixel adjoints of the render outputs. Zero-initialized images may be
/// left empty to skip that path.
struct PixelAdjoints {
  core::ColorImage d_color;
  core::GrayImage d_silhouette;
  core::GrayImage d_depth;   // w.r.t. the normalized (output) depth
  core::Image<Eigen::Vector3d> d_normal;  // w.r.t. the unit output normal
};

/// Gradients produced by the backward pass.
struct RenderGrads {
  std::vector<Eigen::Vector3d> d_position;
  std::vector<Eigen::Vector3d> d_rotation;  // right-multiplied so(3) tangent
  std::vector<Eigen::Vector3d> d_scale;
  std::vector<double> d_opacity;
  std::vector<Eigen::Vector3d> d_color;
  Eigen::Vector3d d_pose_rot = Eigen::Vector3d::Zero();    // camera right-update tangent
  Eigen::Vector3d d_pose_trans = Eigen::Vector3d::Zero();

  void resize(size_t n);
  void add_scaled(const RenderGrads& other, double factor);
};

void render_backward(const SplatMap& map, const RenderCache& cache, const RenderOutput& out,
                     const PixelAdjoints& adj, RenderGrads& grads);

}  // namespace subsplat::splat
