#pragma once

#include "subsplat/core/camera.hpp"
#include "subsplat/splat/renderer.hpp"
#include "subsplat/splat/types.hpp"

namespace subsplat::splat {

// Loss terms used by pose refinement, windowed map update, and global bundle
// adjustment. Each term optionally accumulates d(loss)/d(render output) into
// PixelAdjoints, scaled by `weight`. Masks are frozen inputs: gradients never
// flow through mask construction.

/// Mean L1 color difference over masked pixels (all pixels when mask is null).
double photometric_l1(const core::ColorImage& rendered, const core::ColorImage& observed,
                      const core::Mask* mask, PixelAdjoints* adj, double weight);

/// Mean SSIM of `rendered` against `observed` plus its gradient w.r.t.
/// `rendered`. Same 11x11 Gaussian window as core::ssim.
double ssim_with_grad(const core::ColorImage& rendered, const core::ColorImage& observed,
                      core::ColorImage* d_rendered);

/// Scale-invariant depth loss: variance of log(d_hat) - log(d) over the mask.
/// Zero under any global rescaling of either map.
double scale_invariant_depth_loss(const core::DepthMap& d_hat, const core::DepthMap& d,
                                  const core::Mask& mask, PixelAdjoints* adj = nullptr,
                                  double weight = 1.0);

/// Inverted depth loss: mean |1/d - 1/d_hat| over masked jointly-valid pixels.
double inverse_depth_l1(const core::DepthMap& d_hat, const core::DepthMap& d,
                        const core::Mask& mask, PixelAdjoints* adj, double weight);

/// Depth-normal loss: mean (1 - n_view . n(d_hat)) where both normals exist.
/// The gradient reaches the rendered depth through the normal construction.
double depth_normal_loss(const core::DepthMap& d_hat, const core::NormalMap& view_normal,
                         const core::Intrinsics& intr, PixelAdjoints* adj, double weight);

/// Rendered-normal loss: mean (1 - n_view . n_rendered) over joint validity.
double rendered_normal_loss(const core::NormalMap& rendered, const core::NormalMap& view_normal,
                            PixelAdjoints* adj, double weight);

/// Anisotropy penalty: mean over splats of sum_j |s_j - mean(s)|.
double scale_regularizer(const SplatMap& map, RenderGrads* grads, double weight);

/// Adjoint of core::depth_to_normal: folds d(loss)/d(normal) back to
/// d(loss)/d(depth). `d_normal` must be zero where the normal map is invalid.
core::GrayImage normal_from_depth_backward(const core::DepthMap& depth,
                                           const core::Intrinsics& intr,
                                           const core::NormalMap& normals,
                                           const core::Image<Eigen::Vector3d>& d_normal);

}  // namespace subsplat::splat
