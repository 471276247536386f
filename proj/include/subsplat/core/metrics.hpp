#pragma once

#include <vector>

#include "subsplat/core/align.hpp"
#include "subsplat/core/image.hpp"
#include "subsplat/core/pose.hpp"

namespace subsplat::core {

enum class AteAlignment {
  kNone,   // compare raw positions
  kSe3,    // rigid alignment of the estimate onto ground truth
  kSim3,   // similarity alignment (default for monocular runs)
};

/// RMSE of translation residuals after optional trajectory alignment.
double ate_rmse(const std::vector<Pose>& estimated, const std::vector<Pose>& ground_truth,
                AteAlignment alignment);

struct SurfaceError {
  double accuracy = 0.0;      // mean NN distance reconstructed -> reference
  double completeness = 0.0;  // mean NN distance reference -> reconstructed
  double chamfer = 0.0;       // (accuracy + completeness) / 2
};

/// Symmetric nearest-neighbor surface error between two point clouds.
/// Exact: brute force below 5000 points, uniform voxel grid above.
SurfaceError accuracy_completeness_chamfer(const std::vector<Eigen::Vector3d>& reconstructed,
                                           const std::vector<Eigen::Vector3d>& reference);

/// PSNR in dB for images in [0,1]; capped at 100 dB when MSE < 1e-10.
double psnr(const ColorImage& a, const ColorImage& b);

/// Mean SSIM with an 11x11 Gaussian window (sigma 1.5), c1=0.01^2, c2=0.03^2,
/// averaged over channels and over window positions fully inside the image.
double ssim(const ColorImage& a, const ColorImage& b);

}  // namespace subsplat::core
