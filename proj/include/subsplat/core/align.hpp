#pragma once

#include <stdexcept>
#include <vector>

#include "subsplat/core/pose.hpp"

namespace subsplat::core {

/// Raised when an alignment problem has no unique solution
/// (fewer than 3 points, or a collinear/degenerate configuration).
class DegenerateConfiguration : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Closed-form least-squares similarity alignment: finds (s, R, t) minimizing
/// sum ||dst_i - s R src_i - t||^2 with a proper rotation. With
/// `with_scale` off the scale is fixed to 1 (rigid Kabsch alignment).
Sim3Alignment umeyama(const std::vector<Eigen::Vector3d>& src,
                      const std::vector<Eigen::Vector3d>& dst, bool with_scale);

}  // namespace subsplat::core
