#pragma once

#include <string>
#include <vector>

#include "subsplat/core/pose.hpp"

namespace subsplat::core {

struct TimedPose {
  double timestamp = 0.0;
  Pose pose;
};

/// Reads `timestamp tx ty tz qx qy qz qw` lines; '#' starts a comment.
std::vector<TimedPose> read_trajectory(const std::string& path);

void write_trajectory(const std::string& path, const std::vector<TimedPose>& trajectory);

}  // namespace subsplat::core
