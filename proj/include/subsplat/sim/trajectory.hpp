#pragma once

#include <string>
#include <vector>

#include "subsplat/core/pose.hpp"

namespace subsplat::sim {

enum class TrajectoryKind { kOrbit, kSquareLoop, kCorridorOutBack };
TrajectoryKind trajectory_kind_from_string(const std::string& name);

/// Camera-to-world pose looking from `eye` toward `target`, camera y axis
/// pointing downward in world z. Degenerate (vertical) viewing directions are rejected.
core::Pose look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target);

/// Deterministic camera paths. Loop kinds end at a previously visited pose.
///  - orbit: circle of `radius` around `center`, always facing the center
///  - square_loop: square of side 2*radius around `center`, facing along motion
///  - corridor_out_back: straight out along x and back, turning at n/2
std::vector<core::Pose> generate_trajectory(TrajectoryKind kind, int n_frames,
                                            const Eigen::Vector3d& center, double radius);

}  // namespace subsplat::sim
