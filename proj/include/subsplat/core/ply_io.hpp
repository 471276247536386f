#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

namespace subsplat::core {

struct PlyPoint {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  std::optional<Eigen::Vector3d> color;  // RGB in [0,1]
};

/// ASCII PLY with x y z and optional uchar red green blue (taken from the
/// first point; mixing colored and uncolored points is rejected).
void write_ply_points(const std::string& path, const std::vector<PlyPoint>& points);

std::vector<PlyPoint> read_ply_points(const std::string& path);

}  // namespace subsplat::core
