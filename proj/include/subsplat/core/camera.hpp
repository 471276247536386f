#pragma once

#include "subsplat/core/image.hpp"
#include "subsplat/core/intrinsics.hpp"
#include "subsplat/core/pose.hpp"

namespace subsplat::core {

// Points with camera-frame z below this are treated as behind the camera.
inline constexpr double kBehindCameraEps = 1e-6;

/// Lifts a depth map to 3D: point = pose * (d*(u-cx)/fx, d*(v-cy)/fy, d).
/// Invalid depth pixels stay invalid.
PointMap unproject(const DepthMap& depth, const Intrinsics& intr, const Pose& pose);

/// Per-pixel projection of a point map into a camera.
struct Projection {
  Image<Eigen::Vector2d> pixel;  // (u, v), defined where valid
  GrayImage depth;               // camera-frame z
  Mask valid;                    // input valid and z > kBehindCameraEps
};

/// Projects world points into the camera at `pose` (pose maps camera -> world).
Projection project(const PointMap& points, const Intrinsics& intr, const Pose& pose);

/// Central-difference surface normals of an unprojected depth map, in the
/// camera frame, oriented toward the camera (negative z). A pixel gets a
/// normal only if its full 3x3 neighborhood is valid.
NormalMap depth_to_normal(const DepthMap& depth, const Intrinsics& intr);

}  // namespace subsplat::core
