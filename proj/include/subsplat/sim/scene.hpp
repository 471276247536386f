#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace subsplat::sim {

/// Analytic scene primitives. World frame: z up, ground plane z = 0.
struct Primitive {
  enum class Kind { kRect, kSphere, kBox };
  Kind kind = Kind::kRect;

  // kRect: finite axis-aligned rectangle on the plane {p : p[axis] = offset},
  // bounded by [lo, hi] in the two remaining axes. `flip` selects the normal sign.
  int axis = 0;
  double offset = 0.0;
  Eigen::Vector2d lo = Eigen::Vector2d::Zero();
  Eigen::Vector2d hi = Eigen::Vector2d::Zero();
  bool flip = false;

  // kSphere
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  double radius = 0.0;

  // kBox: axis-aligned box [box_min, box_max]
  Eigen::Vector3d box_min = Eigen::Vector3d::Zero();
  Eigen::Vector3d box_max = Eigen::Vector3d::Zero();

  Eigen::Vector3d albedo = Eigen::Vector3d::Constant(0.5);
};

struct RayHit {
  double t = 0.0;  // ray parameter (equals z-depth for unit-z camera rays)
  Eigen::Vector3d point = Eigen::Vector3d::Zero();
  Eigen::Vector3d normal = Eigen::Vector3d::Zero();  // unit, facing the ray origin
  const Primitive* primitive = nullptr;
};

struct SyntheticScene {
  std::vector<Primitive> primitives;
  uint64_t seed = 0;
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();  // interior reference point

  /// Nearest intersection of origin + t*dir with any primitive, t > t_min.
  std::optional<RayHit> raycast(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir,
                                double t_min = 1e-9) const;
};

enum class SceneKind { kRoom, kCorridor };
SceneKind scene_kind_from_string(const std::string& name);

/// Room: floor + ceiling-less box of 4 walls, 3-8 random boxes/spheres inside.
/// Corridor: two long walls + floor + clutter along a 20 m axis.
SyntheticScene generate_scene(SceneKind kind, uint64_t seed);

}  // namespace subsplat::sim
