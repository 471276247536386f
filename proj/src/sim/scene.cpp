#include "subsplat/sim/scene.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "subsplat/sim/rng.hpp"

namespace subsplat::sim {

namespace {

std::optional<double> intersect_rect(const Primitive& r, const Eigen::Vector3d& o,
                                     const Eigen::Vector3d& d, double t_min) {
  const double denom = d(r.axis);
  if (std::abs(denom) < 1e-15) return std::nullopt;
  const double t = (r.offset - o(r.axis)) / denom;
  if (t <= t_min) return std::nullopt;
  const int a1 = (r.axis + 1) % 3;
  const int a2 = (r.axis + 2) % 3;
  const double u = o(a1) + t * d(a1);
  const double v = o(a2) + t * d(a2);
  if (u < r.lo(0) || u > r.hi(0) || v < r.lo(1) || v > r.hi(1)) return std::nullopt;
  return t;
}

std::optional<double> intersect_sphere(const Primitive& s, const Eigen::Vector3d& o,
                                       const Eigen::Vector3d& d, double t_min) {
  const Eigen::Vector3d oc = o - s.center;
  const double a = d.squaredNorm();
  const double b = 2.0 * oc.dot(d);
  const double c = oc.squaredNorm() - s.radius * s.radius;
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return std::nullopt;
  const double sq = std::sqrt(disc);
  const double t0 = (-b - sq) / (2.0 * a);
  const double t1 = (-b + sq) / (2.0 * a);
  if (t0 > t_min) return t0;
  if (t1 > t_min) return t1;
  return std::nullopt;
}

std::optional<double> intersect_box(const Primitive& b, const Eigen::Vector3d& o,
                                    const Eigen::Vector3d& d, double t_min) {
  double t_enter = -std::numeric_limits<double>::infinity();
  double t_exit = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (std::abs(d(a)) < 1e-15) {
      if (o(a) < b.box_min(a) || o(a) > b.box_max(a)) return std::nullopt;
      continue;
    }
    double t0 = (b.box_min(a) - o(a)) / d(a);
    double t1 = (b.box_max(a) - o(a)) / d(a);
    if (t0 > t1) std::swap(t0, t1);
    t_enter = std::max(t_enter, t0);
    t_exit = std::min(t_exit, t1);
  }
  if (t_enter > t_exit) return std::nullopt;
  if (t_enter > t_min) return t_enter;
  if (t_exit > t_min) return t_exit;
  return std::nullopt;
}

Eigen::Vector3d box_normal(const Primitive& b, const Eigen::Vector3d& p) {
  // Face whose plane the hit point is closest to.
  int best_axis = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  double sign = 1.0;
  for (int a = 0; a < 3; ++a) {
    const double d_min = std::abs(p(a) - b.box_min(a));
    const double d_max = std::abs(p(a) - b.box_max(a));
    if (d_min < best_dist) {
      best_dist = d_min;
      best_axis = a;
      sign = -1.0;
    }
    if (d_max < best_dist) {
      best_dist = d_max;
      best_axis = a;
      sign = 1.0;
    }
  }
  Eigen::Vector3d n = Eigen::Vector3d::Zero();
  n(best_axis) = sign;
  return n;
}

}  // namespace

std::optional<RayHit> SyntheticScene::raycast(const Eigen::Vector3d& origin,
                                              const Eigen::Vector3d& dir, double t_min) const {
  std::optional<RayHit> best;
  for (const Primitive& prim : primitives) {
    std::optional<double> t;
    switch (prim.kind) {
      case Primitive::Kind::kRect:
        t = intersect_rect(prim, origin, dir, t_min);
        break;
      case Primitive::Kind::kSphere:
        t = intersect_sphere(prim, origin, dir, t_min);
        break;
      case Primitive::Kind::kBox:
        t = intersect_box(prim, origin, dir, t_min);
        break;
    }
    if (!t || (best && *t >= best->t)) continue;
    RayHit hit;
    hit.t = *t;
    hit.point = origin + *t * dir;
    hit.primitive = &prim;
    switch (prim.kind) {
      case Primitive::Kind::kRect: {
        Eigen::Vector3d n = Eigen::Vector3d::Zero();
        n(prim.axis) = prim.flip ? -1.0 : 1.0;
        if (n.dot(dir) > 0.0) n = -n;
        hit.normal = n;
        break;
      }
      case Primitive::Kind::kSphere: {
        Eigen::Vector3d n = (hit.point - prim.center).normalized();
        if (n.dot(dir) > 0.0) n = -n;
        hit.normal = n;
        break;
      }
      case Primitive::Kind::kBox: {
        Eigen::Vector3d n = box_normal(prim, hit.point);
        if (n.dot(dir) > 0.0) n = -n;
        hit.normal = n;
        break;
      }
    }
    best = hit;
  }
  return best;
}

SceneKind scene_kind_from_string(const std::string& name) {
  if (name == "room") return SceneKind::kRoom;
  if (name == "corridor") return SceneKind::kCorridor;
  throw std::invalid_argument("unknown scene kind: " + name);
}

namespace {

Primitive make_wall(int axis, double offset, const Eigen::Vector2d& lo, const Eigen::Vector2d& hi,
                    const Eigen::Vector3d& albedo) {
  Primitive p;
  p.kind = Primitive::Kind::kRect;
  p.axis = axis;
  p.offset = offset;
  p.lo = lo;
  p.hi = hi;
  p.albedo = albedo;
  return p;
}

Eigen::Vector3d random_albedo(Rng& rng) {
  return {rng.uniform(0.15, 0.8), rng.uniform(0.15, 0.8), rng.uniform(0.15, 0.8)};
}

}  // namespace

SyntheticScene generate_scene(SceneKind kind, uint64_t seed) {
  SyntheticScene scene;
  scene.seed = seed;
  Rng rng = Rng(seed).fork(0x5CE7E);

  if (kind == SceneKind::kRoom) {
    const double half = 3.0;    // 6 x 6 m footprint
    const double height = 3.0;  // open ceiling
    // Floor (z = 0) and four walls; rect axes: (axis+1)%3, (axis+2)%3.
    scene.primitives.push_back(
        make_wall(2, 0.0, {-half, -half}, {half, half}, random_albedo(rng)));
    scene.primitives.push_back(
        make_wall(0, -half, {-half, 0.0}, {half, height}, random_albedo(rng)));  // (y,z)
    scene.primitives.push_back(
        make_wall(0, half, {-half, 0.0}, {half, height}, random_albedo(rng)));
    scene.primitives.push_back(
        make_wall(1, -half, {0.0, -half}, {height, half}, random_albedo(rng)));  // (z,x)
    scene.primitives.push_back(
        make_wall(1, half, {0.0, -half}, {height, half}, random_albedo(rng)));

    const int n_objects = rng.uniform_int(3, 8);
    for (int i = 0; i < n_objects; ++i) {
      Primitive p;
      p.albedo = random_albedo(rng);
      const double cx = rng.uniform(-half + 1.0, half - 1.0);
      const double cy = rng.uniform(-half + 1.0, half - 1.0);
      if (rng.uniform() < 0.5) {
        p.kind = Primitive::Kind::kSphere;
        p.radius = rng.uniform(0.2, 0.45);
        p.center = Eigen::Vector3d(cx, cy, rng.uniform(p.radius, 1.8));
      } else {
        p.kind = Primitive::Kind::kBox;
        const Eigen::Vector3d ext(rng.uniform(0.2, 0.5), rng.uniform(0.2, 0.5),
                                  rng.uniform(0.3, 1.2));
        p.box_min = Eigen::Vector3d(cx - ext.x(), cy - ext.y(), 0.0);
        p.box_max = Eigen::Vector3d(cx + ext.x(), cy + ext.y(), ext.z());
      }
      scene.primitives.push_back(p);
    }
    scene.centroid = Eigen::Vector3d(0.0, 0.0, 1.2);
  } else {
    const double length = 20.0;
    const double half_w = 1.5;
    const double height = 3.0;
    scene.primitives.push_back(
        make_wall(2, 0.0, {-1.0, -half_w}, {length + 1.0, half_w}, random_albedo(rng)));
    scene.primitives.push_back(
        make_wall(1, -half_w, {0.0, -1.0}, {height, length + 1.0}, random_albedo(rng)));
    scene.primitives.push_back(
        make_wall(1, half_w, {0.0, -1.0}, {height, length + 1.0}, random_albedo(rng)));
    // End caps so out-and-back cameras always face geometry.
    scene.primitives.push_back(
        make_wall(0, -1.0, {-half_w, 0.0}, {half_w, height}, random_albedo(rng)));
    scene.primitives.push_back(
        make_wall(0, length + 1.0, {-half_w, 0.0}, {half_w, height}, random_albedo(rng)));

    const int n_clutter = rng.uniform_int(4, 8);
    for (int i = 0; i < n_clutter; ++i) {
      Primitive p;
      p.albedo = random_albedo(rng);
      const double along = rng.uniform(1.0, length - 1.0);
      const double side = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.9, 1.25);
      if (rng.uniform() < 0.4) {
        p.kind = Primitive::Kind::kSphere;
        p.radius = rng.uniform(0.1, 0.22);
        p.center = Eigen::Vector3d(along, side, rng.uniform(p.radius, 1.2));
      } else {
        p.kind = Primitive::Kind::kBox;
        const Eigen::Vector3d ext(rng.uniform(0.1, 0.3), rng.uniform(0.08, 0.2),
                                  rng.uniform(0.2, 0.9));
        p.box_min = Eigen::Vector3d(along - ext.x(), side - ext.y(), 0.0);
        p.box_max = Eigen::Vector3d(along + ext.x(), side + ext.y(), ext.z());
      }
      scene.primitives.push_back(p);
    }
    scene.centroid = Eigen::Vector3d(0.5 * length, 0.0, 1.2);
  }
  return scene;
}

}  // namespace subsplat::sim
