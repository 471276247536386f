#include "subsplat/loop/optimize.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace subsplat::loop {

PointPairBlock make_point_block(int submap_a, int submap_b, const core::PointMap& map_a,
                                const core::PointMap& map_b, size_t max_points) {
  if (!map_a.point.same_size(map_b.point))
    throw std::invalid_argument("make_point_block: point map dimension mismatch");
  std::vector<size_t> joint;
  for (size_t i = 0; i < map_a.point.size(); ++i)
    if (map_a.valid[i] && map_b.valid[i]) joint.push_back(i);

  PointPairBlock block;
  block.submap_a = submap_a;
  block.submap_b = submap_b;
  if (joint.empty()) return block;
  const size_t step = std::max<size_t>(1, (joint.size() + max_points - 1) / max_points);
  for (size_t k = 0; k < joint.size(); k += step) {
    block.points_a.push_back(map_a.point[joint[k]]);
    block.points_b.push_back(map_b.point[joint[k]]);
  }
  return block;
}

std::vector<PointPairBlock> adjacency_blocks(const std::vector<track::Submap>& submaps,
                                             size_t max_points) {
  std::vector<PointPairBlock> blocks;
  for (size_t t = 1; t < submaps.size(); ++t) {
    blocks.push_back(make_point_block(submaps[t - 1].id, submaps[t].id,
                                      submaps[t - 1].world_points.back(),
                                      submaps[t].world_points.front(), max_points));
  }
  return blocks;
}

namespace {

double total_cost(const std::vector<core::Pose>& transforms,
                  const std::vector<PointPairBlock>& blocks) {
  double cost = 0.0;
  for (const PointPairBlock& b : blocks) {
    const core::Pose& ta = transforms[size_t(b.submap_a)];
    const core::Pose& tb = transforms[size_t(b.submap_b)];
    for (size_t k = 0; k < b.points_a.size(); ++k)
      cost += (ta * b.points_a[k] - tb * b.points_b[k]).squaredNorm();
  }
  return cost;
}

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

// Gauss-Newton system over the free transforms (submap 0 excluded).
// Tangent layout per submap: (rotation, translation), left update.
void build_system(const std::vector<core::Pose>& transforms,
                  const std::vector<PointPairBlock>& blocks, Eigen::MatrixXd& h,
                  Eigen::VectorXd& g) {
  h.setZero();
  g.setZero();
  auto slot = [](int submap_id) { return 6 * (submap_id - 1); };
  for (const PointPairBlock& b : blocks) {
    const core::Pose& ta = transforms[size_t(b.submap_a)];
    const core::Pose& tb = transforms[size_t(b.submap_b)];
    const bool free_a = b.submap_a > 0;
    const bool free_b = b.submap_b > 0;
    for (size_t k = 0; k < b.points_a.size(); ++k) {
      const Eigen::Vector3d xa = ta * b.points_a[k];
      const Eigen::Vector3d xb = tb * b.points_b[k];
      const Eigen::Vector3d r = xa - xb;
      Eigen::Matrix<double, 3, 6> ja, jb;
      ja.leftCols<3>() = -skew(xa);
      ja.rightCols<3>() = Eigen::Matrix3d::Identity();
      jb.leftCols<3>() = skew(xb);
      jb.rightCols<3>() = -Eigen::Matrix3d::Identity();
      if (free_a) {
        h.block<6, 6>(slot(b.submap_a), slot(b.submap_a)) += ja.transpose() * ja;
        g.segment<6>(slot(b.submap_a)) += ja.transpose() * r;
      }
      if (free_b) {
        h.block<6, 6>(slot(b.submap_b), slot(b.submap_b)) += jb.transpose() * jb;
        g.segment<6>(slot(b.submap_b)) += jb.transpose() * r;
      }
      if (free_a && free_b) {
        h.block<6, 6>(slot(b.submap_a), slot(b.submap_b)) += ja.transpose() * jb;
        h.block<6, 6>(slot(b.submap_b), slot(b.submap_a)) += jb.transpose() * ja;
      }
    }
  }
}

void apply_delta(std::vector<core::Pose>& transforms, const Eigen::VectorXd& delta) {
  for (size_t t = 1; t < transforms.size(); ++t) {
    const Eigen::Vector3d d_rot = delta.segment<3>(6 * (Eigen::Index(t) - 1));
    const Eigen::Vector3d d_trans = delta.segment<3>(6 * (Eigen::Index(t) - 1) + 3);
    transforms[t] = transforms[t].left_update(d_rot, d_trans);
  }
}

}  // namespace

LoopOptimizeResult optimize_loop(int n_submaps, const std::vector<PointPairBlock>& blocks,
                                 const LoopOptimizeOptions& opts) {
  if (n_submaps < 2) throw std::invalid_argument("optimize_loop: need at least 2 submaps");
  for (const PointPairBlock& b : blocks)
    if (b.submap_a < 0 || b.submap_a >= n_submaps || b.submap_b < 0 || b.submap_b >= n_submaps)
      throw std::invalid_argument("optimize_loop: block references unknown submap");

  LoopOptimizeResult result;
  std::vector<core::Pose> transforms;
  transforms.resize(size_t(n_submaps));
  if (!opts.init.empty()) {
    if (opts.init.size() != size_t(n_submaps))
      throw std::invalid_argument("optimize_loop: init size mismatch");
    transforms = opts.init;
    transforms[0] = core::Pose::identity();  // gauge pin
  }
  const int dim = 6 * (n_submaps - 1);
  Eigen::MatrixXd h(dim, dim);
  Eigen::VectorXd g(dim);

  double cost = total_cost(transforms, blocks);
  result.initial_cost = cost;
  if (!std::isfinite(cost)) throw std::runtime_error("optimize_loop: non-finite initial cost");

  double lambda = 1e-3;
  for (int it = 0; it < opts.max_iters; ++it) {
    ++result.iterations;
    build_system(transforms, blocks, h, g);

    bool stepped = false;
    if (lambda < 1e12) {
      Eigen::MatrixXd damped = h;
      for (int i = 0; i < dim; ++i) damped(i, i) += lambda * (h(i, i) + 1e-12);
      const Eigen::VectorXd delta = damped.ldlt().solve(-g);
      std::vector<core::Pose> proposal = transforms;
      apply_delta(proposal, delta);
      const double new_cost = total_cost(proposal, blocks);
      if (std::isfinite(new_cost) && new_cost < cost) {
        const double rel_change = (cost - new_cost) / std::max(cost, 1e-300);
        transforms = std::move(proposal);
        cost = new_cost;
        lambda = std::max(lambda * 0.1, 1e-12);
        stepped = true;
        if (rel_change < opts.rel_tol) break;
      } else {
        lambda *= 10.0;
      }
    } else {
      // Damping saturated: fall back to a plain gradient step.
      result.used_gd_fallback = true;
      std::vector<core::Pose> proposal = transforms;
      apply_delta(proposal, -opts.fallback_lr * g);
      const double new_cost = total_cost(proposal, blocks);
      if (std::isfinite(new_cost) && new_cost < cost) {
        transforms = std::move(proposal);
        cost = new_cost;
        stepped = true;
      } else {
        break;  // no direction makes progress
      }
    }
    (void)stepped;
  }
  if (!std::isfinite(cost)) throw std::runtime_error("optimize_loop: non-finite cost");

  result.final_cost = cost;
  result.transforms.transforms = std::move(transforms);
  return result;
}

void apply_transforms_to_map(splat::SplatMap& map, const SubmapTransforms& transforms) {
  for (splat::Splat& s : map.splats) {
    if (s.origin_submap < 0 || size_t(s.origin_submap) >= transforms.transforms.size())
      throw std::out_of_range("apply_transforms_to_map: splat with unknown origin submap");
    const core::Pose& t = transforms.transforms[size_t(s.origin_submap)];
    s.position = t * s.position;
    s.rotation = (t.quaternion() * s.rotation).normalized();
  }
}

}  // namespace subsplat::loop
