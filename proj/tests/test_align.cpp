#include <doctest.h>

#include <cmath>

#include "subsplat/core/align.hpp"
#include "testutil.hpp"

using namespace subsplat::core;

namespace {

std::vector<Eigen::Vector3d> random_points(subsplat::sim::Rng& rng, int n) {
  std::vector<Eigen::Vector3d> pts;
  for (int i = 0; i < n; ++i)
    pts.emplace_back(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
  return pts;
}

}  // namespace

TEST_CASE("umeyama: identity and pure-scale cases") {
  subsplat::sim::Rng rng(31);
  const auto src = random_points(rng, 20);
  {
    const Sim3Alignment a = umeyama(src, src, true);
    CHECK(a.scale == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(a.pose.is_approx(Pose::identity(), 1e-9));
  }
  {
    std::vector<Eigen::Vector3d> dst;
    for (const auto& p : src) dst.push_back(2.0 * p);
    const Sim3Alignment a = umeyama(src, dst, true);
    CHECK(a.scale == doctest::Approx(2.0).epsilon(1e-12));
    CHECK((a.pose.rotation() - Eigen::Matrix3d::Identity()).norm() < 1e-9);
  }
}

TEST_CASE("umeyama: construct-then-recover with scale 1.3") {
  subsplat::sim::Rng rng(32);
  const auto src = random_points(rng, 50);
  const Pose rt = testutil::random_pose(rng);
  const double s = 1.3;
  std::vector<Eigen::Vector3d> dst;
  for (const auto& p : src) dst.push_back(rt.quaternion() * (s * p) + rt.translation());
  const Sim3Alignment a = umeyama(src, dst, true);
  CHECK(a.scale == doctest::Approx(s).epsilon(1e-9));
  CHECK(a.pose.is_approx(rt, 1e-9));
  for (size_t i = 0; i < src.size(); ++i) CHECK((a.apply(src[i]) - dst[i]).norm() < 1e-9);
}

TEST_CASE("umeyama: collinear input raises degenerate error") {
  std::vector<Eigen::Vector3d> src, dst;
  for (int i = 0; i < 10; ++i) {
    src.emplace_back(double(i), 2.0 * i, -1.0 * i);
    dst.emplace_back(double(i) + 1.0, 2.0 * i, -1.0 * i);
  }
  CHECK_THROWS_AS(umeyama(src, dst, true), DegenerateConfiguration);
  CHECK_THROWS_AS(umeyama({src[0], src[1]}, {dst[0], dst[1]}, false), DegenerateConfiguration);
}

TEST_CASE("umeyama matches exhaustive small-angle grid search on 5-point problems") {
  subsplat::sim::Rng rng(33);
  for (int trial = 0; trial < 3; ++trial) {
    const auto src = random_points(rng, 5);
    Eigen::Vector3d axis(rng.normal(), rng.normal(), rng.normal());
    axis.normalize();
    const Eigen::Vector3d omega_true = axis * rng.uniform(0.02, 0.12);
    const Eigen::Vector3d t_true(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5),
                                 rng.uniform(-0.5, 0.5));
    std::vector<Eigen::Vector3d> dst;
    for (const auto& p : src) dst.push_back(so3_exp(omega_true) * p + t_true);

    // Oracle: coarse-to-fine grid over the rotation vector; translation is
    // closed-form (centroid match) for each candidate rotation.
    Eigen::Vector3d mu_src = Eigen::Vector3d::Zero(), mu_dst = Eigen::Vector3d::Zero();
    for (size_t i = 0; i < src.size(); ++i) {
      mu_src += src[i];
      mu_dst += dst[i];
    }
    mu_src /= 5.0;
    mu_dst /= 5.0;
    auto cost_of = [&](const Eigen::Vector3d& w) {
      const Eigen::Matrix3d r = so3_exp(w).toRotationMatrix();
      const Eigen::Vector3d t = mu_dst - r * mu_src;
      double c = 0.0;
      for (size_t i = 0; i < src.size(); ++i) c += (dst[i] - r * src[i] - t).squaredNorm();
      return c;
    };
    Eigen::Vector3d best = Eigen::Vector3d::Zero();
    double best_cost = cost_of(best);
    double span = 0.15, step = 0.015;
    for (int level = 0; level < 3; ++level) {
      const Eigen::Vector3d center = best;
      for (double dx = -span; dx <= span; dx += step)
        for (double dy = -span; dy <= span; dy += step)
          for (double dz = -span; dz <= span; dz += step) {
            const Eigen::Vector3d w = center + Eigen::Vector3d(dx, dy, dz);
            const double c = cost_of(w);
            if (c < best_cost) {
              best_cost = c;
              best = w;
            }
          }
      span = 2.0 * step;
      step = span / 10.0;
    }

    const Sim3Alignment a = umeyama(src, dst, false);
    const Eigen::Vector3d w_est = so3_log(a.pose.quaternion());
    CHECK((w_est - best).norm() < 1e-3);
    CHECK((w_est - omega_true).norm() < 1e-9);
  }
}
