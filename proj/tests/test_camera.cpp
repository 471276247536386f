#include <doctest.h>

#include <cmath>

#include "subsplat/core/camera.hpp"
#include "testutil.hpp"

using namespace subsplat::core;

namespace {
const Intrinsics kIntr(60.0, 60.0, 32.0, 24.0, 64, 48);
}

TEST_CASE("unproject: principal-ray case") {
  DepthMap d(64, 48);
  d.value.at(32, 24) = 1.0;
  d.valid.at(32, 24) = 1;
  const PointMap pm = unproject(d, kIntr, Pose::identity());
  CHECK(pm.valid.at(32, 24));
  CHECK((pm.point.at(32, 24) - Eigen::Vector3d(0, 0, 1)).norm() < 1e-12);
  CHECK_FALSE(pm.valid.at(0, 0));
}

TEST_CASE("unproject rejects dimension mismatch") {
  DepthMap d(32, 32);
  CHECK_THROWS_AS(unproject(d, kIntr, Pose::identity()), std::invalid_argument);
}

TEST_CASE("unproject with unit focal and pure translation: per-pixel oracle") {
  const Intrinsics intr(1.0, 1.0, 0.0, 0.0, 8, 8);
  subsplat::sim::Rng rng(21);
  DepthMap d = testutil::random_depth(rng, 8, 8);
  const Pose pose(Eigen::Quaterniond::Identity(), Eigen::Vector3d(0, 0, 2));
  const PointMap pm = unproject(d, intr, pose);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) {
      // Independent scalar arithmetic: p = (d*x, d*y, d) + (0,0,2).
      const double depth = d.value.at(x, y);
      CHECK(pm.point.at(x, y).x() == doctest::Approx(depth * x).epsilon(1e-12));
      CHECK(pm.point.at(x, y).y() == doctest::Approx(depth * y).epsilon(1e-12));
      CHECK(pm.point.at(x, y).z() == doctest::Approx(depth + 2.0).epsilon(1e-12));
    }
}

TEST_CASE("project: principal point and behind-camera cases") {
  PointMap pm(4, 4);
  pm.point.at(0, 0) = Eigen::Vector3d(0, 0, 1);
  pm.valid.at(0, 0) = 1;
  pm.point.at(1, 0) = Eigen::Vector3d(0.5, 0.5, 0.0);  // z = 0: degenerate
  pm.valid.at(1, 0) = 1;
  const Projection pr = project(pm, kIntr, Pose::identity());
  CHECK(pr.valid.at(0, 0));
  CHECK(pr.pixel.at(0, 0).x() == doctest::Approx(32.0));
  CHECK(pr.pixel.at(0, 0).y() == doctest::Approx(24.0));
  CHECK(pr.depth.at(0, 0) == doctest::Approx(1.0));
  CHECK_FALSE(pr.valid.at(1, 0));
}

TEST_CASE("project/unproject round-trip on random maps and poses") {
  subsplat::sim::Rng rng(22);
  for (int trial = 0; trial < 5; ++trial) {
    const DepthMap d = testutil::random_depth(rng, 64, 48);
    const Pose pose = testutil::random_pose(rng);
    const PointMap pm = unproject(d, kIntr, pose);
    const Projection pr = project(pm, kIntr, pose);
    for (int y = 0; y < 48; ++y)
      for (int x = 0; x < 64; ++x) {
        REQUIRE(pr.valid.at(x, y));
        CHECK(std::abs(pr.pixel.at(x, y).x() - x) < 1e-9);
        CHECK(std::abs(pr.pixel.at(x, y).y() - y) < 1e-9);
        CHECK(std::abs(pr.depth.at(x, y) - d.value.at(x, y)) < 1e-9);
      }
  }
}

namespace {

// Depth map of the plane n.p = c in camera coordinates.
DepthMap plane_depth(const Eigen::Vector3d& n, double c, const Intrinsics& intr) {
  DepthMap d(intr.width, intr.height);
  for (int y = 0; y < intr.height; ++y)
    for (int x = 0; x < intr.width; ++x) {
      const Eigen::Vector3d dir((x - intr.cx) / intr.fx, (y - intr.cy) / intr.fy, 1.0);
      const double denom = n.dot(dir);
      if (std::abs(denom) < 1e-9) continue;
      const double depth = c / denom;
      if (depth <= 0.0) continue;
      d.value.at(x, y) = depth;
      d.valid.at(x, y) = 1;
    }
  return d;
}

}  // namespace

TEST_CASE("depth_to_normal: fronto-parallel plane gives (0,0,-1)") {
  DepthMap d(64, 48);
  for (size_t i = 0; i < d.value.size(); ++i) {
    d.value[i] = 2.0;
    d.valid[i] = 1;
  }
  const NormalMap nm = depth_to_normal(d, kIntr);
  for (int y = 1; y < 47; ++y)
    for (int x = 1; x < 63; ++x) {
      REQUIRE(nm.valid.at(x, y));
      CHECK((nm.normal.at(x, y) - Eigen::Vector3d(0, 0, -1)).norm() < 1e-9);
    }
}

TEST_CASE("depth_to_normal: tilted plane matches analytic normal") {
  // Plane tilted 45 degrees about the x axis.
  const Eigen::Vector3d n = Eigen::Vector3d(0.0, 1.0, 1.0).normalized();
  const DepthMap d = plane_depth(n, 2.0, kIntr);
  const NormalMap nm = depth_to_normal(d, kIntr);
  const Eigen::Vector3d expected = -n;  // oriented toward the camera
  size_t checked = 0;
  for (int y = 1; y < 47; ++y)
    for (int x = 1; x < 63; ++x) {
      if (!nm.valid.at(x, y)) continue;
      CHECK((nm.normal.at(x, y) - expected).norm() < 1e-3);
      ++checked;
    }
  CHECK(checked > 1000);
}

TEST_CASE("depth_to_normal: random plane property") {
  subsplat::sim::Rng rng(23);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::Vector3d n(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), 1.0);
    n.normalize();
    const DepthMap d = plane_depth(n, rng.uniform(1.0, 3.0), kIntr);
    const NormalMap nm = depth_to_normal(d, kIntr);
    for (int y = 1; y < 47; y += 5)
      for (int x = 1; x < 63; x += 5) {
        if (!nm.valid.at(x, y)) continue;
        CHECK((nm.normal.at(x, y) + n).norm() < 1e-3);
      }
  }
}

TEST_CASE("depth_to_normal: isolated pixel has no normal") {
  DepthMap d(16, 16);
  d.value.at(8, 8) = 1.0;
  d.valid.at(8, 8) = 1;
  const NormalMap nm = depth_to_normal(d, Intrinsics(10, 10, 8, 8, 16, 16));
  for (size_t i = 0; i < nm.valid.size(); ++i) CHECK_FALSE(nm.valid[i]);
}
