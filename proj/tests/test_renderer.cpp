#include <doctest.h>

#include <cmath>

#include "subsplat/splat/renderer.hpp"
#include "testutil.hpp"

using namespace subsplat;
using namespace subsplat::splat;

namespace {

const core::Intrinsics kIntr(60.0, 60.0, 32.0, 24.0, 64, 48);

Splat facing_splat(const Eigen::Vector3d& pos, double radius, double opacity,
                   const Eigen::Vector3d& color) {
  Splat s;
  s.position = pos;
  s.rotation = Eigen::Quaterniond::Identity();  // local z = world z = view axis
  s.scale = Eigen::Vector3d::Constant(radius);
  s.opacity = opacity;
  s.color = color;
  return s;
}

/// Fixed random adjoint fields contracted with the render outputs; used as a
/// scalar objective for finite-difference checks of the backward pass.
struct Objective {
  core::ColorImage a_color;
  core::GrayImage a_sil;
  core::GrayImage a_depth;      // support restricted to safely-valid pixels
  core::Image<Eigen::Vector3d> a_normal;

  static Objective random(const RenderOutput& base, subsplat::sim::Rng& rng) {
    Objective o;
    const int w = base.width(), h = base.height();
    o.a_color = core::ColorImage(w, h, Eigen::Vector3d::Zero());
    o.a_sil = core::GrayImage(w, h, 0.0);
    o.a_depth = core::GrayImage(w, h, 0.0);
    o.a_normal = core::Image<Eigen::Vector3d>(w, h, Eigen::Vector3d::Zero());
    for (size_t i = 0; i < o.a_color.size(); ++i) {
      o.a_color[i] = Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
      o.a_sil[i] = rng.normal();
      // Depth/normal terms only where the silhouette has safe margin, so a
      // 1e-4 parameter step cannot flip the validity mask.
      if (base.silhouette[i] > 0.7) {
        o.a_depth[i] = rng.normal();
        o.a_normal[i] = Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
      }
    }
    return o;
  }

  double eval(const RenderOutput& out) const {
    double j = 0.0;
    for (size_t i = 0; i < a_color.size(); ++i) {
      j += a_color[i].dot(out.color[i]);
      j += a_sil[i] * out.silhouette[i];
      if (out.depth.valid[i]) j += a_depth[i] * out.depth.value[i];
      if (out.normal.valid[i]) j += a_normal[i].dot(out.normal.normal[i]);
    }
    return j;
  }

  PixelAdjoints adjoints() const {
    PixelAdjoints adj;
    adj.d_color = a_color;
    adj.d_silhouette = a_sil;
    adj.d_depth = a_depth;
    adj.d_normal = a_normal;
    return adj;
  }
};

}  // namespace

TEST_CASE("empty map renders zero silhouette and no valid depth") {
  SplatMap map;
  const RenderOutput out = render(map, core::Pose::identity(), kIntr);
  for (size_t i = 0; i < out.silhouette.size(); ++i) {
    CHECK(out.silhouette[i] == 0.0);
    CHECK_FALSE(out.depth.valid[i]);
  }
}

TEST_CASE("single opaque splat: unit depth at center, near-full silhouette") {
  SplatMap map;
  map.add(facing_splat({0, 0, 1}, 0.12, 1.0, {0.8, 0.2, 0.1}));
  const RenderOutput out = render(map, core::Pose::identity(), kIntr);
  REQUIRE(out.depth.valid.at(32, 24));
  CHECK(std::abs(out.depth.value.at(32, 24) - 1.0) < 1e-6);
  CHECK(out.silhouette.at(32, 24) >= 0.99);
  REQUIRE(out.normal.valid.at(32, 24));
  CHECK((out.normal.normal.at(32, 24) - Eigen::Vector3d(0, 0, -1)).norm() < 1e-9);
}

TEST_CASE("two opaque splats on one ray: the nearer one wins") {
  SplatMap map;
  map.add(facing_splat({0, 0, 1}, 0.12, 1.0, {1, 0, 0}));
  map.add(facing_splat({0, 0, 2}, 0.25, 1.0, {0, 1, 0}));
  const RenderOutput out = render(map, core::Pose::identity(), kIntr);
  REQUIRE(out.depth.valid.at(32, 24));
  // Hand compositing: a1 = 0.9999 (clamped), w1 = 0.9999, transmittance
  // 1e-4 stops the walk; depth = w1*1 / w1 = 1.
  CHECK(out.depth.value.at(32, 24) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(out.color.at(32, 24)(0) > 0.9);
  CHECK(out.color.at(32, 24)(1) < 0.05);
}

TEST_CASE("silhouette stays in [0,1] and color stays bounded on random scenes") {
  subsplat::sim::Rng rng(81);
  for (int trial = 0; trial < 3; ++trial) {
    const SplatMap map = testutil::random_splats(rng, 40);
    const core::Pose pose = testutil::random_pose(rng, 0.1, 0.1);
    const RenderOutput out = render(map, pose, kIntr);
    for (size_t i = 0; i < out.silhouette.size(); ++i) {
      CHECK(out.silhouette[i] >= 0.0);
      CHECK(out.silhouette[i] <= 1.0 + 1e-12);
      for (int c = 0; c < 3; ++c) {
        CHECK(out.color[i](c) >= -1e-12);
        CHECK(out.color[i](c) <= 1.0 + 1e-12);
      }
      if (out.depth.valid[i]) CHECK(out.depth.value[i] > 0.0);
      if (out.normal.valid[i])
        CHECK(out.normal.normal[i].norm() == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("coplanar surfels reproduce their plane's depth exactly") {
  // Surfels scattered on the plane z = 1.5 render depth 1.5 wherever valid.
  SplatMap map;
  subsplat::sim::Rng rng(82);
  for (int i = 0; i < 60; ++i) {
    Splat s = facing_splat({rng.uniform(-0.6, 0.6), rng.uniform(-0.45, 0.45), 1.5}, 0.08, 0.9,
                           {0.5, 0.5, 0.5});
    map.add(s);
  }
  const RenderOutput out = render(map, core::Pose::identity(), kIntr);
  size_t checked = 0;
  for (size_t i = 0; i < out.depth.value.size(); ++i) {
    if (!out.depth.valid[i]) continue;
    CHECK(out.depth.value[i] == doctest::Approx(1.5).epsilon(1e-9));
    ++checked;
  }
  CHECK(checked > 500);
}

TEST_CASE("render backward matches finite differences on random 3-splat scenes") {
  subsplat::sim::Rng rng(83);
  for (int trial = 0; trial < 2; ++trial) {
    SplatMap map = testutil::random_splats(rng, 3);
    const core::Pose pose = testutil::random_pose(rng, 0.05, 0.05);

    RenderCache cache;
    const RenderOutput base = render_with_cache(map, pose, kIntr, cache);
    const Objective obj = Objective::random(base, rng);
    RenderGrads grads;
    render_backward(map, cache, base, obj.adjoints(), grads);

    const double step = 1e-4;
    auto fd = [&](const std::function<void(SplatMap&, core::Pose&, double)>& perturb) {
      SplatMap mp = map;
      core::Pose pp = pose;
      perturb(mp, pp, step);
      const double hi = obj.eval(render(mp, pp, kIntr));
      mp = map;
      pp = pose;
      perturb(mp, pp, -step);
      const double lo = obj.eval(render(mp, pp, kIntr));
      return (hi - lo) / (2.0 * step);
    };

    for (size_t si = 0; si < map.size(); ++si) {
      for (int a = 0; a < 3; ++a) {
        const double g_pos = fd([&](SplatMap& m, core::Pose&, double h) {
          m.splats[si].position(a) += h;
        });
        CHECK(testutil::rel_error(grads.d_position[si](a), g_pos) < 0.02);

        const double g_rot = fd([&](SplatMap& m, core::Pose&, double h) {
          Eigen::Vector3d w = Eigen::Vector3d::Zero();
          w(a) = h;
          m.splats[si].rotation = m.splats[si].rotation * core::so3_exp(w);
        });
        CHECK(testutil::rel_error(grads.d_rotation[si](a), g_rot) < 0.02);

        const double g_scale = fd([&](SplatMap& m, core::Pose&, double h) {
          m.splats[si].scale(a) += h;
        });
        CHECK(testutil::rel_error(grads.d_scale[si](a), g_scale) < 0.02);

        const double g_color = fd([&](SplatMap& m, core::Pose&, double h) {
          m.splats[si].color(a) += h;
        });
        CHECK(testutil::rel_error(grads.d_color[si](a), g_color) < 0.02);
      }
      const double g_alpha = fd([&](SplatMap& m, core::Pose&, double h) {
        m.splats[si].opacity += h;
      });
      CHECK(testutil::rel_error(grads.d_opacity[si], g_alpha) < 0.02);
    }

    for (int a = 0; a < 3; ++a) {
      const double g_rot = fd([&](SplatMap&, core::Pose& p, double h) {
        Eigen::Vector3d w = Eigen::Vector3d::Zero();
        w(a) = h;
        p = p.right_update(w, Eigen::Vector3d::Zero());
      });
      CHECK(testutil::rel_error(grads.d_pose_rot(a), g_rot) < 0.02);

      const double g_trans = fd([&](SplatMap&, core::Pose& p, double h) {
        Eigen::Vector3d t = Eigen::Vector3d::Zero();
        t(a) = h;
        p = p.right_update(Eigen::Vector3d::Zero(), t);
      });
      CHECK(testutil::rel_error(grads.d_pose_trans(a), g_trans) < 0.02);
    }
  }
}

TEST_CASE("prune removes transparent splats and keeps ids stable") {
  SplatMap map;
  const uint64_t id_a = map.add(facing_splat({0, 0, 1}, 0.1, 0.5, {1, 0, 0}));
  const uint64_t id_b = map.add(facing_splat({0, 0, 2}, 0.1, 0.005, {0, 1, 0}));
  (void)id_b;
  CHECK(map.prune_transparent() == 1);
  REQUIRE(map.size() == 1);
  CHECK(map.splats[0].id == id_a);
  CHECK(map.next_id == 3);
}
