// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Every tolerance is pinned here, in code.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "subsplat/core/align.hpp"
#include "subsplat/core/metrics.hpp"
#include "subsplat/loop/optimize.hpp"
#include "subsplat/pipeline/report.hpp"
#include "subsplat/pipeline/slam.hpp"
#include "subsplat/sim/encoder.hpp"
#include "subsplat/sim/render.hpp"
#include "subsplat/sim/scene.hpp"
#include "subsplat/sim/trajectory.hpp"
#include "subsplat/splat/losses.hpp"
#include "subsplat/splat/mapper.hpp"
#include "subsplat/track/tracker.hpp"
#include "testutil.hpp"

using namespace subsplat;
namespace fs = std::filesystem;

namespace {

const core::Intrinsics kIntr(60.0, 60.0, 32.0, 24.0, 64, 48);

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

struct Chain {
  std::vector<sim::Frame> frames;
  std::vector<track::Submap> submaps;
  std::vector<double> injected_scales;
};

Chain build_chain(int n_submaps, const sim::CorruptionConfig& cfg, uint64_t scene_seed) {
  constexpr int kSubmapSize = 6;
  const int n_frames = kSubmapSize * n_submaps + 1;
  const sim::SyntheticScene scene = sim::generate_scene(sim::SceneKind::kRoom, scene_seed);
  const auto poses =
      sim::generate_trajectory(sim::TrajectoryKind::kOrbit, n_frames, scene.centroid, 1.5);
  Chain chain;
  for (size_t i = 0; i < poses.size(); ++i) {
    sim::Frame f = sim::render_ground_truth(scene, poses[i], kIntr);
    f.index = int(i);
    chain.frames.push_back(std::move(f));
  }
  for (int s = 0; s < n_submaps; ++s) {
    const size_t begin = size_t(s) * kSubmapSize;
    const std::vector<sim::Frame> window(chain.frames.begin() + begin,
                                         chain.frames.begin() + begin + kSubmapSize + 1);
    const auto local = sim::simulate_encoder(window, kIntr, cfg, uint64_t(s));
    chain.injected_scales.push_back(local.injected_scale);
    chain.submaps.push_back(s == 0
                                ? track::bootstrap_first_submap(local, kIntr)
                                : track::register_submap(chain.submaps.back(), local, kIntr));
  }
  return chain;
}

// ---------------------------------------------------------------------------
// 1. Exactness of the inter-submap registration chain
// ---------------------------------------------------------------------------
bool criterion_1(std::string& detail) {
  const auto t0 = std::chrono::steady_clock::now();
  const Chain chain = build_chain(10, sim::CorruptionConfig{}, 11);
  std::vector<core::Pose> est, gt;
  const core::Pose frame0 = chain.frames[0].gt_pose;
  for (const track::Submap& sm : chain.submaps)
    for (size_t j = (sm.id == 0 ? 0 : 1); j < sm.size(); ++j) {
      est.push_back(sm.world_poses[j]);
      gt.push_back(frame0.inverse() * chain.frames[size_t(sm.frame_indices[j])].gt_pose);
    }
  const double ate = core::ate_rmse(est, gt, core::AteAlignment::kNone);
  const double elapsed = seconds_since(t0);
  char buf[160];
  std::snprintf(buf, sizeof(buf), "unaligned ATE %.3e m (tol 1e-8), runtime %.1f s (tol 10 s)",
                ate, elapsed);
  detail = buf;
  return ate < 1e-8 && elapsed < 10.0;
}

// ---------------------------------------------------------------------------
// 2. Scale recovery under per-submap scale corruption
// ---------------------------------------------------------------------------
bool criterion_2(std::string& detail) {
  double worst_scale_err = 0.0;
  double worst_chamfer = 0.0;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    sim::CorruptionConfig cfg;
    cfg.scale_sigma = 0.2;
    cfg.seed = seed;
    const Chain chain = build_chain(4, cfg, 20 + seed);

    for (size_t s = 1; s < chain.submaps.size(); ++s) {
      const double expected = chain.injected_scales[0] / chain.injected_scales[s];
      worst_scale_err = std::max(
          worst_scale_err, std::abs(chain.submaps[s].scale_factor - expected) / expected);
    }

    // World geometry must match ground truth in the chain's gauge (the first
    // submap's injected scale, which is unobservable by construction).
    const double gauge = chain.injected_scales[0];
    const core::Pose frame0_inv = chain.frames[0].gt_pose.inverse();
    std::vector<Eigen::Vector3d> rec, ref;
    for (const track::Submap& sm : chain.submaps)
      for (size_t j = 0; j < sm.size(); ++j) {
        const core::PointMap gt_pts = core::unproject(
            chain.frames[size_t(sm.frame_indices[j])].gt_depth, kIntr,
            frame0_inv * chain.frames[size_t(sm.frame_indices[j])].gt_pose);
        for (int y = 0; y < gt_pts.height(); y += 6)
          for (int x = 0; x < gt_pts.width(); x += 6) {
            if (!gt_pts.valid.at(x, y) || !sm.world_points[j].valid.at(x, y)) continue;
            rec.push_back(sm.world_points[j].point.at(x, y));
            ref.push_back(gauge * gt_pts.point.at(x, y));
          }
      }
    const core::SurfaceError err = core::accuracy_completeness_chamfer(rec, ref);
    worst_chamfer = std::max(worst_chamfer, err.chamfer);
  }
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "worst relative scale error %.3e (tol 1e-6), worst chamfer %.3e m (tol 1e-6)",
                worst_scale_err, worst_chamfer);
  detail = buf;
  return worst_scale_err < 1e-6 && worst_chamfer < 1e-6;
}

// ---------------------------------------------------------------------------
// 3. Scale-invariant depth loss property suite
// ---------------------------------------------------------------------------
bool criterion_3(std::string& detail) {
  sim::Rng rng(333);
  bool ok = true;

  core::DepthMap d = testutil::random_depth(rng, 16, 16);
  core::DepthMap d_hat = testutil::random_depth(rng, 16, 16);
  const core::Mask mask(16, 16, uint8_t{1});
  const double base = splat::scale_invariant_depth_loss(d_hat, d, mask);
  double worst_inv = 0.0;
  for (double c : {0.25, 3.0, 42.0}) {
    core::DepthMap scaled = d;
    for (auto& v : scaled.value.data()) v *= c;
    worst_inv = std::max(worst_inv,
                         std::abs(splat::scale_invariant_depth_loss(d_hat, scaled, mask) - base));
  }
  ok = ok && worst_inv < 1e-12;

  core::DepthMap two(2, 1), two_hat(2, 1);
  two.value[0] = two.value[1] = 1.0;
  two.valid[0] = two.valid[1] = 1;
  two_hat.value[0] = 1.0;
  two_hat.value[1] = std::exp(0.2);
  two_hat.valid[0] = two_hat.valid[1] = 1;
  const double hand = splat::scale_invariant_depth_loss(two_hat, two, core::Mask(2, 1, uint8_t{1}));
  ok = ok && std::abs(hand - 0.01) < 1e-12;

  splat::PixelAdjoints adj;
  splat::scale_invariant_depth_loss(d_hat, d, mask, &adj, 1.0);
  double worst_grad = 0.0;
  for (size_t i = 0; i < d_hat.value.size(); i += 5) {
    const double fd = testutil::central_difference(
        [&](double v) {
          core::DepthMap probe = d_hat;
          probe.value[i] = v;
          return splat::scale_invariant_depth_loss(probe, d, mask);
        },
        d_hat.value[i]);
    worst_grad = std::max(worst_grad, testutil::rel_error(adj.d_depth[i], fd));
  }
  ok = ok && worst_grad < 0.02;

  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "invariance %.2e (tol 1e-12), two-pixel |err| %.2e, grad err %.4f (tol 0.02)",
                worst_inv, std::abs(hand - 0.01), worst_grad);
  detail = buf;
  return ok;
}

// ---------------------------------------------------------------------------
// 4. Loop closure efficacy on drifted square loops
// ---------------------------------------------------------------------------
pipeline::PipelineConfig loop_battery_config(uint64_t seed) {
  pipeline::PipelineConfig cfg;
  cfg.scene_kind = "room";
  cfg.trajectory_kind = "square_loop";
  cfg.n_frames = 36;
  cfg.trajectory_radius = 1.5;
  cfg.keyframe_threshold = 1.0;  // keep every frame; the loop needs >10 keyframes
  cfg.image_width = 48;
  cfg.image_height = 32;
  cfg.focal = 42.0;
  cfg.seed = seed;
  cfg.corruption.pose_drift_trans = 0.005;
  cfg.corruption.pose_drift_rot = 0.001;
  cfg.corruption.seed = seed * 7 + 1;
  cfg.heldout_every = 1000;  // no held-out frames in this battery
  return cfg;
}

bool criterion_4(std::string& detail) {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<double> ate_tracker, ate_loop_s, ate_full;
  int loops_fired = 0;
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    pipeline::PipelineConfig tracker_cfg = loop_battery_config(seed);
    tracker_cfg.ablation = {false, false, false, false, false};
    tracker_cfg.normalize_flags();
    ate_tracker.push_back(pipeline::run_slam_synthetic(tracker_cfg).report.ate_rmse_m);

    pipeline::PipelineConfig loop_s_cfg = loop_battery_config(seed);
    loop_s_cfg.ablation = {false, true, false, false, false};
    loop_s_cfg.normalize_flags();
    const auto rs = pipeline::run_slam_synthetic(loop_s_cfg);
    ate_loop_s.push_back(rs.report.ate_rmse_m);
    for (const auto& e : rs.report.loop_events) loops_fired += e.accepted;

    pipeline::PipelineConfig full_cfg = loop_battery_config(seed);
    full_cfg.ablation = {true, true, true, true, false};
    ate_full.push_back(pipeline::run_slam_synthetic(full_cfg).report.ate_rmse_m);
  }
  const double med_tracker = median_of(ate_tracker);
  const double med_loop_s = median_of(ate_loop_s);
  const double med_full = median_of(ate_full);
  const double elapsed = seconds_since(t0);
  char buf[240];
  std::snprintf(buf, sizeof(buf),
                "median ATE tracker %.4f, loop_s %.4f (tol <= 0.5x), full %.4f (tol <= loop_s); "
                "%d loops, %.0f s (tol 300 s)",
                med_tracker, med_loop_s, med_full, loops_fired, elapsed);
  detail = buf;
  return med_loop_s <= 0.5 * med_tracker && med_full <= med_loop_s && elapsed < 300.0;
}

// ---------------------------------------------------------------------------
// 5. Two-submap joint alignment equals closed-form rigid Umeyama
// ---------------------------------------------------------------------------
bool criterion_5(std::string& detail) {
  sim::Rng rng(555);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Eigen::Vector3d> pts;
    for (int i = 0; i < 500; ++i)
      pts.emplace_back(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(1, 3));
    const core::Pose g = testutil::random_pose(rng, 0.4, 0.5);
    loop::PointPairBlock block;
    block.submap_a = 0;
    block.submap_b = 1;
    block.points_a = pts;
    for (const auto& p : pts) block.points_b.push_back(g * p);

    const loop::LoopOptimizeResult res = loop::optimize_loop(2, {block});
    const core::Sim3Alignment oracle = core::umeyama(block.points_b, block.points_a, false);
    const core::Pose diff = res.transforms.of(1).inverse() * oracle.pose;
    worst = std::max(worst, diff.translation().norm() +
                                core::so3_log(diff.quaternion()).norm());
  }
  char buf[120];
  std::snprintf(buf, sizeof(buf), "worst pose gap vs closed form %.3e (tol 1e-6)", worst);
  detail = buf;
  return worst < 1e-6;
}

// ---------------------------------------------------------------------------
// 6. Analytic gradients of every pose/map loss term; pose recovery
// ---------------------------------------------------------------------------
struct TermSpec {
  std::string name;
  std::function<double(const splat::SplatMap&, const core::Pose&, splat::PixelAdjoints*,
                       splat::RenderGrads*)>
      eval;
};

bool criterion_6(std::string& detail) {
  sim::Rng rng(666);
  const splat::SplatMap base_map = testutil::random_splats(rng, 3, 1.2, 2.0);
  const core::Pose base_pose = testutil::random_pose(rng, 0.03, 0.03);

  // A fixed observation the loss terms compare against (stable masks: taken
  // from the base render but perturbed away from exact equality).
  splat::RenderCache cache;
  const splat::RenderOutput base_render =
      splat::render_with_cache(base_map, base_pose, kIntr, cache);
  core::ColorImage obs_color = base_render.color;
  core::DepthMap obs_depth = base_render.depth;
  for (size_t i = 0; i < obs_color.size(); ++i) {
    obs_color[i] = (obs_color[i] + Eigen::Vector3d(rng.uniform(0.02, 0.1), rng.uniform(0.02, 0.1),
                                                   rng.uniform(0.02, 0.1)))
                       .cwiseMin(1.0);
    if (obs_depth.valid[i]) obs_depth.value[i] *= 1.0 + rng.uniform(0.02, 0.06);
  }
  // Frozen mask with margin against validity flips under FD steps.
  core::Mask mask(kIntr.width, kIntr.height, uint8_t{0});
  for (size_t i = 0; i < mask.size(); ++i)
    mask[i] = (base_render.silhouette[i] > 0.7 && obs_depth.valid[i]) ? 1 : 0;
  const core::NormalMap obs_normals = core::depth_to_normal(obs_depth, kIntr);

  std::vector<TermSpec> terms;
  terms.push_back({"L_C", [&](const splat::SplatMap& m, const core::Pose& p,
                              splat::PixelAdjoints* adj, splat::RenderGrads*) {
                     const splat::RenderOutput r = splat::render(m, p, kIntr);
                     return splat::photometric_l1(r.color, obs_color, &mask, adj, 1.0);
                   }});
  terms.push_back({"L_scaleD", [&](const splat::SplatMap& m, const core::Pose& p,
                                   splat::PixelAdjoints* adj, splat::RenderGrads*) {
                     const splat::RenderOutput r = splat::render(m, p, kIntr);
                     return splat::scale_invariant_depth_loss(r.depth, obs_depth, mask, adj, 1.0);
                   }});
  terms.push_back({"L_pho_ssim", [&](const splat::SplatMap& m, const core::Pose& p,
                                     splat::PixelAdjoints* adj, splat::RenderGrads*) {
                     const splat::RenderOutput r = splat::render(m, p, kIntr);
                     core::ColorImage d_r;
                     const double s = splat::ssim_with_grad(r.color, obs_color, adj ? &d_r : nullptr);
                     if (adj) {
                       if (adj->d_color.empty())
                         adj->d_color =
                             core::ColorImage(kIntr.width, kIntr.height, Eigen::Vector3d::Zero());
                       for (size_t i = 0; i < d_r.size(); ++i) adj->d_color[i] += -0.2 * d_r[i];
                     }
                     return 0.2 * (1.0 - s);
                   }});
  terms.push_back({"L_D", [&](const splat::SplatMap& m, const core::Pose& p,
                              splat::PixelAdjoints* adj, splat::RenderGrads*) {
                     const splat::RenderOutput r = splat::render(m, p, kIntr);
                     return splat::inverse_depth_l1(r.depth, obs_depth, mask, adj, 1.0);
                   }});
  terms.push_back({"L_DN", [&](const splat::SplatMap& m, const core::Pose& p,
                               splat::PixelAdjoints* adj, splat::RenderGrads*) {
                     const splat::RenderOutput r = splat::render(m, p, kIntr);
                     return splat::depth_normal_loss(r.depth, obs_normals, kIntr, adj, 1.0);
                   }});
  terms.push_back({"L_N", [&](const splat::SplatMap& m, const core::Pose& p,
                              splat::PixelAdjoints* adj, splat::RenderGrads*) {
                     const splat::RenderOutput r = splat::render(m, p, kIntr);
                     return splat::rendered_normal_loss(r.normal, obs_normals, adj, 1.0);
                   }});
  terms.push_back({"L_S", [&](const splat::SplatMap& m, const core::Pose&, splat::PixelAdjoints*,
                              splat::RenderGrads* g) {
                     return splat::scale_regularizer(m, g, 1.0);
                   }});

  double worst = 0.0;
  std::string worst_term;
  const double step = 1e-4;
  for (const TermSpec& term : terms) {
    splat::PixelAdjoints adj;
    splat::RenderGrads direct;
    direct.resize(base_map.size());
    term.eval(base_map, base_pose, &adj, &direct);
    splat::RenderCache c2;
    const splat::RenderOutput r2 = splat::render_with_cache(base_map, base_pose, kIntr, c2);
    splat::RenderGrads grads;
    splat::render_backward(base_map, c2, r2, adj, grads);
    grads.add_scaled(direct, 1.0);

    auto fd_check = [&](double analytic,
                        const std::function<void(splat::SplatMap&, core::Pose&, double)>& go) {
      splat::SplatMap mp = base_map;
      core::Pose pp = base_pose;
      go(mp, pp, step);
      const double hi = term.eval(mp, pp, nullptr, nullptr);
      mp = base_map;
      pp = base_pose;
      go(mp, pp, -step);
      const double lo = term.eval(mp, pp, nullptr, nullptr);
      const double fd = (hi - lo) / (2.0 * step);
      const double err = testutil::rel_error(analytic, fd, 1e-6);
      if (err > worst) {
        worst = err;
        worst_term = term.name;
      }
    };

    for (size_t si = 0; si < base_map.size(); ++si) {
      for (int a = 0; a < 3; ++a) {
        fd_check(grads.d_position[si](a),
                 [&, si, a](splat::SplatMap& m, core::Pose&, double h) {
                   m.splats[si].position(a) += h;
                 });
        fd_check(grads.d_scale[si](a), [&, si, a](splat::SplatMap& m, core::Pose&, double h) {
          m.splats[si].scale(a) += h;
        });
        fd_check(grads.d_rotation[si](a), [&, si, a](splat::SplatMap& m, core::Pose&, double h) {
          Eigen::Vector3d w = Eigen::Vector3d::Zero();
          w(a) = h;
          m.splats[si].rotation = m.splats[si].rotation * core::so3_exp(w);
        });
        fd_check(grads.d_color[si](a), [&, si, a](splat::SplatMap& m, core::Pose&, double h) {
          m.splats[si].color(a) += h;
        });
      }
      fd_check(grads.d_opacity[si], [&, si](splat::SplatMap& m, core::Pose&, double h) {
        m.splats[si].opacity += h;
      });
    }
    for (int a = 0; a < 3; ++a) {
      fd_check(grads.d_pose_rot(a), [&, a](splat::SplatMap&, core::Pose& p, double h) {
        Eigen::Vector3d w = Eigen::Vector3d::Zero();
        w(a) = h;
        p = p.right_update(w, Eigen::Vector3d::Zero());
      });
      fd_check(grads.d_pose_trans(a), [&, a](splat::SplatMap&, core::Pose& p, double h) {
        Eigen::Vector3d t = Eigen::Vector3d::Zero();
        t(a) = h;
        p = p.right_update(Eigen::Vector3d::Zero(), t);
      });
    }
  }
  const bool grads_ok = worst < 0.02;

  // Pose recovery on the textured room.
  const sim::SyntheticScene scene = sim::generate_scene(sim::SceneKind::kRoom, 31);
  const core::Pose true_pose =
      sim::look_at(Eigen::Vector3d(0.0, -0.4, 1.4), Eigen::Vector3d(0.0, 2.9, 1.1));
  const sim::Frame frame = sim::render_ground_truth(scene, true_pose, kIntr);
  splat::SplatMap map;
  {
    splat::RegisteredView seed_view;
    seed_view.color = frame.color;
    seed_view.pose = true_pose;
    seed_view.depth = frame.gt_depth;
    seed_view.points = core::unproject(frame.gt_depth, kIntr, true_pose);
    seed_view.silhouette = core::GrayImage(kIntr.width, kIntr.height, 0.0);
    splat::densify(map, seed_view, kIntr, 1);
  }
  const Eigen::Vector3d axis = Eigen::Vector3d(0.3, -0.5, 0.8).normalized();
  splat::ViewObservation obs{frame.color, frame.gt_depth,
                             true_pose.right_update(0.02 * axis,
                                                    Eigen::Vector3d(0.012, -0.012, 0.01))};
  const splat::PoseRefineResult refined =
      splat::refine_pose_intra(map, obs, kIntr, splat::LossWeights{}, 50);
  const double pose_err = (refined.pose.translation() - true_pose.translation()).norm();

  char buf[240];
  std::snprintf(buf, sizeof(buf),
                "worst grad err %.4f in %s (tol 0.02); pose recovery %.2e m (tol 2e-3)", worst,
                worst_term.c_str(), pose_err, refined.skipped ? -1.0 : 0.0);
  detail = buf;
  return grads_ok && !refined.skipped && pose_err < 2e-3;
}

// ---------------------------------------------------------------------------
// 7. Exposure compensation closed-form recovery
// ---------------------------------------------------------------------------
bool criterion_7(std::string& detail) {
  sim::Rng rng(777);
  core::ColorImage rendered(24, 24, Eigen::Vector3d::Zero());
  for (auto& px : rendered.data())
    px = Eigen::Vector3d(rng.uniform(0, 0.7), rng.uniform(0, 0.7), rng.uniform(0, 0.7));
  core::ColorImage observed = rendered;
  for (auto& px : observed.data()) px = 1.2 * px + Eigen::Vector3d::Constant(0.05);
  const splat::ExposureFit fit =
      splat::fit_exposure(rendered, observed, core::Mask(24, 24, uint8_t{1}));
  const double gain_err = (fit.gain - 1.2 * Eigen::Matrix3d::Identity()).norm();
  const double bias_err = (fit.bias - Eigen::Vector3d::Constant(0.05)).norm();
  char buf[160];
  std::snprintf(buf, sizeof(buf), "gain err %.3e, bias err %.3e (tol 1e-9)", gain_err, bias_err);
  detail = buf;
  return !fit.degenerate && gain_err < 1e-9 && bias_err < 1e-9;
}

// ---------------------------------------------------------------------------
// 8. Map compactness on a 200-keyframe room
// ---------------------------------------------------------------------------
bool criterion_8(std::string& detail) {
  pipeline::PipelineConfig cfg;
  cfg.scene_kind = "room";
  cfg.trajectory_kind = "orbit";
  cfg.n_frames = 201;
  cfg.keyframe_threshold = 1.0;  // every frame is a keyframe: 201 of them
  cfg.seed = 8;
  cfg.ablation = {false, false, false, true, false};  // mapper only
  cfg.normalize_flags();
  const pipeline::SlamResult result = pipeline::run_slam_synthetic(cfg);

  size_t valid_pixels = 0;
  for (const splat::RegisteredView& v : result.views)
    for (uint8_t m : v.depth.valid.data()) valid_pixels += m;

  const fs::path dir = fs::temp_directory_path() / "subsplat_acceptance_c8";
  fs::remove_all(dir);
  pipeline::export_artifacts(result, dir.string());
  const auto map_bytes = fs::file_size(dir / "map.ply");
  const auto dense_bytes = fs::file_size(dir / "points_dense.ply");
  fs::remove_all(dir);

  const double frac = double(result.report.splat_count) / double(valid_pixels);
  const double ratio = double(dense_bytes) / double(map_bytes);
  char buf[240];
  std::snprintf(buf, sizeof(buf),
                "%zu keyframes, %zu splats = %.2f%% of %zu px (tol 5%%); dense/map bytes "
                "%.1fx (tol >= 10x)",
                result.report.keyframes, result.report.splat_count, 100.0 * frac, valid_pixels,
                ratio);
  detail = buf;
  return result.report.keyframes >= 200 && frac < 0.05 && ratio >= 10.0;
}

// ---------------------------------------------------------------------------
// 9. Novel-view PSNR improves (or holds) across global bundle adjustment
// ---------------------------------------------------------------------------
bool criterion_9(std::string& detail) {
  std::vector<double> pre, post;
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    pipeline::PipelineConfig cfg;
    cfg.scene_kind = "room";
    cfg.trajectory_kind = "orbit";
    cfg.n_frames = 32;
    cfg.keyframe_threshold = 1.0;
    cfg.seed = seed;
    cfg.gba_iters = 200;
    cfg.ablation = {false, false, true, true, true};  // mapper + intra + gba
    const pipeline::SlamResult result = pipeline::run_slam_synthetic(cfg);
    if (result.report.heldout_skipped || !result.report.heldout_psnr_median_pre_gba_db) continue;
    pre.push_back(*result.report.heldout_psnr_median_pre_gba_db);
    post.push_back(result.report.heldout_psnr_median_db);
  }
  if (pre.size() < 5) {
    detail = "insufficient usable runs (" + std::to_string(pre.size()) + "/5)";
    return false;
  }
  const double med_pre = median_of(pre);
  const double med_post = median_of(post);
  char buf[160];
  std::snprintf(buf, sizeof(buf), "median held-out PSNR %.2f dB before vs %.2f dB after GBA",
                med_pre, med_post);
  detail = buf;
  return med_post >= med_pre;
}

// ---------------------------------------------------------------------------
// 10. Byte-identical artifacts in deterministic mode
// ---------------------------------------------------------------------------
std::string slurp(const fs::path& p) {
  std::FILE* f = std::fopen(p.c_str(), "rb");
  if (!f) return {};
  std::string out;
  char buf[4096];
  size_t n;
  while ((n = std::fread(buf, 1, sizeof(buf), f)) > 0) out.append(buf, n);
  std::fclose(f);
  return out;
}

bool criterion_10(std::string& detail) {
  pipeline::PipelineConfig cfg;
  cfg.scene_kind = "room";
  cfg.trajectory_kind = "square_loop";
  cfg.n_frames = 24;
  cfg.keyframe_threshold = 1.0;
  cfg.seed = 10;
  cfg.deterministic = true;
  cfg.corruption.scale_sigma = 0.1;
  cfg.corruption.pose_drift_trans = 0.003;
  cfg.corruption.seed = 3;
  cfg.intra_iters = 15;  // determinism must hold regardless of effort level
  cfg.window_ba_iters = 8;
  cfg.gba_iters = 30;

  const fs::path dir_a = fs::temp_directory_path() / "subsplat_acceptance_det_a";
  const fs::path dir_b = fs::temp_directory_path() / "subsplat_acceptance_det_b";
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
  pipeline::export_artifacts(pipeline::run_slam_synthetic(cfg), dir_a.string());
  pipeline::export_artifacts(pipeline::run_slam_synthetic(cfg), dir_b.string());
  const bool traj_same = slurp(dir_a / "trajectory_est.txt") == slurp(dir_b / "trajectory_est.txt");
  const bool report_same = slurp(dir_a / "report.json") == slurp(dir_b / "report.json");
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
  detail = std::string("trajectory ") + (traj_same ? "identical" : "DIFFERS") + ", report " +
           (report_same ? "identical" : "DIFFERS");
  return traj_same && report_same;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    bool (*run)(std::string&);
  };
  const Criterion criteria[] = {
      {1, "inter-submap registration exactness", criterion_1},
      {2, "per-submap scale recovery", criterion_2},
      {3, "scale-invariant depth loss properties", criterion_3},
      {4, "loop closure efficacy", criterion_4},
      {5, "joint alignment vs closed-form oracle", criterion_5},
      {6, "loss-term gradients and pose recovery", criterion_6},
      {7, "exposure compensation recovery", criterion_7},
      {8, "map compactness", criterion_8},
      {9, "novel-view PSNR across global BA", criterion_9},
      {10, "deterministic artifacts", criterion_10},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    std::string detail;
    bool ok = false;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::printf("CRITERION %2d %-4s %s -- %s\n", c.id, ok ? "PASS" : "FAIL", c.name,
                detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  if (failures > 0) std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
