#include "subsplat/pipeline/slam.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "subsplat/core/metrics.hpp"
#include "subsplat/sim/tum_io.hpp"
#include "subsplat/track/keyframe.hpp"

namespace subsplat::pipeline {

namespace {

class StageTimer {
 public:
  explicit StageTimer(double& sink)
      : sink_(sink), start_(std::chrono::steady_clock::now()) {}
  ~StageTimer() {
    sink_ += std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  double& sink_;
  std::chrono::steady_clock::time_point start_;
};

double median_of(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

SlamPipeline::SlamPipeline(const PipelineConfig& config)
    : cfg_(config), intr_(config.intrinsics()), rng_(config.seed) {
  cfg_.normalize_flags();
  cfg_.validate();
}

void SlamPipeline::feed(const sim::Frame& frame) {
  if (finished_) throw std::logic_error("SlamPipeline: feed after finish");
  {
    StageTimer t(times_.tracking_s);
    bool is_keyframe = true;
    if (last_kf_features_) {
      is_keyframe = track::keyframe_overlap(frame.features, *last_kf_features_,
                                            cfg_.keyframe_beta, cfg_.keyframe_threshold)
                        .is_keyframe;
    }
    if (!is_keyframe) return;
    last_kf_features_ = frame.features;
    pending_.push_back(frame);
  }

  const size_t need = submaps_.empty() ? size_t(cfg_.submap_size + 1) : size_t(cfg_.submap_size);
  if (pending_.size() < need) return;

  std::vector<sim::Frame> window;
  if (overlap_frame_) window.push_back(*overlap_frame_);
  for (const sim::Frame& f : pending_) window.push_back(f);
  pending_.clear();
  complete_window(std::move(window));
}

void SlamPipeline::complete_window(std::vector<sim::Frame> window) {
  {
    StageTimer t(times_.tracking_s);
    const sim::LocalSubmapOutput local =
        sim::simulate_encoder(window, intr_, cfg_.corruption, uint64_t(submaps_.size()));
    track::Submap submap = submaps_.empty()
                               ? track::bootstrap_first_submap(local, intr_)
                               : track::register_submap(submaps_.back(), local, intr_);
    submaps_.push_back(std::move(submap));
  }
  process_submap(window);
  overlap_frame_ = window.back();
}

void SlamPipeline::process_submap(const std::vector<sim::Frame>& window) {
  track::Submap& sm = submaps_.back();
  sm.keyframe_ids.assign(window.size(), -1);
  std::vector<int> new_ids;

  for (size_t j = 0; j < window.size(); ++j) {
    if (sm.id > 0 && j == 0) {
      // Overlap frame: already registered by the previous submap.
      sm.keyframe_ids[0] = submaps_[size_t(sm.id) - 1].keyframe_ids.back();
      continue;
    }
    const int kf_id = int(buffer_.size());
    splat::RegisteredView view;
    view.keyframe_id = kf_id;
    view.frame_index = window[j].index;
    view.submap_id = sm.id;
    view.held_out = cfg_.heldout_every > 0 && ((kf_id + 1) % cfg_.heldout_every == 0);
    view.color = window[j].color;
    view.pose = sm.world_poses[j];
    view.depth = sm.depths[j];
    view.points = sm.world_points[j];
    view.silhouette = core::GrayImage(intr_.width, intr_.height, 0.0);

    if (cfg_.ablation.mapper && map_.size() > 0) {
      StageTimer t(times_.mapping_s);
      const splat::ViewObservation obs{view.color, view.depth, view.pose};
      if (cfg_.ablation.intra) {
        const splat::PoseRefineResult refined = splat::refine_pose_intra(
            map_, obs, intr_, cfg_.weights, cfg_.intra_iters, cfg_.rates);
        if (!refined.skipped) {
          const splat::RenderOutput ro = splat::render(map_, refined.pose, intr_);
          const splat::RescaleResult rs =
              splat::rescale_and_reproject(obs, refined.pose, ro, intr_);
          view.pose = refined.pose;
          view.depth = rs.depth;
          view.points = rs.points;
          view.silhouette = ro.silhouette;
        }
      } else {
        view.silhouette = splat::render(map_, view.pose, intr_).silhouette;
      }
    }
    if (cfg_.ablation.mapper && !view.held_out) {
      StageTimer t(times_.mapping_s);
      splat::densify(map_, view, intr_, cfg_.densify_stride);
    }

    buffer_.append(view);
    kf_frames_.push_back(window[j]);
    kf_submap_.push_back(sm.id);
    sm.keyframe_ids[j] = kf_id;
    new_ids.push_back(kf_id);
  }

  // Covisibility and loop detection per new keyframe.
  if (cfg_.ablation.loop || cfg_.ablation.loop_s) {
    StageTimer t(times_.loop_s);
    for (int kf_id : new_ids) {
      std::vector<const splat::RegisteredView*> previous;
      for (int i = 0; i < kf_id; ++i) previous.push_back(&buffer_.unsafe_view(i));
      loop::covisibility_update(graph_, buffer_.unsafe_view(kf_id), previous, intr_);

      std::vector<const splat::RegisteredView*> all;
      std::vector<const sim::FeatureMap*> features;
      for (size_t i = 0; i < buffer_.size(); ++i) {
        all.push_back(&buffer_.unsafe_view(int(i)));
        features.push_back(&kf_frames_[i].features);
      }
      loop::LoopDetectConfig dc;
      dc.min_temporal_distance = cfg_.loop_temporal_distance;
      dc.score_threshold = cfg_.loop_score_threshold;
      dc.weight_points = cfg_.loop_weight_points;
      dc.weight_features = cfg_.loop_weight_features;
      const auto cand =
          loop::detect_loop(graph_, buffer_.unsafe_view(kf_id), all, features, intr_, dc);
      if (!cand) continue;
      if (in_cooldown(*cand)) {
        loop_events_.push_back(
            {cand->current_id, cand->matched_id, cand->r_points, cand->r_features, cand->score,
             false});
        continue;
      }
      handle_candidate(*cand);
    }
  } else {
    // Keep the graph current even when loop closure is ablated.
    StageTimer t(times_.loop_s);
    for (int kf_id : new_ids) {
      std::vector<const splat::RegisteredView*> previous;
      for (int i = 0; i < kf_id; ++i) previous.push_back(&buffer_.unsafe_view(i));
      loop::covisibility_update(graph_, buffer_.unsafe_view(kf_id), previous, intr_);
    }
  }

  if (cfg_.ablation.mapper) {
    StageTimer t(times_.mapping_s);
    std::vector<splat::RegisteredView*> window_views = mapping_views(submaps_.size() - 1);
    if (!window_views.empty())
      splat::bundle_adjust_window(map_, window_views, intr_, cfg_.weights, cfg_.window_ba_iters,
                                  cfg_.rates);
    run_feedback(sm);
  }
}

std::vector<splat::RegisteredView*> SlamPipeline::mapping_views(size_t submap_index) {
  std::vector<splat::RegisteredView*> views;
  const track::Submap& sm = submaps_[submap_index];
  std::vector<int> in_window;
  for (int kf_id : sm.keyframe_ids) {
    if (kf_id < 0 || buffer_.unsafe_view(kf_id).held_out) continue;
    views.push_back(&buffer_.unsafe_view(kf_id));
    in_window.push_back(kf_id);
  }
  // A few random past keyframes guard against overfitting the newest views.
  std::vector<int> candidates;
  for (size_t i = 0; i < buffer_.size(); ++i) {
    const int id = int(i);
    if (buffer_.unsafe_view(id).held_out) continue;
    if (std::find(in_window.begin(), in_window.end(), id) != in_window.end()) continue;
    candidates.push_back(id);
  }
  for (int k = 0; k < cfg_.window_extra_views && !candidates.empty(); ++k) {
    const size_t pick = size_t(rng_.uniform_int(0, int(candidates.size()) - 1));
    views.push_back(&buffer_.unsafe_view(candidates[pick]));
    candidates.erase(candidates.begin() + long(pick));
  }
  return views;
}

bool SlamPipeline::in_cooldown(const loop::LoopCandidate& cand) const {
  for (const auto& [cur, matched] : accepted_loops_) {
    if (std::abs(cand.current_id - cur) < cfg_.loop_cooldown &&
        std::abs(cand.matched_id - matched) < cfg_.loop_cooldown)
      return true;
  }
  return false;
}

void SlamPipeline::handle_candidate(const loop::LoopCandidate& cand) {
  const track::Submap& matched_submap = submaps_[size_t(kf_submap_[size_t(cand.matched_id)])];
  // Loop window: the matched submap's first K frames plus the current frame.
  std::vector<sim::Frame> matched_frames;
  for (size_t n = 0; n + 1 < matched_submap.keyframe_ids.size(); ++n)
    matched_frames.push_back(kf_frames_[size_t(matched_submap.keyframe_ids[n])]);

  const auto loop_submap = loop::build_loop_submap(
      matched_frames, kf_frames_[size_t(cand.current_id)], matched_submap.world_poses.front(),
      matched_submap.depths.front(), intr_, cfg_.corruption,
      0x100000u + accepted_loops_.size(), -1);
  if (!loop_submap) {
    loop_events_.push_back(
        {cand.current_id, cand.matched_id, cand.r_points, cand.r_features, cand.score, false});
    return;
  }

  const track::Submap& current_submap = submaps_[size_t(kf_submap_[size_t(cand.current_id)])];
  size_t j = 0;
  for (size_t k = 0; k < current_submap.keyframe_ids.size(); ++k)
    if (current_submap.keyframe_ids[k] == cand.current_id) j = k;

  std::vector<loop::PointPairBlock> blocks = loop::adjacency_blocks(submaps_);
  blocks.push_back(loop::make_point_block(current_submap.id, matched_submap.id,
                                          current_submap.world_points[j],
                                          loop_submap->world_points.back()));

  loop::LoopOptimizeOptions opts;
  opts.max_iters = cfg_.loop_max_iters;
  opts.fallback_lr = cfg_.loop_lr;
  const loop::LoopOptimizeResult result =
      loop::optimize_loop(int(submaps_.size()), blocks, opts);

  apply_submap_transforms(result.transforms);
  accepted_loops_.emplace_back(cand.current_id, cand.matched_id);
  loop_events_.push_back(
      {cand.current_id, cand.matched_id, cand.r_points, cand.r_features, cand.score, true});

  if (cfg_.ablation.loop && cfg_.ablation.mapper) {
    loop::apply_transforms_to_map(map_, result.transforms);
    run_global_pose_adjust_and_feedback();
    if (cfg_.ablation.gba) run_gba();
  }
}

void SlamPipeline::apply_submap_transforms(const loop::SubmapTransforms& transforms) {
  for (track::Submap& sm : submaps_) {
    const core::Pose& t = transforms.of(sm.id);
    for (size_t j = 0; j < sm.size(); ++j) {
      sm.world_poses[j] = t * sm.world_poses[j];
      for (size_t i = 0; i < sm.world_points[j].point.size(); ++i)
        if (sm.world_points[j].valid[i])
          sm.world_points[j].point[i] = t * sm.world_points[j].point[i];
    }
  }
  for (size_t i = 0; i < buffer_.size(); ++i) {
    splat::RegisteredView& view = buffer_.unsafe_view(int(i));
    const core::Pose& t = transforms.of(kf_submap_[i]);
    view.pose = t * view.pose;
    for (size_t k = 0; k < view.points.point.size(); ++k)
      if (view.points.valid[k]) view.points.point[k] = t * view.points.point[k];
  }
}

void SlamPipeline::run_feedback(track::Submap& submap) {
  std::vector<const splat::RegisteredView*> views;
  for (int kf_id : submap.keyframe_ids) views.push_back(&buffer_.unsafe_view(kf_id));
  const auto feedback = splat::feedback_views(map_, views, intr_);

  track::SubmapFeedback fb;
  for (const splat::ViewFeedback& vf : feedback) {
    fb.poses.push_back(vf.pose);
    fb.depths.push_back(vf.depth);
    buffer_.update(vf.keyframe_id, [&](splat::RegisteredView& v) {
      v.pose = vf.pose;
      v.depth = vf.depth;
      v.points = vf.points;
    });
  }
  track::apply_feedback(submap, fb, intr_);
}

void SlamPipeline::run_global_pose_adjust_and_feedback() {
  StageTimer t(times_.loop_s);
  std::vector<splat::RegisteredView*> views;
  for (size_t i = 0; i < buffer_.size(); ++i) views.push_back(&buffer_.unsafe_view(int(i)));
  loop::global_pose_adjust(map_, views, intr_, cfg_.weights, cfg_.intra_iters, cfg_.rates);
  for (track::Submap& sm : submaps_) run_feedback(sm);
}

void SlamPipeline::run_gba() {
  StageTimer t(times_.gba_s);
  std::vector<splat::RegisteredView*> views;
  for (size_t i = 0; i < buffer_.size(); ++i)
    if (!buffer_.unsafe_view(int(i)).held_out) views.push_back(&buffer_.unsafe_view(int(i)));
  if (views.empty()) return;
  loop::GlobalBaOptions opts;
  opts.iters = cfg_.gba_iters;
  opts.densify_every = cfg_.densify_every;
  opts.densify_stride = cfg_.densify_stride;
  opts.lambda_depth = cfg_.lambda_depth_gba;
  opts.exposure = cfg_.exposure_in_gba;
  loop::global_bundle_adjust(map_, views, intr_, cfg_.weights, opts, cfg_.rates);
  for (track::Submap& sm : submaps_) run_feedback(sm);
}

std::vector<HeldoutRow> SlamPipeline::render_heldout() const {
  std::vector<HeldoutRow> rows;
  for (size_t i = 0; i < buffer_.size(); ++i) {
    const splat::RegisteredView& view = buffer_.unsafe_view(int(i));
    if (!view.held_out) continue;
    HeldoutRow row;
    row.keyframe_id = view.keyframe_id;
    const splat::RenderOutput ro = splat::render(map_, view.pose, intr_);
    core::Mask mask(intr_.width, intr_.height, uint8_t{0});
    size_t covered = 0;
    for (size_t k = 0; k < mask.size(); ++k) {
      mask[k] = ro.silhouette[k] > splat::kSilhouetteThreshold ? 1 : 0;
      covered += mask[k];
    }
    if (covered < mask.size() / 100) {
      row.skipped = true;
      rows.push_back(row);
      continue;
    }
    core::ColorImage compared = ro.color;
    if (cfg_.exposure_in_gba) {
      const splat::ExposureFit fit = splat::fit_exposure(ro.color, view.color, mask);
      if (!fit.degenerate) compared = splat::apply_exposure(ro.color, fit);
    }
    row.psnr_db = core::psnr(compared, view.color);
    row.ssim = core::ssim(compared, view.color);
    rows.push_back(row);
  }
  return rows;
}

SlamResult SlamPipeline::finish() {
  if (finished_) throw std::logic_error("SlamPipeline: finish called twice");
  finished_ = true;

  // Flush a final short submap if enough keyframes are pending.
  const size_t flush_min = submaps_.empty() ? 2 : 1;
  if (pending_.size() >= flush_min) {
    std::vector<sim::Frame> window;
    if (overlap_frame_) window.push_back(*overlap_frame_);
    for (const sim::Frame& f : pending_) window.push_back(f);
    pending_.clear();
    if (window.size() >= 2) complete_window(std::move(window));
  }

  SlamResult result;
  if (cfg_.ablation.gba && map_.size() > 0) {
    auto pre = render_heldout();
    std::vector<double> pre_psnr;
    for (const HeldoutRow& r : pre)
      if (!r.skipped) pre_psnr.push_back(r.psnr_db);
    if (!pre_psnr.empty())
      result.report.heldout_psnr_median_pre_gba_db = median_of(pre_psnr);
    run_gba();
  }

  RunReport& rep = result.report;
  rep.keyframes = buffer_.size();
  rep.submaps = submaps_.size();
  rep.splat_count = map_.size();
  rep.loop_events = loop_events_;

  for (size_t i = 0; i < buffer_.size(); ++i) {
    const splat::RegisteredView& v = buffer_.unsafe_view(int(i));
    result.views.push_back(v);
    result.estimated_poses.push_back(v.pose);
    result.gt_poses.push_back(kf_frames_[i].gt_pose);
    result.timestamps.push_back(kf_frames_[i].timestamp);
  }
  result.map = map_;
  result.submaps = submaps_;
  result.config = cfg_;

  // Trajectory error (Sim(3)-aligned; the monocular gauge is unobservable).
  core::Sim3Alignment gauge;
  bool gauge_ok = false;
  if (result.estimated_poses.size() >= 3) {
    try {
      rep.ate_rmse_m =
          core::ate_rmse(result.estimated_poses, result.gt_poses, core::AteAlignment::kSim3);
      std::vector<Eigen::Vector3d> est, gt;
      for (const core::Pose& p : result.estimated_poses) est.push_back(p.translation());
      for (const core::Pose& p : result.gt_poses) gt.push_back(p.translation());
      gauge = core::umeyama(est, gt, true);
      gauge_ok = true;
    } catch (const std::exception& e) {
      rep.ate_skipped = true;
      rep.ate_skip_reason = e.what();
    }
  } else {
    rep.ate_skipped = true;
    rep.ate_skip_reason = "fewer than 3 keyframes";
  }

  // Surface error against the ground-truth cloud, in the ground-truth gauge.
  if (gauge_ok) {
    std::vector<Eigen::Vector3d> reconstructed, reference;
    constexpr int kStride = 3;
    for (size_t i = 0; i < buffer_.size(); ++i) {
      const splat::RegisteredView& v = buffer_.unsafe_view(int(i));
      for (int y = 0; y < v.points.height(); y += kStride)
        for (int x = 0; x < v.points.width(); x += kStride)
          if (v.points.valid.at(x, y)) reconstructed.push_back(gauge.apply(v.points.point.at(x, y)));
      const core::PointMap gt_pts =
          core::unproject(kf_frames_[i].gt_depth, intr_, kf_frames_[i].gt_pose);
      for (int y = 0; y < gt_pts.height(); y += kStride)
        for (int x = 0; x < gt_pts.width(); x += kStride)
          if (gt_pts.valid.at(x, y)) reference.push_back(gt_pts.point.at(x, y));
    }
    if (!reconstructed.empty() && !reference.empty()) {
      const core::SurfaceError err = core::accuracy_completeness_chamfer(reconstructed, reference);
      rep.accuracy_m = err.accuracy;
      rep.completeness_m = err.completeness;
      rep.chamfer_m = err.chamfer;
    } else {
      rep.surface_skipped = true;
      rep.surface_skip_reason = "no valid points";
    }
  } else {
    rep.surface_skipped = true;
    rep.surface_skip_reason = "trajectory gauge alignment unavailable";
  }

  // Held-out novel view synthesis.
  rep.heldout = render_heldout();
  std::vector<double> psnrs, ssims;
  for (const HeldoutRow& r : rep.heldout) {
    if (r.skipped) continue;
    psnrs.push_back(r.psnr_db);
    ssims.push_back(r.ssim);
  }
  if (psnrs.empty()) {
    rep.heldout_skipped = true;
    rep.heldout_skip_reason =
        rep.heldout.empty() ? "no held-out keyframes" : "no map coverage at held-out poses";
  } else {
    rep.heldout_psnr_median_db = median_of(psnrs);
    rep.heldout_ssim_median = median_of(ssims);
  }

  times_.total_s = times_.tracking_s + times_.mapping_s + times_.loop_s + times_.gba_s;
  rep.times = times_;
  return result;
}

SlamResult run_slam_frames(const PipelineConfig& config, const std::vector<sim::Frame>& frames) {
  SlamPipeline pipeline(config);
  for (const sim::Frame& frame : frames) pipeline.feed(frame);
  return pipeline.finish();
}

SlamResult run_slam_synthetic(const PipelineConfig& config) {
  PipelineConfig cfg = config;
  cfg.normalize_flags();
  cfg.validate();
  const sim::SyntheticScene scene =
      sim::generate_scene(sim::scene_kind_from_string(cfg.scene_kind), cfg.seed);
  const auto kind = sim::trajectory_kind_from_string(cfg.trajectory_kind);
  const std::vector<core::Pose> poses =
      sim::generate_trajectory(kind, cfg.n_frames, scene.centroid, cfg.trajectory_radius);
  const core::Intrinsics intr = cfg.intrinsics();

  std::vector<sim::Frame> frames;
  frames.reserve(poses.size());
  for (size_t i = 0; i < poses.size(); ++i) {
    sim::Frame f = sim::render_ground_truth(scene, poses[i], intr);
    f.index = int(i);
    f.timestamp = double(i) * 0.1;
    frames.push_back(std::move(f));
  }
  return run_slam_frames(cfg, frames);
}

SlamResult run_slam_tum(const PipelineConfig& config, const std::string& directory) {
  const sim::TumSequence seq = sim::load_tum_sequence(directory, config.intrinsics());
  return run_slam_frames(config, seq.frames);
}

}  // namespace subsplat::pipeline
