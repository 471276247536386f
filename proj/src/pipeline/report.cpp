#include "subsplat/pipeline/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "subsplat/core/ply_io.hpp"
#include "subsplat/core/trajectory_io.hpp"
#include "subsplat/splat/map_io.hpp"

namespace subsplat::pipeline {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string report_to_json(const RunReport& report, const PipelineConfig& config) {
  ordered_json j;
  j["units"] = {{"ate_rmse", "m"},        {"accuracy", "m"}, {"completeness", "m"},
                {"chamfer", "m"},         {"psnr", "dB"},    {"ssim", "unitless"},
                {"map_size", "splats"}};

  if (report.ate_skipped) {
    j["ate"] = {{"skipped", true}, {"reason", report.ate_skip_reason}};
  } else {
    j["ate"] = {{"rmse_m", report.ate_rmse_m}, {"alignment", report.ate_alignment}};
  }
  if (report.surface_skipped) {
    j["surface"] = {{"skipped", true}, {"reason", report.surface_skip_reason}};
  } else {
    j["surface"] = {{"accuracy_m", report.accuracy_m},
                    {"completeness_m", report.completeness_m},
                    {"chamfer_m", report.chamfer_m}};
  }
  if (report.heldout_skipped) {
    j["novel_view"] = {{"skipped", true}, {"reason", report.heldout_skip_reason}};
  } else {
    j["novel_view"] = {{"psnr_median_db", report.heldout_psnr_median_db},
                       {"ssim_median", report.heldout_ssim_median}};
  }
  if (report.heldout_psnr_median_pre_gba_db)
    j["novel_view_pre_gba"] = {{"psnr_median_db", *report.heldout_psnr_median_pre_gba_db}};

  ordered_json rows = ordered_json::array();
  for (const HeldoutRow& r : report.heldout) {
    if (r.skipped)
      rows.push_back({{"keyframe", r.keyframe_id}, {"skipped", true}});
    else
      rows.push_back({{"keyframe", r.keyframe_id}, {"psnr_db", r.psnr_db}, {"ssim", r.ssim}});
  }
  j["heldout_views"] = rows;

  j["keyframes"] = report.keyframes;
  j["submaps"] = report.submaps;
  j["splat_count"] = report.splat_count;

  ordered_json loops = ordered_json::array();
  for (const LoopEvent& e : report.loop_events)
    loops.push_back({{"frame_current", e.frame_current},
                     {"frame_matched", e.frame_matched},
                     {"r_points", e.r_points},
                     {"r_features", e.r_features},
                     {"score", e.score},
                     {"accepted", e.accepted}});
  j["loop_events"] = loops;

  ordered_json cfg;
  for (const auto& [k, v] : config.to_key_values()) cfg[k] = v;
  j["config"] = cfg;
  return j.dump(2) + "\n";
}

void export_artifacts(const SlamResult& result, const std::string& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (!fs::is_directory(out_dir))
    throw std::runtime_error("export_artifacts: cannot create directory " + out_dir);

  std::vector<core::TimedPose> est, gt;
  for (size_t i = 0; i < result.estimated_poses.size(); ++i) {
    est.push_back({result.timestamps[i], result.estimated_poses[i]});
    gt.push_back({result.timestamps[i], result.gt_poses[i]});
  }
  core::write_trajectory(out_dir + "/trajectory_est.txt", est);
  core::write_trajectory(out_dir + "/trajectory_gt.txt", gt);

  splat::write_splat_map(out_dir + "/map.ply", result.map);

  std::vector<core::PlyPoint> dense;
  for (const splat::RegisteredView& v : result.views) {
    for (int y = 0; y < v.points.height(); ++y)
      for (int x = 0; x < v.points.width(); ++x) {
        if (!v.points.valid.at(x, y)) continue;
        core::PlyPoint p;
        p.position = v.points.point.at(x, y);
        p.color = v.color.at(x, y);
        dense.push_back(p);
      }
  }
  core::write_ply_points(out_dir + "/points_dense.ply", dense);

  {
    std::ofstream out(out_dir + "/report.json");
    if (!out) throw std::runtime_error("export_artifacts: cannot write report.json");
    out << report_to_json(result.report, result.config);
  }
  {
    std::ofstream out(out_dir + "/loops.log");
    if (!out) throw std::runtime_error("export_artifacts: cannot write loops.log");
    out << "# frame_a frame_b r_pts r_feat score accepted\n";
    char buf[160];
    for (const LoopEvent& e : result.report.loop_events) {
      std::snprintf(buf, sizeof(buf), "%d %d %.6f %.6f %.6f %d\n", e.frame_current,
                    e.frame_matched, e.r_points, e.r_features, e.score, e.accepted ? 1 : 0);
      out << buf;
    }
  }
  result.config.save(out_dir + "/config.txt");
  {
    // Wall times live outside report.json so deterministic runs stay
    // byte-identical across repeats.
    std::ofstream out(out_dir + "/timings.txt");
    char buf[240];
    std::snprintf(buf, sizeof(buf),
                  "tracking_s=%.3f\nmapping_s=%.3f\nloop_s=%.3f\ngba_s=%.3f\ntotal_s=%.3f\n",
                  result.report.times.tracking_s, result.report.times.mapping_s,
                  result.report.times.loop_s, result.report.times.gba_s,
                  result.report.times.total_s);
    out << buf;
  }
}

}  // namespace subsplat::pipeline
