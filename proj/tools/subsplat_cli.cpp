#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "subsplat/core/metrics.hpp"
#include "subsplat/core/trajectory_io.hpp"
#include "subsplat/pipeline/report.hpp"
#include "subsplat/pipeline/slam.hpp"
#include "subsplat/sim/tum_io.hpp"

namespace {

using namespace subsplat;

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::istringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, sep)) out.push_back(tok);
  return out;
}

int cmd_run(const std::string& config_path, const std::string& source, const std::string& out_dir,
            const std::string& ablate, long long seed, bool deterministic) {
  pipeline::PipelineConfig cfg;
  if (!config_path.empty()) cfg = pipeline::PipelineConfig::load(config_path);
  if (seed >= 0) cfg.seed = uint64_t(seed);
  cfg.deterministic = deterministic || cfg.deterministic;

  for (const std::string& stage : split(ablate, ',')) {
    if (stage.empty()) continue;
    if (stage == "loop") cfg.ablation.loop = false;
    else if (stage == "loop_s") cfg.ablation.loop_s = false;
    else if (stage == "intra") cfg.ablation.intra = false;
    else if (stage == "mapper") cfg.ablation.mapper = false;
    else if (stage == "gba") cfg.ablation.gba = false;
    else throw std::runtime_error("unknown ablation stage: " + stage);
  }
  cfg.normalize_flags();

  pipeline::SlamResult result;
  const auto parts = split(source, ':');
  if (parts.size() >= 1 && parts[0] == "synthetic") {
    // synthetic[:scene[:trajectory[:frames]]]
    if (parts.size() > 1 && !parts[1].empty()) cfg.scene_kind = parts[1];
    if (parts.size() > 2 && !parts[2].empty()) cfg.trajectory_kind = parts[2];
    if (parts.size() > 3 && !parts[3].empty()) cfg.n_frames = std::stoi(parts[3]);
    result = pipeline::run_slam_synthetic(cfg);
  } else if (parts.size() == 2 && parts[0] == "tum") {
    result = pipeline::run_slam_tum(cfg, parts[1]);
  } else {
    throw std::runtime_error("source must be synthetic[:scene:traj:frames] or tum:<dir>");
  }

  pipeline::export_artifacts(result, out_dir);
  const auto& rep = result.report;
  if (!rep.ate_skipped) std::printf("ate_rmse_m %.6f\n", rep.ate_rmse_m);
  if (!rep.heldout_skipped) std::printf("psnr_median_db %.3f\n", rep.heldout_psnr_median_db);
  std::printf("keyframes %zu submaps %zu splats %zu loops %zu\n", rep.keyframes, rep.submaps,
              rep.splat_count,
              size_t(std::count_if(rep.loop_events.begin(), rep.loop_events.end(),
                                   [](const pipeline::LoopEvent& e) { return e.accepted; })));
  std::printf("artifacts written to %s\n", out_dir.c_str());
  return 0;
}

int cmd_eval(const std::string& est_path, const std::string& gt_path, const std::string& align) {
  const auto est = core::read_trajectory(est_path);
  const auto gt = core::read_trajectory(gt_path);
  if (est.size() != gt.size())
    throw std::runtime_error("trajectories differ in length (" + std::to_string(est.size()) +
                             " vs " + std::to_string(gt.size()) + ")");
  std::vector<core::Pose> est_poses, gt_poses;
  for (const auto& t : est) est_poses.push_back(t.pose);
  for (const auto& t : gt) gt_poses.push_back(t.pose);
  core::AteAlignment mode = core::AteAlignment::kSim3;
  if (align == "none") mode = core::AteAlignment::kNone;
  else if (align == "se3") mode = core::AteAlignment::kSe3;
  else if (align != "sim3") throw std::runtime_error("--align must be sim3, se3, or none");
  std::printf("ate_rmse_m %.9f (alignment=%s, poses=%zu)\n",
              core::ate_rmse(est_poses, gt_poses, mode), align.c_str(), est_poses.size());
  return 0;
}

int cmd_simulate(const std::string& scene, const std::string& kind, int frames, long long seed,
                 const std::string& out_dir) {
  pipeline::PipelineConfig cfg;
  cfg.scene_kind = scene;
  cfg.trajectory_kind = kind;
  cfg.n_frames = frames;
  if (seed >= 0) cfg.seed = uint64_t(seed);

  const sim::SyntheticScene sc =
      sim::generate_scene(sim::scene_kind_from_string(cfg.scene_kind), cfg.seed);
  const auto tk = sim::trajectory_kind_from_string(cfg.trajectory_kind);
  const auto poses = sim::generate_trajectory(tk, cfg.n_frames, sc.centroid, cfg.trajectory_radius);
  const core::Intrinsics intr = cfg.intrinsics();
  std::vector<sim::Frame> out;
  for (size_t i = 0; i < poses.size(); ++i) {
    sim::Frame f = sim::render_ground_truth(sc, poses[i], intr);
    f.index = int(i);
    f.timestamp = double(i) * 0.1;
    out.push_back(std::move(f));
  }
  sim::export_tum_sequence(out_dir, out);
  std::printf("wrote %zu frames to %s (TUM layout)\n", out.size(), out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Submap-based monocular dense SLAM with a global splat map"};
  app.require_subcommand(1);

  std::string config_path, source, out_dir = "out", ablate;
  long long seed = -1;
  bool deterministic = false;
  auto* run = app.add_subcommand("run", "run the SLAM pipeline");
  run->add_option("--config", config_path, "key=value config file");
  run->add_option("--source", source, "synthetic[:scene:traj:frames] or tum:<dir>")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--ablate", ablate, "comma list: loop,loop_s,intra,mapper,gba");
  run->add_option("--seed", seed, "override config seed");
  run->add_flag("--deterministic", deterministic, "single-threaded deterministic mode");

  std::string est_path, gt_path, align = "sim3";
  auto* eval = app.add_subcommand("eval", "trajectory ATE between two TUM files");
  eval->add_option("--est", est_path)->required();
  eval->add_option("--gt", gt_path)->required();
  eval->add_option("--align", align, "sim3 (default), se3, or none");

  std::string sim_scene = "room", sim_kind = "square_loop", sim_out = "sequence";
  int sim_frames = 40;
  long long sim_seed = -1;
  auto* simulate = app.add_subcommand("simulate", "write a synthetic TUM-layout sequence");
  simulate->add_option("--scene", sim_scene, "room or corridor");
  simulate->add_option("--kind", sim_kind, "orbit, square_loop, corridor_out_back");
  simulate->add_option("--frames", sim_frames);
  simulate->add_option("--seed", sim_seed);
  simulate->add_option("--out", sim_out)->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (run->parsed()) return cmd_run(config_path, source, out_dir, ablate, seed, deterministic);
    if (eval->parsed()) return cmd_eval(est_path, gt_path, align);
    if (simulate->parsed()) return cmd_simulate(sim_scene, sim_kind, sim_frames, sim_seed, sim_out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
