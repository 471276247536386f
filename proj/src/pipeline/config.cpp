#include "subsplat/pipeline/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace subsplat::pipeline {

void PipelineConfig::validate() const {
  if (submap_size < 2) throw std::invalid_argument("config: submap_size must be >= 2");
  auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in01(keyframe_beta) || !in01(keyframe_threshold) || !in01(covisibility_threshold) ||
      !in01(loop_score_threshold))
    throw std::invalid_argument("config: thresholds must lie in [0,1]");
  if (loop_weight_points < 0.0 || loop_weight_features < 0.0)
    throw std::invalid_argument("config: loop weights must be nonnegative");
  if (loop_temporal_distance < 0 || loop_cooldown < 0)
    throw std::invalid_argument("config: loop distances must be nonnegative");
  if (heldout_every < 2) throw std::invalid_argument("config: heldout_every must be >= 2");
  if (image_width % 16 != 0 || image_height % 16 != 0)
    throw std::invalid_argument("config: image dimensions must be multiples of 16");
  weights.validate();
  corruption.validate();
  if (!ablation.mapper && (ablation.intra || ablation.gba || ablation.loop))
    throw std::invalid_argument(
        "config: intra, gba, and full loop require the mapper; disable them or enable mapper");
}

void PipelineConfig::normalize_flags() {
  if (!ablation.mapper) {
    ablation.intra = false;
    ablation.gba = false;
    ablation.loop = false;  // the map-side half of loop closure needs a map
  }
}

namespace {
std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace

std::map<std::string, std::string> PipelineConfig::to_key_values() const {
  std::map<std::string, std::string> kv;
  kv["submap_size"] = std::to_string(submap_size);
  kv["keyframe_beta"] = fmt(keyframe_beta);
  kv["keyframe_threshold"] = fmt(keyframe_threshold);
  kv["covisibility_threshold"] = fmt(covisibility_threshold);
  kv["loop_weight_points"] = fmt(loop_weight_points);
  kv["loop_weight_features"] = fmt(loop_weight_features);
  kv["loop_score_threshold"] = fmt(loop_score_threshold);
  kv["loop_temporal_distance"] = std::to_string(loop_temporal_distance);
  kv["loop_cooldown"] = std::to_string(loop_cooldown);
  kv["loop_max_iters"] = std::to_string(loop_max_iters);
  kv["loop_lr"] = fmt(loop_lr);
  kv["lambda_scale_depth"] = fmt(weights.lambda_scale_depth);
  kv["lambda_depth_map"] = fmt(weights.lambda_depth);
  kv["lambda_depth_gba"] = fmt(lambda_depth_gba);
  kv["lambda_depth_normal"] = fmt(weights.lambda_depth_normal);
  kv["lambda_normal"] = fmt(weights.lambda_normal);
  kv["lambda_scale_reg"] = fmt(weights.lambda_scale_reg);
  kv["ssim_weight"] = fmt(weights.ssim_weight);
  kv["lr_pose_rot"] = fmt(rates.pose_rot);
  kv["lr_pose_trans"] = fmt(rates.pose_trans);
  kv["lr_position"] = fmt(rates.position);
  kv["lr_color"] = fmt(rates.color);
  kv["lr_opacity"] = fmt(rates.opacity);
  kv["lr_scale"] = fmt(rates.scale);
  kv["lr_rotation"] = fmt(rates.rotation);
  kv["intra_iters"] = std::to_string(intra_iters);
  kv["window_ba_iters"] = std::to_string(window_ba_iters);
  kv["window_extra_views"] = std::to_string(window_extra_views);
  kv["gba_iters"] = std::to_string(gba_iters);
  kv["densify_every"] = std::to_string(densify_every);
  kv["densify_stride"] = std::to_string(densify_stride);
  kv["exposure_in_gba"] = exposure_in_gba ? "1" : "0";
  kv["heldout_every"] = std::to_string(heldout_every);
  kv["enable_loop"] = ablation.loop ? "1" : "0";
  kv["enable_loop_s"] = ablation.loop_s ? "1" : "0";
  kv["enable_intra"] = ablation.intra ? "1" : "0";
  kv["enable_mapper"] = ablation.mapper ? "1" : "0";
  kv["enable_gba"] = ablation.gba ? "1" : "0";
  kv["seed"] = std::to_string(seed);
  kv["deterministic"] = deterministic ? "1" : "0";
  kv["scene"] = scene_kind;
  kv["trajectory"] = trajectory_kind;
  kv["frames"] = std::to_string(n_frames);
  kv["image_width"] = std::to_string(image_width);
  kv["image_height"] = std::to_string(image_height);
  kv["focal"] = fmt(focal);
  kv["trajectory_radius"] = fmt(trajectory_radius);
  kv["scale_sigma"] = fmt(corruption.scale_sigma);
  kv["pose_drift_rot"] = fmt(corruption.pose_drift_rot);
  kv["pose_drift_trans"] = fmt(corruption.pose_drift_trans);
  kv["depth_noise_rel"] = fmt(corruption.depth_noise_rel);
  kv["dropout"] = fmt(corruption.dropout);
  return kv;
}

void PipelineConfig::set_key_value(const std::string& key, const std::string& value) {
  auto as_int = [&] { return std::stoi(value); };
  auto as_u64 = [&] { return std::stoull(value); };
  auto as_double = [&] { return std::stod(value); };
  auto as_bool = [&] { return value == "1" || value == "true" || value == "on"; };

  if (key == "submap_size") submap_size = as_int();
  else if (key == "keyframe_beta") keyframe_beta = as_double();
  else if (key == "keyframe_threshold") keyframe_threshold = as_double();
  else if (key == "covisibility_threshold") covisibility_threshold = as_double();
  else if (key == "loop_weight_points") loop_weight_points = as_double();
  else if (key == "loop_weight_features") loop_weight_features = as_double();
  else if (key == "loop_score_threshold") loop_score_threshold = as_double();
  else if (key == "loop_temporal_distance") loop_temporal_distance = as_int();
  else if (key == "loop_cooldown") loop_cooldown = as_int();
  else if (key == "loop_max_iters") loop_max_iters = as_int();
  else if (key == "loop_lr") loop_lr = as_double();
  else if (key == "lambda_scale_depth") weights.lambda_scale_depth = as_double();
  else if (key == "lambda_depth_map") weights.lambda_depth = as_double();
  else if (key == "lambda_depth_gba") lambda_depth_gba = as_double();
  else if (key == "lambda_depth_normal") weights.lambda_depth_normal = as_double();
  else if (key == "lambda_normal") weights.lambda_normal = as_double();
  else if (key == "lambda_scale_reg") weights.lambda_scale_reg = as_double();
  else if (key == "ssim_weight") weights.ssim_weight = as_double();
  else if (key == "lr_pose_rot") rates.pose_rot = as_double();
  else if (key == "lr_pose_trans") rates.pose_trans = as_double();
  else if (key == "lr_position") rates.position = as_double();
  else if (key == "lr_color") rates.color = as_double();
  else if (key == "lr_opacity") rates.opacity = as_double();
  else if (key == "lr_scale") rates.scale = as_double();
  else if (key == "lr_rotation") rates.rotation = as_double();
  else if (key == "intra_iters") intra_iters = as_int();
  else if (key == "window_ba_iters") window_ba_iters = as_int();
  else if (key == "window_extra_views") window_extra_views = as_int();
  else if (key == "gba_iters") gba_iters = as_int();
  else if (key == "densify_every") densify_every = as_int();
  else if (key == "densify_stride") densify_stride = as_int();
  else if (key == "exposure_in_gba") exposure_in_gba = as_bool();
  else if (key == "heldout_every") heldout_every = as_int();
  else if (key == "enable_loop") ablation.loop = as_bool();
  else if (key == "enable_loop_s") ablation.loop_s = as_bool();
  else if (key == "enable_intra") ablation.intra = as_bool();
  else if (key == "enable_mapper") ablation.mapper = as_bool();
  else if (key == "enable_gba") ablation.gba = as_bool();
  else if (key == "seed") seed = as_u64();
  else if (key == "deterministic") deterministic = as_bool();
  else if (key == "scene") scene_kind = value;
  else if (key == "trajectory") trajectory_kind = value;
  else if (key == "frames") n_frames = as_int();
  else if (key == "image_width") image_width = as_int();
  else if (key == "image_height") image_height = as_int();
  else if (key == "focal") focal = as_double();
  else if (key == "trajectory_radius") trajectory_radius = as_double();
  else if (key == "scale_sigma") corruption.scale_sigma = as_double();
  else if (key == "pose_drift_rot") corruption.pose_drift_rot = as_double();
  else if (key == "pose_drift_trans") corruption.pose_drift_trans = as_double();
  else if (key == "depth_noise_rel") corruption.depth_noise_rel = as_double();
  else if (key == "dropout") corruption.dropout = as_double();
  else throw std::invalid_argument("config: unknown key '" + key + "'");
}

PipelineConfig PipelineConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  PipelineConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      std::istringstream check(line);
      std::string tok;
      if (check >> tok)
        throw std::runtime_error("config: malformed line " + std::to_string(line_no));
      continue;
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    cfg.set_key_value(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

void PipelineConfig::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("config: cannot write " + path);
  for (const auto& [k, v] : to_key_values()) out << k << "=" << v << "\n";
}

}  // namespace subsplat::pipeline
