#include "subsplat/sim/tum_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "subsplat/core/trajectory_io.hpp"
#include "subsplat/sim/png_io.hpp"

namespace subsplat::sim {

namespace fs = std::filesystem;

namespace {

constexpr double kAssocTolerance = 0.02;  // seconds

struct TimedFile {
  double timestamp;
  std::string path;
};

std::vector<TimedFile> read_file_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_tum_sequence: missing " + path);
  std::vector<TimedFile> out;
  std::string line;
  while (std::getline(in, line)) {
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    TimedFile tf;
    if (ss >> tf.timestamp >> tf.path) out.push_back(tf);
  }
  std::sort(out.begin(), out.end(),
            [](const TimedFile& a, const TimedFile& b) { return a.timestamp < b.timestamp; });
  return out;
}

// Index of the element with nearest timestamp, or -1 if outside tolerance.
template <typename T>
int nearest_within(const std::vector<T>& items, double ts, double tol) {
  int best = -1;
  double best_gap = tol;
  for (size_t i = 0; i < items.size(); ++i) {
    const double gap = std::abs(items[i].timestamp - ts);
    if (gap <= best_gap) {
      best_gap = gap;
      best = int(i);
    }
  }
  return best;
}

}  // namespace

TumSequence load_tum_sequence(const std::string& directory, const core::Intrinsics& intr) {
  const auto rgb_list = read_file_list(directory + "/rgb.txt");
  const auto depth_list = read_file_list(directory + "/depth.txt");
  const auto gt_list = core::read_trajectory(directory + "/groundtruth.txt");
  if (gt_list.empty()) throw std::runtime_error("load_tum_sequence: empty groundtruth.txt");

  TumSequence seq;
  seq.intrinsics = intr;
  int index = 0;
  for (const TimedFile& rgb : rgb_list) {
    const int di = nearest_within(depth_list, rgb.timestamp, kAssocTolerance);
    const int gi = nearest_within(gt_list, rgb.timestamp, kAssocTolerance);
    if (di < 0 || gi < 0) {
      ++seq.skipped;
      std::fprintf(stderr, "load_tum_sequence: no association for t=%.6f, frame skipped\n",
                   rgb.timestamp);
      continue;
    }
    Frame frame;
    frame.index = index++;
    frame.timestamp = rgb.timestamp;
    frame.color = read_png_rgb(directory + "/" + rgb.path);
    const auto depth_raw = read_png_depth16(directory + "/" + depth_list[di].path);
    if (!frame.color.same_size(depth_raw))
      throw std::runtime_error("load_tum_sequence: rgb/depth size mismatch at t=" +
                               std::to_string(rgb.timestamp));
    frame.gt_depth = core::DepthMap(depth_raw.width(), depth_raw.height());
    for (size_t i = 0; i < depth_raw.size(); ++i) {
      if (depth_raw[i] == 0) continue;
      frame.gt_depth.value[i] = depth_raw[i] * kTumDepthScale;
      frame.gt_depth.valid[i] = 1;
    }
    frame.gt_pose = gt_list[gi].pose;
    frame.features = patch_features(frame.color, frame.gt_depth, intr);
    seq.frames.push_back(std::move(frame));
    seq.gt_poses.push_back(gt_list[gi].pose);
  }
  return seq;
}

void export_tum_sequence(const std::string& directory, const std::vector<Frame>& frames) {
  fs::create_directories(fs::path(directory) / "rgb");
  fs::create_directories(fs::path(directory) / "depth");
  std::ofstream rgb_txt(directory + "/rgb.txt");
  std::ofstream depth_txt(directory + "/depth.txt");
  if (!rgb_txt || !depth_txt)
    throw std::runtime_error("export_tum_sequence: cannot write index files in " + directory);
  rgb_txt << "# timestamp filename\n";
  depth_txt << "# timestamp filename\n";

  std::vector<core::TimedPose> gt;
  char name[64];
  for (const Frame& frame : frames) {
    std::snprintf(name, sizeof(name), "%.6f.png", frame.timestamp);
    const std::string rgb_rel = std::string("rgb/") + name;
    const std::string depth_rel = std::string("depth/") + name;
    write_png_rgb(directory + "/" + rgb_rel, frame.color);

    core::Image<uint16_t> depth_raw(frame.gt_depth.width(), frame.gt_depth.height(), uint16_t{0});
    for (size_t i = 0; i < depth_raw.size(); ++i) {
      if (!frame.gt_depth.valid[i]) continue;
      const double counts = frame.gt_depth.value[i] / kTumDepthScale;
      depth_raw[i] = uint16_t(std::clamp(counts + 0.5, 1.0, 65535.0));
    }
    write_png_depth16(directory + "/" + depth_rel, depth_raw);

    char ts[32];
    std::snprintf(ts, sizeof(ts), "%.6f", frame.timestamp);
    rgb_txt << ts << " " << rgb_rel << "\n";
    depth_txt << ts << " " << depth_rel << "\n";
    gt.push_back({frame.timestamp, frame.gt_pose});
  }
  core::write_trajectory(directory + "/groundtruth.txt", gt);
}

}  // namespace subsplat::sim
