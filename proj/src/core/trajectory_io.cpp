#include "subsplat/core/trajectory_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace subsplat::core {

std::vector<TimedPose> read_trajectory(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_trajectory: cannot open " + path);
  std::vector<TimedPose> out;
  std::string line;
  while (std::getline(in, line)) {
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    double ts, tx, ty, tz, qx, qy, qz, qw;
    if (!(ss >> ts >> tx >> ty >> tz >> qx >> qy >> qz >> qw)) continue;
    TimedPose tp;
    tp.timestamp = ts;
    tp.pose = Pose(Eigen::Quaterniond(qw, qx, qy, qz), Eigen::Vector3d(tx, ty, tz));
    out.push_back(tp);
  }
  return out;
}

void write_trajectory(const std::string& path, const std::vector<TimedPose>& trajectory) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_trajectory: cannot open " + path);
  out << "# timestamp tx ty tz qx qy qz qw\n";
  char buf[256];
  for (const TimedPose& tp : trajectory) {
    const Eigen::Vector3d& t = tp.pose.translation();
    Eigen::Quaterniond q = tp.pose.quaternion();
    if (q.w() < 0.0) q.coeffs() = -q.coeffs();  // canonical sign for byte-stable output
    std::snprintf(buf, sizeof(buf), "%.6f %.9f %.9f %.9f %.9f %.9f %.9f %.9f\n", tp.timestamp,
                  t.x(), t.y(), t.z(), q.x(), q.y(), q.z(), q.w());
    out << buf;
  }
  if (!out) throw std::runtime_error("write_trajectory: write failed for " + path);
}

}  // namespace subsplat::core
