#include "subsplat/core/ply_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace subsplat::core {

namespace {
int to_byte(double v) { return std::clamp(int(v * 255.0 + 0.5), 0, 255); }
}  // namespace

void write_ply_points(const std::string& path, const std::vector<PlyPoint>& points) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_ply_points: cannot open " + path);
  const bool with_color = !points.empty() && points.front().color.has_value();
  out << "ply\nformat ascii 1.0\nelement vertex " << points.size() << "\n"
      << "property float x\nproperty float y\nproperty float z\n";
  if (with_color)
    out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  out << "end_header\n";
  char buf[160];
  for (const PlyPoint& p : points) {
    if (p.color.has_value() != with_color)
      throw std::invalid_argument("write_ply_points: mixed colored/uncolored points");
    if (with_color) {
      std::snprintf(buf, sizeof(buf), "%.6f %.6f %.6f %d %d %d\n", p.position.x(), p.position.y(),
                    p.position.z(), to_byte((*p.color)(0)), to_byte((*p.color)(1)),
                    to_byte((*p.color)(2)));
    } else {
      std::snprintf(buf, sizeof(buf), "%.6f %.6f %.6f\n", p.position.x(), p.position.y(),
                    p.position.z());
    }
    out << buf;
  }
  if (!out) throw std::runtime_error("write_ply_points: write failed for " + path);
}

std::vector<PlyPoint> read_ply_points(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_ply_points: cannot open " + path);
  std::string line;
  size_t count = 0;
  bool with_color = false;
  bool header_done = false;
  std::vector<std::string> props;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string tok;
    ss >> tok;
    if (tok == "element") {
      std::string what;
      ss >> what >> count;
      if (what != "vertex") throw std::runtime_error("read_ply_points: unsupported element " + what);
    } else if (tok == "property") {
      std::string type, name;
      ss >> type >> name;
      props.push_back(name);
    } else if (tok == "format") {
      std::string fmt;
      ss >> fmt;
      if (fmt != "ascii") throw std::runtime_error("read_ply_points: only ascii supported");
    } else if (tok == "end_header") {
      header_done = true;
      break;
    }
  }
  if (!header_done) throw std::runtime_error("read_ply_points: malformed header in " + path);
  with_color = std::find(props.begin(), props.end(), "red") != props.end();

  std::vector<PlyPoint> out;
  out.reserve(count);
  for (size_t i = 0; i < count; ++i) {
    if (!std::getline(in, line)) throw std::runtime_error("read_ply_points: truncated file");
    std::istringstream ss(line);
    PlyPoint p;
    ss >> p.position.x() >> p.position.y() >> p.position.z();
    if (with_color) {
      int r, g, b;
      ss >> r >> g >> b;
      p.color = Eigen::Vector3d(r / 255.0, g / 255.0, b / 255.0);
    }
    if (!ss) throw std::runtime_error("read_ply_points: malformed vertex line");
    out.push_back(p);
  }
  return out;
}

}  // namespace subsplat::core
