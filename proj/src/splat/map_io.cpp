#include "subsplat/splat/map_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace subsplat::splat {

void write_splat_map(const std::string& path, const SplatMap& map) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_splat_map: cannot open " + path);

  std::vector<const Splat*> ordered;
  ordered.reserve(map.size());
  for (const Splat& s : map.splats) ordered.push_back(&s);
  std::sort(ordered.begin(), ordered.end(),
            [](const Splat* a, const Splat* b) { return a->id < b->id; });

  out << "ply\nformat ascii 1.0\nelement vertex " << map.size() << "\n"
      << "property float x\nproperty float y\nproperty float z\n"
      << "property float red\nproperty float green\nproperty float blue\n"
      << "property float scale_x\nproperty float scale_y\nproperty float scale_z\n"
      << "property float rot_qw\nproperty float rot_qx\nproperty float rot_qy\nproperty float rot_qz\n"
      << "property float opacity\nproperty int submap\nproperty uint id\n"
      << "end_header\n";
  char buf[512];
  for (const Splat* s : ordered) {
    Eigen::Quaterniond q = s->rotation;
    if (q.w() < 0.0) q.coeffs() = -q.coeffs();
    std::snprintf(buf, sizeof(buf),
                  "%.7f %.7f %.7f %.5f %.5f %.5f %.7f %.7f %.7f %.7f %.7f %.7f %.7f %.5f %d %llu\n",
                  s->position.x(), s->position.y(), s->position.z(), s->color(0), s->color(1),
                  s->color(2), s->scale.x(), s->scale.y(), s->scale.z(), q.w(), q.x(), q.y(),
                  q.z(), s->opacity, s->origin_submap, (unsigned long long)s->id);
    out << buf;
  }
  if (!out) throw std::runtime_error("write_splat_map: write failed for " + path);
}

SplatMap read_splat_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_splat_map: cannot open " + path);
  std::string line;
  size_t count = 0;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string tok;
    ss >> tok;
    if (tok == "element") {
      std::string what;
      ss >> what >> count;
    } else if (tok == "end_header") {
      break;
    }
  }
  SplatMap map;
  for (size_t i = 0; i < count; ++i) {
    if (!std::getline(in, line)) throw std::runtime_error("read_splat_map: truncated " + path);
    std::istringstream ss(line);
    Splat s;
    double qw, qx, qy, qz;
    unsigned long long id;
    ss >> s.position.x() >> s.position.y() >> s.position.z() >> s.color(0) >> s.color(1) >>
        s.color(2) >> s.scale.x() >> s.scale.y() >> s.scale.z() >> qw >> qx >> qy >> qz >>
        s.opacity >> s.origin_submap >> id;
    if (!ss) throw std::runtime_error("read_splat_map: malformed vertex line");
    s.rotation = Eigen::Quaterniond(qw, qx, qy, qz).normalized();
    s.id = id;
    map.splats.push_back(s);
    map.next_id = std::max(map.next_id, uint64_t(id) + 1);
  }
  return map;
}

}  // namespace subsplat::splat
