#include "subsplat/core/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace subsplat::core {

double ate_rmse(const std::vector<Pose>& estimated, const std::vector<Pose>& ground_truth,
                AteAlignment alignment) {
  if (estimated.size() != ground_truth.size())
    throw std::invalid_argument("ate_rmse: trajectory length mismatch");
  if (estimated.empty()) throw std::invalid_argument("ate_rmse: empty trajectories");

  std::vector<Eigen::Vector3d> est, gt;
  est.reserve(estimated.size());
  gt.reserve(ground_truth.size());
  for (const Pose& p : estimated) est.push_back(p.translation());
  for (const Pose& p : ground_truth) gt.push_back(p.translation());

  Sim3Alignment gauge;  // identity
  if (alignment != AteAlignment::kNone) {
    if (est.size() < 3) throw std::invalid_argument("ate_rmse: need >= 3 poses to align");
    gauge = umeyama(est, gt, alignment == AteAlignment::kSim3);
  }
  double sq_sum = 0.0;
  for (size_t i = 0; i < est.size(); ++i) sq_sum += (gt[i] - gauge.apply(est[i])).squaredNorm();
  return std::sqrt(sq_sum / double(est.size()));
}

namespace {

struct CellKey {
  int64_t x, y, z;
  bool operator==(const CellKey& o) const { return x == o.x && y == o.y && z == o.z; }
};

struct CellHash {
  size_t operator()(const CellKey& k) const {
    uint64_t h = uint64_t(k.x) * 0x9E3779B185EBCA87ull;
    h ^= uint64_t(k.y) * 0xC2B2AE3D27D4EB4Full + (h << 6);
    h ^= uint64_t(k.z) * 0x165667B19E3779F9ull + (h >> 3);
    return size_t(h);
  }
};

/// Exact nearest-neighbor queries through a uniform voxel grid with
/// expanding-ring search. Cell size is 2x the expected point spacing.
class VoxelIndex {
 public:
  explicit VoxelIndex(const std::vector<Eigen::Vector3d>& pts) : pts_(pts) {
    Eigen::Vector3d lo = pts[0], hi = pts[0];
    for (const auto& p : pts) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    const Eigen::Vector3d extent = (hi - lo).cwiseMax(1e-9);
    const double spacing = std::cbrt(extent.prod() / double(pts.size()));
    cell_ = std::max(2.0 * spacing, 1e-9);
    origin_ = lo;
    for (size_t i = 0; i < pts.size(); ++i) cells_[key(pts[i])].push_back(i);
  }

  double nearest_distance(const Eigen::Vector3d& q) const {
    const CellKey cq = key(q);
    double best = std::numeric_limits<double>::infinity();
    for (int64_t ring = 0;; ++ring) {
      scan_ring(cq, ring, q, best);
      if (best <= double(ring) * cell_) return best;
    }
  }

 private:
  CellKey key(const Eigen::Vector3d& p) const {
    return {int64_t(std::floor((p.x() - origin_.x()) / cell_)),
            int64_t(std::floor((p.y() - origin_.y()) / cell_)),
            int64_t(std::floor((p.z() - origin_.z()) / cell_))};
  }

  void visit(const CellKey& k, const Eigen::Vector3d& q, double& best) const {
    auto it = cells_.find(k);
    if (it == cells_.end()) return;
    for (size_t idx : it->second) best = std::min(best, (pts_[idx] - q).norm());
  }

  void scan_ring(const CellKey& c, int64_t r, const Eigen::Vector3d& q, double& best) const {
    if (r == 0) {
      visit(c, q, best);
      return;
    }
    for (int64_t dx = -r; dx <= r; ++dx)
      for (int64_t dy = -r; dy <= r; ++dy)
        for (int64_t dz = -r; dz <= r; ++dz) {
          if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != r) continue;
          visit({c.x + dx, c.y + dy, c.z + dz}, q, best);
        }
  }

  const std::vector<Eigen::Vector3d>& pts_;
  Eigen::Vector3d origin_ = Eigen::Vector3d::Zero();
  double cell_ = 1.0;
  std::unordered_map<CellKey, std::vector<size_t>, CellHash> cells_;
};

double mean_nn_distance(const std::vector<Eigen::Vector3d>& from,
                        const std::vector<Eigen::Vector3d>& to) {
  constexpr size_t kBruteForceLimit = 5000;
  double sum = 0.0;
  if (to.size() < kBruteForceLimit) {
    for (const auto& q : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& p : to) best = std::min(best, (p - q).norm());
      sum += best;
    }
  } else {
    VoxelIndex index(to);
    for (const auto& q : from) sum += index.nearest_distance(q);
  }
  return sum / double(from.size());
}

}  // namespace

SurfaceError accuracy_completeness_chamfer(const std::vector<Eigen::Vector3d>& reconstructed,
                                           const std::vector<Eigen::Vector3d>& reference) {
  if (reconstructed.empty() || reference.empty())
    throw std::invalid_argument("chamfer: empty point cloud");
  SurfaceError e;
  e.accuracy = mean_nn_distance(reconstructed, reference);
  e.completeness = mean_nn_distance(reference, reconstructed);
  e.chamfer = 0.5 * (e.accuracy + e.completeness);
  return e;
}

double psnr(const ColorImage& a, const ColorImage& b) {
  if (!a.same_size(b)) throw std::invalid_argument("psnr: dimension mismatch");
  if (a.empty()) throw std::invalid_argument("psnr: empty images");
  double mse = 0.0;
  for (size_t i = 0; i < a.size(); ++i) mse += (a[i] - b[i]).squaredNorm();
  mse /= double(a.size() * 3);
  if (mse < 1e-10) return 100.0;
  return 10.0 * std::log10(1.0 / mse);
}

namespace {

std::vector<double> gaussian_kernel(int radius, double sigma) {
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += k[i + radius];
  }
  for (double& v : k) v /= sum;
  return k;
}

// Separable convolution; output restricted to fully-covered pixels.
GrayImage conv_valid(const GrayImage& img, const std::vector<double>& k) {
  const int r = int(k.size() / 2);
  GrayImage tmp(img.width(), img.height(), 0.0);
  for (int y = 0; y < img.height(); ++y)
    for (int x = r; x < img.width() - r; ++x) {
      double s = 0.0;
      for (int i = -r; i <= r; ++i) s += k[i + r] * img.at(x + i, y);
      tmp.at(x, y) = s;
    }
  GrayImage out(img.width(), img.height(), 0.0);
  for (int y = r; y < img.height() - r; ++y)
    for (int x = r; x < img.width() - r; ++x) {
      double s = 0.0;
      for (int i = -r; i <= r; ++i) s += k[i + r] * tmp.at(x, y + i);
      out.at(x, y) = s;
    }
  return out;
}

}  // namespace

double ssim(const ColorImage& a, const ColorImage& b) {
  if (!a.same_size(b)) throw std::invalid_argument("ssim: dimension mismatch");
  int radius = 5;  // 11x11 window
  const int min_dim = std::min(a.width(), a.height());
  if (min_dim < 11) radius = std::max(0, (min_dim - 1) / 2);
  const std::vector<double> kernel = gaussian_kernel(radius, 1.5);

  constexpr double c1 = 0.01 * 0.01;
  constexpr double c2 = 0.03 * 0.03;
  double total = 0.0;
  for (int ch = 0; ch < 3; ++ch) {
    GrayImage xa(a.width(), a.height()), xb(a.width(), a.height());
    GrayImage xaa(a.width(), a.height()), xbb(a.width(), a.height()), xab(a.width(), a.height());
    for (size_t i = 0; i < a.size(); ++i) {
      const double va = a[i](ch), vb = b[i](ch);
      xa[i] = va;
      xb[i] = vb;
      xaa[i] = va * va;
      xbb[i] = vb * vb;
      xab[i] = va * vb;
    }
    const GrayImage mu_a = conv_valid(xa, kernel);
    const GrayImage mu_b = conv_valid(xb, kernel);
    const GrayImage m_aa = conv_valid(xaa, kernel);
    const GrayImage m_bb = conv_valid(xbb, kernel);
    const GrayImage m_ab = conv_valid(xab, kernel);

    double acc = 0.0;
    size_t count = 0;
    for (int y = radius; y < a.height() - radius; ++y)
      for (int x = radius; x < a.width() - radius; ++x) {
        const double ma = mu_a.at(x, y), mb = mu_b.at(x, y);
        const double va = m_aa.at(x, y) - ma * ma;
        const double vb = m_bb.at(x, y) - mb * mb;
        const double cov = m_ab.at(x, y) - ma * mb;
        acc += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) /
               ((ma * ma + mb * mb + c1) * (va + vb + c2));
        ++count;
      }
    if (count == 0) throw std::invalid_argument("ssim: image smaller than window");
    total += acc / double(count);
  }
  return total / 3.0;
}

}  // namespace subsplat::core
