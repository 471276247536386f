#include "subsplat/core/align.hpp"

#include <Eigen/SVD>
#include <cmath>

namespace subsplat::core {

Sim3Alignment umeyama(const std::vector<Eigen::Vector3d>& src,
                      const std::vector<Eigen::Vector3d>& dst, bool with_scale) {
  if (src.size() != dst.size())
    throw std::invalid_argument("umeyama: correspondence count mismatch");
  const size_t n = src.size();
  if (n < 3) throw DegenerateConfiguration("umeyama: need at least 3 correspondences");

  Eigen::Vector3d mu_src = Eigen::Vector3d::Zero();
  Eigen::Vector3d mu_dst = Eigen::Vector3d::Zero();
  for (size_t i = 0; i < n; ++i) {
    mu_src += src[i];
    mu_dst += dst[i];
  }
  mu_src /= double(n);
  mu_dst /= double(n);

  Eigen::Matrix3d sigma = Eigen::Matrix3d::Zero();  // dst-src cross covariance
  double var_src = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d ds = src[i] - mu_src;
    const Eigen::Vector3d dd = dst[i] - mu_dst;
    sigma += dd * ds.transpose();
    var_src += ds.squaredNorm();
  }
  sigma /= double(n);
  var_src /= double(n);

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(sigma, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d d = svd.singularValues();
  // Rotation is determined only if the source spread is at least planar.
  if (var_src < 1e-18 || d(1) <= 1e-12 * std::max(d(0), 1e-300))
    throw DegenerateConfiguration("umeyama: collinear or degenerate point configuration");

  Eigen::Vector3d s_fix = Eigen::Vector3d::Ones();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) s_fix(2) = -1.0;
  const Eigen::Matrix3d rot =
      svd.matrixU() * s_fix.asDiagonal() * svd.matrixV().transpose();

  Sim3Alignment out;
  out.scale = with_scale ? (d.dot(s_fix) / var_src) : 1.0;
  if (out.scale <= 0.0) throw DegenerateConfiguration("umeyama: non-positive recovered scale");
  out.pose = Pose::from_rt(rot, mu_dst - out.scale * (rot * mu_src));
  return out;
}

}  // namespace subsplat::core
