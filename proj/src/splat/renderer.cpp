#include "subsplat/splat/renderer.hpp"

#include <algorithm>
#include <cmath>

namespace subsplat::splat {

namespace {

constexpr double kAlphaClamp = 0.9999;
constexpr double kStopTransmittance = 1e-3;  // accumulated alpha 0.999
constexpr double kMinContribution = 1e-12;
constexpr double kFootprintTail = 1e-7;  // footprint cut where alpha*g falls below this
constexpr double kDilation = 0.25;       // px^2, enforces a >= 0.5 px footprint
constexpr double kGrazingEps = 1e-6;

struct PixelWalk {
  uint32_t idx;
  double g, a, t_depth, weight;
  bool fallback_depth;
  bool alpha_clamped;
};

// Perspective Jacobian of (u, v) w.r.t. the camera-frame point.
Eigen::Matrix<double, 2, 3> projection_jacobian(const core::Intrinsics& intr,
                                                const Eigen::Vector3d& p) {
  Eigen::Matrix<double, 2, 3> j;
  const double iz = 1.0 / p.z();
  j << intr.fx * iz, 0.0, -intr.fx * p.x() * iz * iz, 0.0, intr.fy * iz,
      -intr.fy * p.y() * iz * iz;
  return j;
}

void prepare_cache(const SplatMap& map, const core::Pose& pose, const core::Intrinsics& intr,
                   RenderCache& cache) {
  cache.pose = pose;
  cache.intr = intr;
  cache.cam.assign(map.size(), SplatCamData{});
  cache.order.clear();
  cache.lists = core::Image<std::vector<uint32_t>>(intr.width, intr.height);

  const core::Pose world_to_cam = pose.inverse();
  const Eigen::Matrix3d r_cw = world_to_cam.rotation();
  const Eigen::Vector3d t_cw = world_to_cam.translation();

  for (size_t i = 0; i < map.size(); ++i) {
    const Splat& s = map.splats[i];
    SplatCamData& d = cache.cam[i];
    d.p_cam = r_cw * s.position + t_cw;
    if (d.p_cam.z() <= core::kBehindCameraEps) continue;

    d.rot_cam = r_cw * s.rotation.toRotationMatrix();
    const Eigen::Vector3d n_raw = d.rot_cam.col(2);
    d.flip = n_raw.z() > 0.0 ? -1.0 : 1.0;
    d.n_cam = d.flip * n_raw;
    d.plane_dot = d.n_cam.dot(d.p_cam);

    const Eigen::Matrix3d cov_cam =
        d.rot_cam * s.scale.cwiseProduct(s.scale).asDiagonal() * d.rot_cam.transpose();
    const Eigen::Matrix<double, 2, 3> j = projection_jacobian(intr, d.p_cam);
    d.cov2d = j * cov_cam * j.transpose() + kDilation * Eigen::Matrix2d::Identity();
    const double det = d.cov2d.determinant();
    if (det <= 1e-18) continue;
    d.q = d.cov2d.inverse();

    d.center = Eigen::Vector2d(intr.fx * d.p_cam.x() / d.p_cam.z() + intr.cx,
                               intr.fy * d.p_cam.y() / d.p_cam.z() + intr.cy);

    // Conservative footprint: alpha * g below kFootprintTail outside.
    const double tr = d.cov2d.trace();
    const double gap = std::sqrt(std::max(
        0.25 * (d.cov2d(0, 0) - d.cov2d(1, 1)) * (d.cov2d(0, 0) - d.cov2d(1, 1)) +
            d.cov2d(0, 1) * d.cov2d(1, 0),
        0.0));
    const double lam_max = 0.5 * tr + gap;
    const double log_ratio = std::log(std::max(s.opacity, 1e-6) / kFootprintTail);
    if (log_ratio <= 0.0) continue;
    const double radius = std::sqrt(2.0 * lam_max * log_ratio);
    d.x0 = std::max(0, int(std::floor(d.center.x() - radius)));
    d.x1 = std::min(intr.width - 1, int(std::ceil(d.center.x() + radius)));
    d.y0 = std::max(0, int(std::floor(d.center.y() - radius)));
    d.y1 = std::min(intr.height - 1, int(std::ceil(d.center.y() + radius)));
    if (d.x0 > d.x1 || d.y0 > d.y1) continue;
    d.visible = true;
  }

  for (uint32_t i = 0; i < map.size(); ++i)
    if (cache.cam[i].visible) cache.order.push_back(i);
  std::stable_sort(cache.order.begin(), cache.order.end(), [&](uint32_t a, uint32_t b) {
    return cache.cam[a].p_cam.z() < cache.cam[b].p_cam.z();
  });

  for (uint32_t idx : cache.order) {
    const SplatCamData& d = cache.cam[idx];
    for (int y = d.y0; y <= d.y1; ++y)
      for (int x = d.x0; x <= d.x1; ++x) cache.lists.at(x, y).push_back(idx);
  }
}

// Re-runs the compositing walk for one pixel; shared by forward and backward.
template <typename Fn>
void walk_pixel(const SplatMap& map, const RenderCache& cache, int x, int y, Fn&& emit) {
  const core::Intrinsics& intr = cache.intr;
  const Eigen::Vector3d ray((x - intr.cx) / intr.fx, (y - intr.cy) / intr.fy, 1.0);
  double transmittance = 1.0;
  for (uint32_t idx : cache.lists.at(x, y)) {
    if (transmittance < kStopTransmittance) break;
    const SplatCamData& d = cache.cam[idx];
    const Eigen::Vector2d delta(x - d.center.x(), y - d.center.y());
    const double g = std::exp(-0.5 * delta.dot(d.q * delta));
    const double a_raw = map.splats[idx].opacity * g;
    if (a_raw < kMinContribution) continue;
    PixelWalk w;
    w.idx = idx;
    w.g = g;
    w.alpha_clamped = a_raw > kAlphaClamp;
    w.a = w.alpha_clamped ? kAlphaClamp : a_raw;
    const double denom = d.n_cam.dot(ray);
    w.fallback_depth = denom > -kGrazingEps;
    w.t_depth = w.fallback_depth ? d.p_cam.z() : d.plane_dot / denom;
    w.t_depth = std::clamp(w.t_depth, 1e-4, 1e4);
    w.weight = w.a * transmittance;
    emit(w, transmittance, ray);
    transmittance *= 1.0 - w.a;
  }
}

}  // namespace

void Splat::clamp_parameters() {
  scale = scale.cwiseMax(kMinSplatRadius).cwiseMin(kMaxSplatRadius);
  opacity = std::clamp(opacity, 1e-4, 1.0);
  color = color.cwiseMax(0.0).cwiseMin(1.0);
  rotation.normalize();
}

size_t SplatMap::prune_transparent() {
  const size_t before = splats.size();
  splats.erase(std::remove_if(splats.begin(), splats.end(),
                              [](const Splat& s) { return s.opacity < kPruneOpacity; }),
               splats.end());
  return before - splats.size();
}

void LossWeights::validate() const {
  if (lambda_scale_depth < 0 || lambda_depth < 0 || lambda_depth_normal < 0 ||
      lambda_scale_reg < 0 || lambda_normal < 0 || ssim_weight < 0 || window < 1)
    throw std::invalid_argument("LossWeights: weights must be nonnegative, window >= 1");
}

RenderOutput render_with_cache(const SplatMap& map, const core::Pose& pose,
                               const core::Intrinsics& intr, RenderCache& cache) {
  prepare_cache(map, pose, intr, cache);
  RenderOutput out;
  out.color = core::ColorImage(intr.width, intr.height, Eigen::Vector3d::Zero());
  out.depth = core::DepthMap(intr.width, intr.height);
  out.normal = core::NormalMap(intr.width, intr.height);
  out.silhouette = core::GrayImage(intr.width, intr.height, 0.0);

  for (int y = 0; y < intr.height; ++y) {
    for (int x = 0; x < intr.width; ++x) {
      if (cache.lists.at(x, y).empty()) continue;
      Eigen::Vector3d color = Eigen::Vector3d::Zero();
      Eigen::Vector3d normal = Eigen::Vector3d::Zero();
      double depth = 0.0;
      double alpha = 0.0;
      walk_pixel(map, cache, x, y,
                 [&](const PixelWalk& w, double /*T*/, const Eigen::Vector3d& /*ray*/) {
                   color += w.weight * map.splats[w.idx].color;
                   depth += w.weight * w.t_depth;
                   normal += w.weight * cache.cam[w.idx].n_cam;
                   alpha += w.weight;
                 });
      out.color.at(x, y) = color;
      out.silhouette.at(x, y) = alpha;
      if (alpha > kSilhouetteThreshold) {
        out.depth.value.at(x, y) = depth / alpha;
        out.depth.valid.at(x, y) = 1;
        const double nn = normal.norm();
        if (nn > 1e-12) {
          out.normal.normal.at(x, y) = normal / nn;
          out.normal.valid.at(x, y) = 1;
        }
      }
    }
  }
  return out;
}

RenderOutput render(const SplatMap& map, const core::Pose& pose, const core::Intrinsics& intr) {
  RenderCache cache;
  return render_with_cache(map, pose, intr, cache);
}

void RenderGrads::resize(size_t n) {
  d_position.assign(n, Eigen::Vector3d::Zero());
  d_rotation.assign(n, Eigen::Vector3d::Zero());
  d_scale.assign(n, Eigen::Vector3d::Zero());
  d_opacity.assign(n, 0.0);
  d_color.assign(n, Eigen::Vector3d::Zero());
  d_pose_rot.setZero();
  d_pose_trans.setZero();
}

void RenderGrads::add_scaled(const RenderGrads& other, double factor) {
  for (size_t i = 0; i < d_position.size(); ++i) {
    d_position[i] += factor * other.d_position[i];
    d_rotation[i] += factor * other.d_rotation[i];
    d_scale[i] += factor * other.d_scale[i];
    d_opacity[i] += factor * other.d_opacity[i];
    d_color[i] += factor * other.d_color[i];
  }
  d_pose_rot += factor * other.d_pose_rot;
  d_pose_trans += factor * other.d_pose_trans;
}

namespace {

/// Extracts dL/d(rotvec) from tr-form sensitivities: given X, the tangent
/// gradient components are (X12 - X21, X20 - X02, X01 - X10).
Eigen::Vector3d skew_extract(const Eigen::Matrix3d& x) {
  return {x(1, 2) - x(2, 1), x(2, 0) - x(0, 2), x(0, 1) - x(1, 0)};
}

struct SplatAccum {
  Eigen::Vector2d d_center = Eigen::Vector2d::Zero();
  Eigen::Matrix2d d_cov = Eigen::Matrix2d::Zero();
  Eigen::Vector3d d_pcam = Eigen::Vector3d::Zero();
  Eigen::Vector3d d_ncam = Eigen::Vector3d::Zero();
  double d_alpha = 0.0;
  Eigen::Vector3d d_color = Eigen::Vector3d::Zero();
  bool touched = false;
};

}  // namespace

void render_backward(const SplatMap& map, const RenderCache& cache, const RenderOutput& out,
                     const PixelAdjoints& adj, RenderGrads& grads) {
  grads.resize(map.size());
  const core::Intrinsics& intr = cache.intr;
  const bool has_color = !adj.d_color.empty();
  const bool has_sil = !adj.d_silhouette.empty();
  const bool has_depth = !adj.d_depth.empty();
  const bool has_normal = !adj.d_normal.empty();

  std::vector<SplatAccum> accum(map.size());
  std::vector<PixelWalk> walk;

  for (int y = 0; y < intr.height; ++y) {
    for (int x = 0; x < intr.width; ++x) {
      if (cache.lists.at(x, y).empty()) continue;
      const Eigen::Vector3d dc =
          has_color ? adj.d_color.at(x, y) : Eigen::Vector3d::Zero();
      double da = has_sil ? adj.d_silhouette.at(x, y) : 0.0;
      const double dzbar = (has_depth && out.depth.valid.at(x, y)) ? adj.d_depth.at(x, y) : 0.0;
      const Eigen::Vector3d dnhat = (has_normal && out.normal.valid.at(x, y))
                                        ? adj.d_normal.at(x, y)
                                        : Eigen::Vector3d::Zero();
      if (dc.isZero(0.0) && da == 0.0 && dzbar == 0.0 && dnhat.isZero(0.0)) continue;

      // Recompute the compositing walk and the raw accumulators.
      walk.clear();
      Eigen::Vector3d n_acc = Eigen::Vector3d::Zero();
      double z_acc = 0.0, a_acc = 0.0;
      walk_pixel(map, cache, x, y,
                 [&](const PixelWalk& w, double /*T*/, const Eigen::Vector3d& /*ray*/) {
                   walk.push_back(w);
                   z_acc += w.weight * w.t_depth;
                   n_acc += w.weight * cache.cam[w.idx].n_cam;
                   a_acc += w.weight;
                 });
      if (walk.empty()) continue;

      // Adjoints of the raw accumulators (Z, N, A) from the output adjoints.
      double dz = 0.0;
      if (dzbar != 0.0) {
        dz = dzbar / a_acc;
        da += -dzbar * z_acc / (a_acc * a_acc);
      }
      Eigen::Vector3d dn = Eigen::Vector3d::Zero();
      if (!dnhat.isZero(0.0)) {
        const double len = n_acc.norm();
        if (len > 1e-12) {
          const Eigen::Vector3d unit = n_acc / len;
          dn = (dnhat - unit * unit.dot(dnhat)) / len;
        }
      }

      const Eigen::Vector3d ray((x - intr.cx) / intr.fx, (y - intr.cy) / intr.fy, 1.0);
      // Suffix walk: dL/da_k = T_k*phi_k - S_after/(1-a_k).
      double suffix = 0.0;
      // Recover T_k for each k by replaying transmittance.
      std::vector<double> trans(walk.size());
      double t_run = 1.0;
      for (size_t k = 0; k < walk.size(); ++k) {
        trans[k] = t_run;
        t_run *= 1.0 - walk[k].a;
      }
      for (size_t ri = walk.size(); ri-- > 0;) {
        const PixelWalk& w = walk[ri];
        const SplatCamData& d = cache.cam[w.idx];
        const Splat& s = map.splats[w.idx];
        SplatAccum& acc = accum[w.idx];
        acc.touched = true;

        const double phi = s.color.dot(dc) + w.t_depth * dz + d.n_cam.dot(dn) + da;
        const double d_a = trans[ri] * phi - suffix / (1.0 - w.a);
        suffix += w.weight * phi;

        acc.d_color += w.weight * dc;
        // Depth through the ray/tangent-plane intersection.
        const double dt = w.weight * dz;
        if (dt != 0.0) {
          if (w.fallback_depth) {
            acc.d_pcam.z() += dt;
          } else {
            const double denom = d.n_cam.dot(ray);
            const double d_plane_dot = dt / denom;
            const double d_denom = -dt * w.t_depth / denom;
            acc.d_ncam += d_plane_dot * d.p_cam + d_denom * ray;
            acc.d_pcam += d_plane_dot * d.n_cam;
          }
        }
        acc.d_ncam += w.weight * dn;

        if (!w.alpha_clamped) {
          grads.d_opacity[w.idx] += w.g * d_a;
          const double d_g = s.opacity * d_a;
          const Eigen::Vector2d delta(x - d.center.x(), y - d.center.y());
          const Eigen::Vector2d qd = d.q * delta;
          acc.d_center += w.g * d_g * qd;
          acc.d_cov += 0.5 * w.g * d_g * (qd * qd.transpose());
        }
      }
    }
  }

  // Fold per-splat screen-space gradients back to parameters and the pose.
  const core::Pose world_to_cam = cache.pose.inverse();
  const Eigen::Matrix3d r_cw = world_to_cam.rotation();
  for (size_t i = 0; i < map.size(); ++i) {
    if (!accum[i].touched || !cache.cam[i].visible) continue;
    const SplatAccum& acc = accum[i];
    const SplatCamData& d = cache.cam[i];
    const Splat& s = map.splats[i];

    grads.d_color[i] += acc.d_color;

    Eigen::Vector3d d_pcam = acc.d_pcam;
    const Eigen::Matrix<double, 2, 3> j = projection_jacobian(intr, d.p_cam);
    d_pcam += j.transpose() * acc.d_center;

    const Eigen::Matrix2d g_sym = 0.5 * (acc.d_cov + acc.d_cov.transpose());
    const Eigen::Matrix3d cov_cam =
        d.rot_cam * s.scale.cwiseProduct(s.scale).asDiagonal() * d.rot_cam.transpose();
    const Eigen::Matrix3d d_m = j.transpose() * g_sym * j;
    // Jacobian's own dependence on the camera point.
    const Eigen::Matrix<double, 2, 3> d_j = 2.0 * g_sym * j * cov_cam;
    {
      const double z = d.p_cam.z(), iz2 = 1.0 / (z * z), iz3 = iz2 / z;
      d_pcam.x() += d_j(0, 2) * (-intr.fx * iz2);
      d_pcam.y() += d_j(1, 2) * (-intr.fy * iz2);
      d_pcam.z() += d_j(0, 0) * (-intr.fx * iz2) + d_j(0, 2) * (2.0 * intr.fx * d.p_cam.x() * iz3) +
                    d_j(1, 1) * (-intr.fy * iz2) + d_j(1, 2) * (2.0 * intr.fy * d.p_cam.y() * iz3);
    }

    // Covariance to per-axis radii and splat orientation (right tangent).
    const Eigen::Matrix3d b = d.rot_cam.transpose() * d_m * d.rot_cam;
    for (int m = 0; m < 3; ++m) grads.d_scale[i](m) += 2.0 * s.scale(m) * b(m, m);
    const Eigen::Matrix3d diag_s2 = s.scale.cwiseProduct(s.scale).asDiagonal();
    grads.d_rotation[i] += skew_extract(diag_s2 * b - b * diag_s2);

    // Normal to splat orientation: n_cam = flip * rot_cam * e_z.
    grads.d_rotation[i] +=
        d.flip * (d.rot_cam.transpose() * acc.d_ncam).cross(Eigen::Vector3d::UnitZ());

    // Splat position.
    grads.d_position[i] += r_cw.transpose() * d_pcam;

    // Camera pose tangent (right update): p_cam and n_cam shrink by exp(-xi).
    grads.d_pose_trans += -d_pcam;
    grads.d_pose_rot += d_pcam.cross(d.p_cam);
    grads.d_pose_rot += acc.d_ncam.cross(d.n_cam);
    grads.d_pose_rot += skew_extract(d_m * cov_cam - cov_cam * d_m);
  }
}

}  // namespace subsplat::splat
