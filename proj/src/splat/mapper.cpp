#include "subsplat/splat/mapper.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace subsplat::splat {

namespace {

// ===========================================================================
// Small pieces shared by the optimizers
// ===========================================================================

class AdamOptimizer {
 public:
  explicit AdamOptimizer(Eigen::Index n)
      : m_(Eigen::VectorXd::Zero(n)), v_(Eigen::VectorXd::Zero(n)) {}

  void append(Eigen::Index extra) {
    m_.conservativeResize(m_.size() + extra);
    v_.conservativeResize(v_.size() + extra);
    m_.tail(extra).setZero();
    v_.tail(extra).setZero();
  }

  Eigen::Index size() const { return m_.size(); }

  Eigen::VectorXd step(const Eigen::VectorXd& grad, const Eigen::VectorXd& lr) {
    ++t_;
    m_ = kBeta1 * m_ + (1.0 - kBeta1) * grad;
    v_ = kBeta2 * v_.array().matrix() + (1.0 - kBeta2) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(kBeta1, t_);
    const double c2 = 1.0 - std::pow(kBeta2, t_);
    Eigen::VectorXd delta(m_.size());
    for (Eigen::Index i = 0; i < m_.size(); ++i) {
      const double mhat = m_(i) / c1;
      const double vhat = v_(i) / c2;
      delta(i) = -lr(i) * mhat / (std::sqrt(vhat) + 1e-8);
    }
    return delta;
  }

  struct Snapshot {
    Eigen::VectorXd m, v;
    int t;
  };
  Snapshot snapshot() const { return {m_, v_, t_}; }
  void restore(const Snapshot& s) {
    m_ = s.m;
    v_ = s.v;
    t_ = s.t;
  }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  Eigen::VectorXd m_, v_;
  int t_ = 0;
};

core::Mask silhouette_mask(const RenderOutput& rendered) {
  core::Mask m(rendered.width(), rendered.height(), uint8_t{0});
  for (size_t i = 0; i < m.size(); ++i)
    m[i] = rendered.silhouette[i] > kSilhouetteThreshold ? 1 : 0;
  return m;
}

double coverage_fraction(const RenderOutput& rendered) {
  size_t covered = 0;
  for (double a : rendered.silhouette.data()) covered += a > kSilhouetteThreshold;
  return double(covered) / double(rendered.silhouette.size());
}

// exp(trimmed mean of log(num) - log(den)) over pixels passing all masks.
struct LogRatioScale {
  double factor = 1.0;
  size_t pixels = 0;
};

LogRatioScale trimmed_log_ratio(const core::DepthMap& num, const core::DepthMap& den,
                                const core::Mask& mask) {
  std::vector<double> ratios;
  ratios.reserve(mask.size());
  for (size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i] || !num.valid[i] || !den.valid[i]) continue;
    ratios.push_back(std::log(num.value[i]) - std::log(den.value[i]));
  }
  LogRatioScale out;
  out.pixels = ratios.size();
  if (ratios.empty()) return out;
  std::sort(ratios.begin(), ratios.end());
  const size_t trim = size_t(0.02 * double(ratios.size()));
  double sum = 0.0;
  for (size_t i = trim; i < ratios.size() - trim; ++i) sum += ratios[i];
  out.factor = std::exp(sum / double(ratios.size() - 2 * trim));
  return out;
}

size_t joint_depth_pixels(const core::DepthMap& a, const core::DepthMap& b,
                          const core::Mask& mask) {
  size_t n = 0;
  for (size_t i = 0; i < mask.size(); ++i) n += (mask[i] && a.valid[i] && b.valid[i]);
  return n;
}

}  // namespace

// ===========================================================================
// Pose refinement (photometric + scale-invariant depth)
// ===========================================================================

namespace {

double pose_objective(const SplatMap& map, const ViewObservation& view,
                      const core::Intrinsics& intr, const LossWeights& weights,
                      const core::Pose& pose, PixelAdjoints* adj, RenderCache* cache,
                      RenderOutput* out_render) {
  RenderCache local_cache;
  RenderCache& c = cache ? *cache : local_cache;
  RenderOutput rendered = render_with_cache(map, pose, intr, c);
  const core::Mask mask = silhouette_mask(rendered);

  double loss = photometric_l1(rendered.color, view.color, &mask, adj, 1.0);
  if (weights.lambda_scale_depth > 0.0 &&
      joint_depth_pixels(rendered.depth, view.depth, mask) > 0)
    loss += weights.lambda_scale_depth * scale_invariant_depth_loss(
                rendered.depth, view.depth, mask, adj, weights.lambda_scale_depth);
  if (out_render) *out_render = std::move(rendered);
  return loss;
}

}  // namespace

PoseRefineResult refine_pose_intra(const SplatMap& map, const ViewObservation& view,
                                   const core::Intrinsics& intr, const LossWeights& weights,
                                   int iters, const LearningRates& lrs) {
  PoseRefineResult result;
  result.pose = view.pose;

  RenderOutput probe = render(map, view.pose, intr);
  result.coverage = coverage_fraction(probe);
  if (result.coverage < 0.01) {
    result.skipped = true;
    return result;
  }

  Eigen::VectorXd lr(6);
  lr << lrs.pose_rot, lrs.pose_rot, lrs.pose_rot, lrs.pose_trans, lrs.pose_trans, lrs.pose_trans;
  AdamOptimizer adam(6);
  double lr_scale = 1.0;

  core::Pose current = view.pose;
  double current_loss = pose_objective(map, view, intr, weights, current, nullptr, nullptr, nullptr);
  if (!std::isfinite(current_loss))
    throw std::runtime_error("refine_pose_intra: non-finite loss at initialization");
  result.initial_loss = current_loss;
  result.final_loss = current_loss;

  for (int it = 0; it < iters; ++it) {
    PixelAdjoints adj;
    RenderCache cache;
    RenderOutput rendered;
    const double loss =
        pose_objective(map, view, intr, weights, current, &adj, &cache, &rendered);
    if (!std::isfinite(loss))
      throw std::runtime_error("refine_pose_intra: non-finite loss during optimization");
    RenderGrads grads;
    render_backward(map, cache, rendered, adj, grads);

    Eigen::VectorXd g(6);
    g << grads.d_pose_rot, grads.d_pose_trans;
    const auto snap = adam.snapshot();
    const Eigen::VectorXd delta = adam.step(g, lr_scale * lr);
    const core::Pose proposed = current.right_update(delta.head<3>(), delta.tail<3>());
    const double new_loss =
        pose_objective(map, view, intr, weights, proposed, nullptr, nullptr, nullptr);

    if (std::isfinite(new_loss) && new_loss <= loss + 1e-12 * std::max(1.0, std::abs(loss))) {
      current = proposed;
      current_loss = new_loss;
      ++result.accepted_steps;
      lr_scale = std::min(1.0, lr_scale * 1.25);
      if (new_loss < result.final_loss) {
        result.final_loss = new_loss;
        result.pose = current;
      }
    } else {
      adam.restore(snap);
      lr_scale *= 0.5;
      if (lr_scale < 1e-4) break;
    }
  }
  return result;
}

// ===========================================================================
// Depth rescale + reprojection (the post-refinement view update)
// ===========================================================================

RescaleResult rescale_and_reproject(const ViewObservation& view, const core::Pose& refined_pose,
                                    const RenderOutput& rendered, const core::Intrinsics& intr) {
  RescaleResult out;
  const core::Mask mask = silhouette_mask(rendered);
  const LogRatioScale scale = trimmed_log_ratio(rendered.depth, view.depth, mask);
  out.factor = scale.factor;
  out.empty_mask = scale.pixels == 0;

  out.depth = view.depth;
  if (!out.empty_mask) {
    for (size_t i = 0; i < out.depth.value.size(); ++i)
      if (out.depth.valid[i]) out.depth.value[i] *= out.factor;
  }
  out.points = core::unproject(out.depth, intr, refined_pose);
  return out;
}

// ===========================================================================
// Densification
// ===========================================================================

std::vector<uint64_t> densify(SplatMap& map, const RegisteredView& view,
                              const core::Intrinsics& intr, int stride) {
  if (stride < 1) throw std::invalid_argument("densify: stride must be >= 1");
  std::vector<uint64_t> added;
  const core::NormalMap normals = core::depth_to_normal(view.depth, intr);
  const Eigen::Matrix3d r_wc = view.pose.rotation();

  for (int y = 0; y < view.depth.height(); y += stride) {
    for (int x = 0; x < view.depth.width(); x += stride) {
      if (view.silhouette.at(x, y) >= kSilhouetteThreshold) continue;
      if (!view.depth.valid.at(x, y) || !view.points.valid.at(x, y)) continue;
      const double d = view.depth.value.at(x, y);

      Splat s;
      s.position = view.points.point.at(x, y);
      s.color = view.color.at(x, y);
      s.opacity = 0.7;
      s.origin_submap = view.submap_id;
      const double radius =
          std::clamp(d / intr.fx * double(stride), kMinSplatRadius, kMaxSplatRadius);
      s.scale = Eigen::Vector3d::Constant(radius);

      Eigen::Vector3d n_world;
      if (normals.valid.at(x, y)) {
        n_world = r_wc * normals.normal.at(x, y);
      } else {
        const Eigen::Vector3d ray((x - intr.cx) / intr.fx, (y - intr.cy) / intr.fy, 1.0);
        n_world = -(r_wc * ray).normalized();
      }
      s.rotation = Eigen::Quaterniond::FromTwoVectors(Eigen::Vector3d::UnitZ(), n_world);
      added.push_back(map.add(std::move(s)));
    }
  }
  return added;
}

// ===========================================================================
// Windowed / global map optimization
// ===========================================================================

namespace {

constexpr int kSplatParamDim = 13;  // pos 3, rot 3, scale 3, opacity 1, color 3

Eigen::VectorXd splat_lr_vector(size_t n, const LearningRates& lrs) {
  Eigen::VectorXd lr(n * kSplatParamDim);
  for (size_t i = 0; i < n; ++i) {
    double* p = lr.data() + i * kSplatParamDim;
    p[0] = p[1] = p[2] = lrs.position;
    p[3] = p[4] = p[5] = lrs.rotation;
    p[6] = p[7] = p[8] = lrs.scale;
    p[9] = lrs.opacity;
    p[10] = p[11] = p[12] = lrs.color;
  }
  return lr;
}

Eigen::VectorXd flatten_grads(const RenderGrads& g) {
  Eigen::VectorXd out(g.d_position.size() * kSplatParamDim);
  for (size_t i = 0; i < g.d_position.size(); ++i) {
    out.segment<3>(Eigen::Index(i) * kSplatParamDim) = g.d_position[i];
    out.segment<3>(Eigen::Index(i) * kSplatParamDim + 3) = g.d_rotation[i];
    out.segment<3>(Eigen::Index(i) * kSplatParamDim + 6) = g.d_scale[i];
    out(Eigen::Index(i) * kSplatParamDim + 9) = g.d_opacity[i];
    out.segment<3>(Eigen::Index(i) * kSplatParamDim + 10) = g.d_color[i];
  }
  return out;
}

void apply_splat_delta(SplatMap& map, const Eigen::VectorXd& delta) {
  for (size_t i = 0; i < map.size(); ++i) {
    const double* p = delta.data() + i * kSplatParamDim;
    Splat& s = map.splats[i];
    s.position += Eigen::Map<const Eigen::Vector3d>(p);
    s.rotation = s.rotation * core::so3_exp(Eigen::Map<const Eigen::Vector3d>(p + 3));
    s.scale += Eigen::Map<const Eigen::Vector3d>(p + 6);
    s.opacity += p[9];
    s.color += Eigen::Map<const Eigen::Vector3d>(p + 10);
    s.clamp_parameters();
  }
}

/// Loss of one view against the map (forward only when adjoints are null).
double map_view_loss(const SplatMap& map, const RegisteredView& view,
                     const core::Intrinsics& intr, const LossWeights& weights,
                     const OptimizeOptions& opts, PixelAdjoints* adj, RenderGrads* reg_grads,
                     RenderCache* cache, RenderOutput* out_render) {
  RenderCache local;
  RenderCache& c = cache ? *cache : local;
  RenderOutput rendered = render_with_cache(map, view.pose, intr, c);
  const core::Mask mask = silhouette_mask(rendered);

  ExposureFit exposure;
  core::ColorImage compared = rendered.color;
  if (opts.exposure) {
    exposure = fit_exposure(rendered.color, view.color, mask);
    compared = apply_exposure(rendered.color, exposure);
  }

  double loss = 0.0;
  PixelAdjoints photometric_adj;
  PixelAdjoints* pa = adj ? &photometric_adj : nullptr;
  loss += photometric_l1(compared, view.color, nullptr, pa, 1.0);
  if (weights.ssim_weight > 0.0) {
    core::ColorImage d_ssim;
    const double s = ssim_with_grad(compared, view.color, pa ? &d_ssim : nullptr);
    loss += weights.ssim_weight * (1.0 - s);
    if (pa)
      for (size_t i = 0; i < d_ssim.size(); ++i)
        photometric_adj.d_color[i] += -weights.ssim_weight * d_ssim[i];
  }
  if (adj && pa) {
    // Photometric adjoints act on the exposure-corrected image.
    if (adj->d_color.empty())
      adj->d_color = core::ColorImage(rendered.width(), rendered.height(), Eigen::Vector3d::Zero());
    const Eigen::Matrix3d gain_t = exposure.gain.transpose();
    for (size_t i = 0; i < photometric_adj.d_color.size(); ++i)
      adj->d_color[i] += opts.exposure ? (gain_t * photometric_adj.d_color[i]).eval()
                                       : photometric_adj.d_color[i];
  }

  if (opts.lambda_depth > 0.0)
    loss += opts.lambda_depth * inverse_depth_l1(rendered.depth, view.depth, mask, adj, opts.lambda_depth);
  if (weights.lambda_depth_normal > 0.0) {
    const core::NormalMap view_normals = core::depth_to_normal(view.depth, intr);
    loss += weights.lambda_depth_normal * depth_normal_loss(rendered.depth, view_normals, intr,
                                                            adj, weights.lambda_depth_normal);
    if (opts.use_normal_loss && weights.lambda_normal > 0.0)
      loss += weights.lambda_normal *
              rendered_normal_loss(rendered.normal, view_normals, adj, weights.lambda_normal);
  } else if (opts.use_normal_loss && weights.lambda_normal > 0.0) {
    const core::NormalMap view_normals = core::depth_to_normal(view.depth, intr);
    loss += weights.lambda_normal *
            rendered_normal_loss(rendered.normal, view_normals, adj, weights.lambda_normal);
  }
  if (opts.use_scale_reg && weights.lambda_scale_reg > 0.0)
    loss += weights.lambda_scale_reg * scale_regularizer(map, reg_grads, weights.lambda_scale_reg);

  if (out_render) *out_render = std::move(rendered);
  return loss;
}

}  // namespace

OptimizeStats optimize_map(SplatMap& map, std::vector<RegisteredView*>& views,
                           const core::Intrinsics& intr, const LossWeights& weights,
                           const OptimizeOptions& opts, const LearningRates& lrs) {
  if (views.empty()) throw std::invalid_argument("optimize_map: need at least one view");
  weights.validate();
  OptimizeStats stats;

  AdamOptimizer splat_adam(Eigen::Index(map.size()) * kSplatParamDim);
  std::vector<AdamOptimizer> pose_adams(views.size(), AdamOptimizer(6));
  Eigen::VectorXd pose_lr(6);
  pose_lr << lrs.pose_rot, lrs.pose_rot, lrs.pose_rot, lrs.pose_trans, lrs.pose_trans,
      lrs.pose_trans;
  double lr_scale = 1.0;

  {
    double total = 0.0;
    for (const RegisteredView* v : views)
      total += map_view_loss(map, *v, intr, weights, opts, nullptr, nullptr, nullptr, nullptr);
    stats.initial_loss = total / double(views.size());
  }

  for (int it = 0; it < opts.iters; ++it) {
    if (opts.densify_every > 0 && it > 0 && it % opts.densify_every == 0) {
      for (RegisteredView* v : views) {
        RenderOutput r = render(map, v->pose, intr);
        v->silhouette = r.silhouette;
        stats.densified += densify(map, *v, intr, opts.densify_stride).size();
      }
      if (Eigen::Index(map.size()) * kSplatParamDim > splat_adam.size())
        splat_adam.append(Eigen::Index(map.size()) * kSplatParamDim - splat_adam.size());
    }

    RegisteredView& view = *views[it % views.size()];
    AdamOptimizer& pose_adam = pose_adams[it % views.size()];

    PixelAdjoints adj;
    RenderCache cache;
    RenderOutput rendered;
    RenderGrads grads;
    grads.resize(map.size());
    const double loss =
        map_view_loss(map, view, intr, weights, opts, &adj, &grads, &cache, &rendered);
    if (!std::isfinite(loss)) break;  // keep best-so-far state

    RenderGrads render_grads;
    render_backward(map, cache, rendered, adj, render_grads);
    render_grads.add_scaled(grads, 1.0);  // scale-regularizer contributions

    const auto splat_snap = splat_adam.snapshot();
    const auto pose_snap = pose_adam.snapshot();
    const std::vector<Splat> splats_backup = map.splats;
    const core::Pose pose_backup = view.pose;

    apply_splat_delta(map, splat_adam.step(flatten_grads(render_grads),
                                           lr_scale * splat_lr_vector(map.size(), lrs)));
    if (opts.optimize_poses) {
      Eigen::VectorXd g(6);
      g << render_grads.d_pose_rot, render_grads.d_pose_trans;
      const Eigen::VectorXd delta = pose_adam.step(g, lr_scale * pose_lr);
      view.pose = view.pose.right_update(delta.head<3>(), delta.tail<3>());
    }

    const double new_loss =
        map_view_loss(map, view, intr, weights, opts, nullptr, nullptr, nullptr, nullptr);
    if (std::isfinite(new_loss) && new_loss <= loss + 1e-12 * std::max(1.0, std::abs(loss))) {
      ++stats.accepted;
      lr_scale = std::min(1.0, lr_scale * 1.25);
    } else {
      map.splats = splats_backup;
      view.pose = pose_backup;
      splat_adam.restore(splat_snap);
      pose_adam.restore(pose_snap);
      ++stats.rejected;
      lr_scale *= 0.5;
      if (lr_scale < 1e-4) break;
    }
  }

  stats.pruned = map.prune_transparent();
  {
    double total = 0.0;
    for (const RegisteredView* v : views)
      total += map_view_loss(map, *v, intr, weights, opts, nullptr, nullptr, nullptr, nullptr);
    stats.final_loss = total / double(views.size());
  }
  return stats;
}

OptimizeStats bundle_adjust_window(SplatMap& map, std::vector<RegisteredView*>& views,
                                   const core::Intrinsics& intr, const LossWeights& weights,
                                   int iters, const LearningRates& lrs) {
  OptimizeOptions opts;
  opts.iters = iters;
  opts.lambda_depth = weights.lambda_depth;
  opts.use_scale_reg = true;
  opts.use_normal_loss = false;
  return optimize_map(map, views, intr, weights, opts, lrs);
}

// ===========================================================================
// Feedback and exposure
// ===========================================================================

std::vector<ViewFeedback> feedback_views(const SplatMap& map,
                                         const std::vector<const RegisteredView*>& views,
                                         const core::Intrinsics& intr) {
  std::vector<ViewFeedback> out;
  out.reserve(views.size());
  for (const RegisteredView* v : views) {
    const RenderOutput rendered = render(map, v->pose, intr);
    const core::Mask mask = silhouette_mask(rendered);
    const LogRatioScale scale = trimmed_log_ratio(rendered.depth, v->depth, mask);

    ViewFeedback fb;
    fb.keyframe_id = v->keyframe_id;
    fb.pose = v->pose;
    fb.factor = scale.pixels == 0 ? 1.0 : scale.factor;
    fb.depth = v->depth;
    for (size_t i = 0; i < fb.depth.value.size(); ++i)
      if (fb.depth.valid[i]) fb.depth.value[i] *= fb.factor;
    fb.points = core::unproject(fb.depth, intr, fb.pose);
    out.push_back(std::move(fb));
  }
  return out;
}

ExposureFit fit_exposure(const core::ColorImage& rendered, const core::ColorImage& observed,
                         const core::Mask& mask) {
  if (!rendered.same_size(observed) || !rendered.same_size(mask))
    throw std::invalid_argument("fit_exposure: dimension mismatch");
  ExposureFit fit;

  Eigen::Matrix4d normal = Eigen::Matrix4d::Zero();
  Eigen::Matrix<double, 4, 3> rhs = Eigen::Matrix<double, 4, 3>::Zero();
  size_t count = 0;
  for (size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    Eigen::Vector4d x;
    x << rendered[i], 1.0;
    normal += x * x.transpose();
    rhs += x * observed[i].transpose();
    ++count;
  }
  if (count < 12) {
    fit.degenerate = true;
    return fit;
  }
  const Eigen::FullPivLU<Eigen::Matrix4d> lu(normal);
  if (lu.rank() < 4) {
    fit.degenerate = true;
    return fit;
  }
  const Eigen::Matrix<double, 4, 3> sol = lu.solve(rhs);
  fit.gain = sol.topRows<3>().transpose();
  fit.bias = sol.row(3).transpose();
  return fit;
}

core::ColorImage apply_exposure(const core::ColorImage& image, const ExposureFit& fit) {
  core::ColorImage out = image;
  for (auto& px : out.data()) px = fit.gain * px + fit.bias;
  return out;
}

}  // namespace subsplat::splat
