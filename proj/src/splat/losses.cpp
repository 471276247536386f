#include "subsplat/splat/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace subsplat::splat {

namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

void ensure_adjoint_images(PixelAdjoints* adj, int w, int h) {
  if (!adj) return;
  if (adj->d_color.empty()) adj->d_color = core::ColorImage(w, h, Eigen::Vector3d::Zero());
  if (adj->d_silhouette.empty()) adj->d_silhouette = core::GrayImage(w, h, 0.0);
  if (adj->d_depth.empty()) adj->d_depth = core::GrayImage(w, h, 0.0);
  if (adj->d_normal.empty())
    adj->d_normal = core::Image<Eigen::Vector3d>(w, h, Eigen::Vector3d::Zero());
}

}  // namespace

double photometric_l1(const core::ColorImage& rendered, const core::ColorImage& observed,
                      const core::Mask* mask, PixelAdjoints* adj, double weight) {
  if (!rendered.same_size(observed))
    throw std::invalid_argument("photometric_l1: dimension mismatch");
  ensure_adjoint_images(adj, rendered.width(), rendered.height());
  double sum = 0.0;
  size_t count = 0;
  for (size_t i = 0; i < rendered.size(); ++i) {
    if (mask && !(*mask)[i]) continue;
    sum += (rendered[i] - observed[i]).cwiseAbs().sum();
    ++count;
  }
  if (count == 0) return 0.0;
  const double norm = 1.0 / double(3 * count);
  if (adj) {
    for (size_t i = 0; i < rendered.size(); ++i) {
      if (mask && !(*mask)[i]) continue;
      Eigen::Vector3d g;
      for (int c = 0; c < 3; ++c) g(c) = sign(rendered[i](c) - observed[i](c));
      adj->d_color[i] += weight * norm * g;
    }
  }
  return sum * norm;
}

namespace {

std::vector<double> ssim_kernel(int radius) {
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * i * i / (1.5 * 1.5));
    sum += k[i + radius];
  }
  for (double& v : k) v /= sum;
  return k;
}

core::GrayImage conv2(const core::GrayImage& img, const std::vector<double>& k) {
  const int r = int(k.size() / 2);
  core::GrayImage tmp(img.width(), img.height(), 0.0);
  for (int y = 0; y < img.height(); ++y)
    for (int x = r; x < img.width() - r; ++x) {
      double s = 0.0;
      for (int i = -r; i <= r; ++i) s += k[i + r] * img.at(x + i, y);
      tmp.at(x, y) = s;
    }
  core::GrayImage out(img.width(), img.height(), 0.0);
  for (int y = r; y < img.height() - r; ++y)
    for (int x = r; x < img.width() - r; ++x) {
      double s = 0.0;
      for (int i = -r; i <= r; ++i) s += k[i + r] * tmp.at(x, y + i);
      out.at(x, y) = s;
    }
  return out;
}

// Transpose of conv2: scatters adjoints (defined on the valid interior) back
// through the separable kernel.
core::GrayImage conv2_transpose(const core::GrayImage& adj, const std::vector<double>& k,
                                int radius) {
  const int r = radius;
  core::GrayImage tmp(adj.width(), adj.height(), 0.0);
  for (int y = r; y < adj.height() - r; ++y)
    for (int x = r; x < adj.width() - r; ++x) {
      const double v = adj.at(x, y);
      if (v == 0.0) continue;
      for (int i = -r; i <= r; ++i) tmp.at(x, y + i) += k[i + r] * v;
    }
  core::GrayImage out(adj.width(), adj.height(), 0.0);
  for (int y = 0; y < adj.height(); ++y)
    for (int x = r; x < adj.width() - r; ++x) {
      const double v = tmp.at(x, y);
      if (v == 0.0) continue;
      for (int i = -r; i <= r; ++i) out.at(x + i, y) += k[i + r] * v;
    }
  // Edge columns/rows of tmp (outside the x-valid band) carry no adjoint by
  // construction of conv2's valid region.
  return out;
}

}  // namespace

double ssim_with_grad(const core::ColorImage& rendered, const core::ColorImage& observed,
                      core::ColorImage* d_rendered) {
  if (!rendered.same_size(observed)) throw std::invalid_argument("ssim: dimension mismatch");
  int radius = 5;
  const int min_dim = std::min(rendered.width(), rendered.height());
  if (min_dim < 11) radius = std::max(0, (min_dim - 1) / 2);
  const std::vector<double> kernel = ssim_kernel(radius);
  constexpr double c1 = 0.01 * 0.01;
  constexpr double c2 = 0.03 * 0.03;

  if (d_rendered && d_rendered->empty())
    *d_rendered = core::ColorImage(rendered.width(), rendered.height(), Eigen::Vector3d::Zero());

  const int w = rendered.width(), h = rendered.height();
  const size_t valid_count = size_t(std::max(0, w - 2 * radius)) * size_t(std::max(0, h - 2 * radius));
  if (valid_count == 0) throw std::invalid_argument("ssim: image smaller than window");
  const double pixel_w = 1.0 / (double(valid_count) * 3.0);

  double total = 0.0;
  core::GrayImage xa(w, h), xb(w, h), xaa(w, h), xbb(w, h), xab(w, h);
  core::GrayImage adj_mu(w, h), adj_aa(w, h), adj_ab(w, h);
  for (int ch = 0; ch < 3; ++ch) {
    for (size_t i = 0; i < rendered.size(); ++i) {
      const double va = rendered[i](ch), vb = observed[i](ch);
      xa[i] = va;
      xb[i] = vb;
      xaa[i] = va * va;
      xbb[i] = vb * vb;
      xab[i] = va * vb;
    }
    const core::GrayImage mu_a = conv2(xa, kernel);
    const core::GrayImage mu_b = conv2(xb, kernel);
    const core::GrayImage m_aa = conv2(xaa, kernel);
    const core::GrayImage m_bb = conv2(xbb, kernel);
    const core::GrayImage m_ab = conv2(xab, kernel);

    for (auto& v : adj_mu.data()) v = 0.0;
    for (auto& v : adj_aa.data()) v = 0.0;
    for (auto& v : adj_ab.data()) v = 0.0;

    for (int y = radius; y < h - radius; ++y) {
      for (int x = radius; x < w - radius; ++x) {
        const double ma = mu_a.at(x, y), mb = mu_b.at(x, y);
        const double va = m_aa.at(x, y) - ma * ma;
        const double vb = m_bb.at(x, y) - mb * mb;
        const double cov = m_ab.at(x, y) - ma * mb;
        const double num_l = 2.0 * ma * mb + c1;
        const double den_l = ma * ma + mb * mb + c1;
        const double num_c = 2.0 * cov + c2;
        const double den_c = va + vb + c2;
        const double s = (num_l * num_c) / (den_l * den_c);
        total += s * pixel_w;
        if (!d_rendered) continue;

        const double ds_dmu_direct = s * (2.0 * mb / num_l - 2.0 * ma / den_l);
        const double ds_dva = -s / den_c;
        const double ds_dcov = 2.0 * s / num_c;
        // va = m_aa - mu_a^2, cov = m_ab - mu_a*mu_b fold extra mu_a terms in.
        adj_mu.at(x, y) = pixel_w * (ds_dmu_direct - 2.0 * ma * ds_dva - mb * ds_dcov);
        adj_aa.at(x, y) = pixel_w * ds_dva;
        adj_ab.at(x, y) = pixel_w * ds_dcov;
      }
    }
    if (!d_rendered) continue;
    const core::GrayImage back_mu = conv2_transpose(adj_mu, kernel, radius);
    const core::GrayImage back_aa = conv2_transpose(adj_aa, kernel, radius);
    const core::GrayImage back_ab = conv2_transpose(adj_ab, kernel, radius);
    for (size_t i = 0; i < rendered.size(); ++i)
      (*d_rendered)[i](ch) +=
          back_mu[i] + 2.0 * rendered[i](ch) * back_aa[i] + observed[i](ch) * back_ab[i];
  }
  return total;
}

double scale_invariant_depth_loss(const core::DepthMap& d_hat, const core::DepthMap& d,
                                  const core::Mask& mask, PixelAdjoints* adj, double weight) {
  if (!d_hat.value.same_size(d.value) || !d_hat.value.same_size(mask))
    throw std::invalid_argument("scale_invariant_depth_loss: dimension mismatch");
  ensure_adjoint_images(adj, d_hat.width(), d_hat.height());

  double sum = 0.0, sum_sq = 0.0;
  size_t n = 0;
  for (size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i] || !d_hat.valid[i] || !d.valid[i]) continue;
    const double e = std::log(d_hat.value[i]) - std::log(d.value[i]);
    sum += e;
    sum_sq += e * e;
    ++n;
  }
  if (n == 0) throw std::invalid_argument("scale_invariant_depth_loss: no valid pixels");
  const double mean = sum / double(n);
  const double loss = sum_sq / double(n) - mean * mean;
  if (adj) {
    for (size_t i = 0; i < mask.size(); ++i) {
      if (!mask[i] || !d_hat.valid[i] || !d.valid[i]) continue;
      const double e = std::log(d_hat.value[i]) - std::log(d.value[i]);
      adj->d_depth[i] += weight * (2.0 / double(n)) * (e - mean) / d_hat.value[i];
    }
  }
  return loss;
}

double inverse_depth_l1(const core::DepthMap& d_hat, const core::DepthMap& d,
                        const core::Mask& mask, PixelAdjoints* adj, double weight) {
  if (!d_hat.value.same_size(d.value) || !d_hat.value.same_size(mask))
    throw std::invalid_argument("inverse_depth_l1: dimension mismatch");
  ensure_adjoint_images(adj, d_hat.width(), d_hat.height());
  double sum = 0.0;
  size_t n = 0;
  for (size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i] || !d_hat.valid[i] || !d.valid[i]) continue;
    sum += std::abs(1.0 / d.value[i] - 1.0 / d_hat.value[i]);
    ++n;
  }
  if (n == 0) return 0.0;
  if (adj) {
    for (size_t i = 0; i < mask.size(); ++i) {
      if (!mask[i] || !d_hat.valid[i] || !d.valid[i]) continue;
      const double r = 1.0 / d.value[i] - 1.0 / d_hat.value[i];
      adj->d_depth[i] += weight * sign(r) / (d_hat.value[i] * d_hat.value[i] * double(n));
    }
  }
  return sum / double(n);
}

double depth_normal_loss(const core::DepthMap& d_hat, const core::NormalMap& view_normal,
                         const core::Intrinsics& intr, PixelAdjoints* adj, double weight) {
  const core::NormalMap rendered = core::depth_to_normal(d_hat, intr);
  if (!rendered.normal.same_size(view_normal.normal))
    throw std::invalid_argument("depth_normal_loss: dimension mismatch");
  ensure_adjoint_images(adj, d_hat.width(), d_hat.height());

  double sum = 0.0;
  size_t n = 0;
  for (size_t i = 0; i < rendered.normal.size(); ++i) {
    if (!rendered.valid[i] || !view_normal.valid[i]) continue;
    sum += 1.0 - view_normal.normal[i].dot(rendered.normal[i]);
    ++n;
  }
  if (n == 0) return 0.0;
  if (adj) {
    core::Image<Eigen::Vector3d> d_normal(d_hat.width(), d_hat.height(), Eigen::Vector3d::Zero());
    for (size_t i = 0; i < rendered.normal.size(); ++i) {
      if (!rendered.valid[i] || !view_normal.valid[i]) continue;
      d_normal[i] = -(weight / double(n)) * view_normal.normal[i];
    }
    const core::GrayImage d_depth = normal_from_depth_backward(d_hat, intr, rendered, d_normal);
    for (size_t i = 0; i < d_depth.size(); ++i) adj->d_depth[i] += d_depth[i];
  }
  return sum / double(n);
}

double rendered_normal_loss(const core::NormalMap& rendered, const core::NormalMap& view_normal,
                            PixelAdjoints* adj, double weight) {
  if (!rendered.normal.same_size(view_normal.normal))
    throw std::invalid_argument("rendered_normal_loss: dimension mismatch");
  ensure_adjoint_images(adj, rendered.width(), rendered.height());
  double sum = 0.0;
  size_t n = 0;
  for (size_t i = 0; i < rendered.normal.size(); ++i) {
    if (!rendered.valid[i] || !view_normal.valid[i]) continue;
    sum += 1.0 - view_normal.normal[i].dot(rendered.normal[i]);
    ++n;
  }
  if (n == 0) return 0.0;
  if (adj) {
    for (size_t i = 0; i < rendered.normal.size(); ++i) {
      if (!rendered.valid[i] || !view_normal.valid[i]) continue;
      adj->d_normal[i] += -(weight / double(n)) * view_normal.normal[i];
    }
  }
  return sum / double(n);
}

double scale_regularizer(const SplatMap& map, RenderGrads* grads, double weight) {
  if (map.splats.empty()) return 0.0;
  double sum = 0.0;
  for (size_t i = 0; i < map.size(); ++i) {
    const Eigen::Vector3d& s = map.splats[i].scale;
    const double mean = s.mean();
    double local = 0.0;
    Eigen::Vector3d signs;
    for (int j = 0; j < 3; ++j) {
      local += std::abs(s(j) - mean);
      signs(j) = sign(s(j) - mean);
    }
    sum += local;
    if (grads) {
      const double sign_sum = signs.sum();
      for (int j = 0; j < 3; ++j)
        grads->d_scale[i](j) +=
            weight / double(map.size()) * (signs(j) - sign_sum / 3.0);
    }
  }
  return sum / double(map.size());
}

core::GrayImage normal_from_depth_backward(const core::DepthMap& depth,
                                           const core::Intrinsics& intr,
                                           const core::NormalMap& normals,
                                           const core::Image<Eigen::Vector3d>& d_normal) {
  core::GrayImage d_depth(depth.width(), depth.height(), 0.0);
  core::Image<Eigen::Vector3d> d_point(depth.width(), depth.height(), Eigen::Vector3d::Zero());
  const core::PointMap pts = core::unproject(depth, intr, core::Pose::identity());

  for (int y = 1; y + 1 < depth.height(); ++y) {
    for (int x = 1; x + 1 < depth.width(); ++x) {
      if (!normals.valid.at(x, y)) continue;
      const Eigen::Vector3d& dn = d_normal.at(x, y);
      if (dn.isZero(0.0)) continue;
      const Eigen::Vector3d tu = pts.point.at(x + 1, y) - pts.point.at(x - 1, y);
      const Eigen::Vector3d tv = pts.point.at(x, y + 1) - pts.point.at(x, y - 1);
      Eigen::Vector3d m = tu.cross(tv);
      const double len = m.norm();
      if (len < 1e-15) continue;
      const double flip = m.z() > 0.0 ? -1.0 : 1.0;  // matches depth_to_normal
      const Eigen::Vector3d unit = flip * m / len;
      // d(unit)/d(m) with sign folded in.
      const Eigen::Vector3d dm = flip * (dn - unit * unit.dot(dn)) / len;
      const Eigen::Vector3d d_tu = tv.cross(dm);
      const Eigen::Vector3d d_tv = dm.cross(tu);
      d_point.at(x + 1, y) += d_tu;
      d_point.at(x - 1, y) -= d_tu;
      d_point.at(x, y + 1) += d_tv;
      d_point.at(x, y - 1) -= d_tv;
    }
  }
  // point(u,v) = d * ((u-cx)/fx, (v-cy)/fy, 1)
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      const Eigen::Vector3d& dp = d_point.at(x, y);
      if (dp.isZero(0.0) || !depth.valid.at(x, y)) continue;
      const Eigen::Vector3d dir((x - intr.cx) / intr.fx, (y - intr.cy) / intr.fy, 1.0);
      d_depth.at(x, y) += dir.dot(dp);
    }
  }
  return d_depth;
}

}  // namespace subsplat::splat
