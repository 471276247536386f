#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace subsplat::core {

/// Dense row-major 2D grid. Pixel (x, y) = (column, row).
template <typename T>
class Image {
 public:
  Image() = default;
  Image(int width, int height, const T& fill = T{})
      : w_(width), h_(height), data_(static_cast<size_t>(width) * height, fill) {
    if (width < 0 || height < 0) throw std::invalid_argument("Image: negative dimensions");
  }

  int width() const { return w_; }
  int height() const { return h_; }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& at(int x, int y) { return data_[static_cast<size_t>(y) * w_ + x]; }
  const T& at(int x, int y) const { return data_[static_cast<size_t>(y) * w_ + x]; }
  T& operator[](size_t i) { return data_[i]; }
  const T& operator[](size_t i) const { return data_[i]; }

  bool contains(int x, int y) const { return x >= 0 && x < w_ && y >= 0 && y < h_; }
  bool same_size(int width, int height) const { return w_ == width && h_ == height; }
  template <typename U>
  bool same_size(const Image<U>& other) const {
    return same_size(other.width(), other.height());
  }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

 private:
  int w_ = 0;
  int h_ = 0;
  std::vector<T> data_;
};

using Mask = Image<uint8_t>;
using GrayImage = Image<double>;
using ColorImage = Image<Eigen::Vector3d>;  // RGB in [0,1]

/// Depth in meters; valid entries are finite and > 0.
struct DepthMap {
  GrayImage value;
  Mask valid;

  DepthMap() = default;
  DepthMap(int width, int height)
      : value(width, height, 0.0), valid(width, height, uint8_t{0}) {}
  int width() const { return value.width(); }
  int height() const { return value.height(); }
  size_t count_valid() const;
};

/// Per-pixel 3D points (meters) in some stated frame.
struct PointMap {
  Image<Eigen::Vector3d> point;
  Mask valid;

  PointMap() = default;
  PointMap(int width, int height)
      : point(width, height, Eigen::Vector3d::Zero()), valid(width, height, uint8_t{0}) {}
  int width() const { return point.width(); }
  int height() const { return point.height(); }
  size_t count_valid() const;
};

/// Per-pixel unit normals.
struct NormalMap {
  Image<Eigen::Vector3d> normal;
  Mask valid;

  NormalMap() = default;
  NormalMap(int width, int height)
      : normal(width, height, Eigen::Vector3d::Zero()), valid(width, height, uint8_t{0}) {}
  int width() const { return normal.width(); }
  int height() const { return normal.height(); }
};

}  // namespace subsplat::core
