#pragma once

#include <stdexcept>

namespace subsplat::core {

/// Pinhole camera: pixel u = fx * x/z + cx, v = fy * y/z + cy.
struct Intrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  Intrinsics() = default;
  Intrinsics(double fx_, double fy_, double cx_, double cy_, int w, int h)
      : fx(fx_), fy(fy_), cx(cx_), cy(cy_), width(w), height(h) {
    validate();
  }

  void validate() const {
    if (fx <= 0.0 || fy <= 0.0) throw std::invalid_argument("Intrinsics: focal lengths must be > 0");
    if (cx < 0.0 || cx >= width || cy < 0.0 || cy >= height)
      throw std::invalid_argument("Intrinsics: principal point outside image");
  }
};

}  // namespace subsplat::core
