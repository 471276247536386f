#pragma once

#include <string>

#include "subsplat/core/image.hpp"

namespace subsplat::sim {

/// 8-bit RGB PNG; values clamped from [0,1].
void write_png_rgb(const std::string& path, const core::ColorImage& image);
core::ColorImage read_png_rgb(const std::string& path);

/// 16-bit grayscale PNG holding raw depth counts (0 = no data).
void write_png_depth16(const std::string& path, const core::Image<uint16_t>& image);
core::Image<uint16_t> read_png_depth16(const std::string& path);

}  // namespace subsplat::sim
