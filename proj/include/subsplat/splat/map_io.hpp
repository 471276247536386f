#pragma once

#include <string>

#include "subsplat/splat/types.hpp"

namespace subsplat::splat {

/// ASCII PLY with per-splat properties (position, color, scale, quaternion,
/// opacity, origin submap), ordered by splat id.
void write_splat_map(const std::string& path, const SplatMap& map);

SplatMap read_splat_map(const std::string& path);

}  // namespace subsplat::splat
