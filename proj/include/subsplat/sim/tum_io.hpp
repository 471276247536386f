#pragma once

#include <string>
#include <vector>

#include "subsplat/core/intrinsics.hpp"
#include "subsplat/sim/render.hpp"

namespace subsplat::sim {

// TUM RGB-D depth PNGs store 5000 counts per meter.
inline constexpr double kTumDepthScale = 1.0 / 5000.0;

struct TumSequence {
  std::vector<Frame> frames;            // color + depth + associated ground-truth pose
  std::vector<core::Pose> gt_poses;     // one per kept frame
  core::Intrinsics intrinsics;
  int skipped = 0;                      // frames dropped for missing associations
};

/// Loads a TUM RGB-D layout (rgb.txt, depth.txt, groundtruth.txt; rgb/ and
/// depth/ image folders). Associates rgb/depth/groundtruth by nearest
/// timestamp within 0.02 s; unmatched frames are skipped with a warning count.
TumSequence load_tum_sequence(const std::string& directory, const core::Intrinsics& intr);

/// Writes frames in the same layout (16-bit depth PNG at 5000 counts/m),
/// so that load_tum_sequence(export_tum_sequence(...)) round-trips.
void export_tum_sequence(const std::string& directory, const std::vector<Frame>& frames);

}  // namespace subsplat::sim
