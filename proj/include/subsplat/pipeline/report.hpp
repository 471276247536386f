#pragma once

#include <string>

#include "subsplat/pipeline/slam.hpp"

namespace subsplat::pipeline {

/// JSON form of the run report. Deterministic: key order fixed, wall times
/// excluded (they go to timings.txt).
std::string report_to_json(const RunReport& report, const PipelineConfig& config);

/// Writes trajectory_est.txt, trajectory_gt.txt (TUM convention), map.ply,
/// points_dense.ply, report.json, loops.log, config.txt, and timings.txt.
void export_artifacts(const SlamResult& result, const std::string& out_dir);

}  // namespace subsplat::pipeline
