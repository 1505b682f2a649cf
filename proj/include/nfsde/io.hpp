#pragma once

#include "nfsde/coupling.hpp"
#include "nfsde/report.hpp"
#include "nfsde/simulate.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace nfsde {

/// Writes `json` with two-space indentation and a trailing newline.
void write_json(const std::filesystem::path& path, const Json& json);

/// CSV with header `time,x_1,..,x_n`, one row per grid node from -r0 on.
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);

/// Sidecar for a trajectory CSV: seed, stream_id, h, kappa, r0, model, n, m, steps.
Json trajectory_sidecar(const Trajectory& traj, const ModelSpec& spec, const NoisePath& noise);

/// CSV with header `time,x,y,gap,envelope,g` over k = 0..K; x and y are the
/// first coordinates, gap the Euclidean |X - Y|.
void write_coupling_csv(const std::filesystem::path& path, const CouplingTrace& trace);

/// Generic column CSV; all columns must have equal length.
void write_columns_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                       const std::vector<std::vector<double>>& columns);

}  // namespace nfsde
