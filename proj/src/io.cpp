#include "nfsde/io.hpp"

#include <fstream>
#include <iomanip>
#include <stdexcept>

namespace nfsde {
namespace {

std::ofstream open_for_writing(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << std::setprecision(17);
  return out;
}

}  // namespace

void write_json(const std::filesystem::path& path, const Json& json) {
  std::ofstream out = open_for_writing(path);
  out << json.dump(2) << '\n';
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
  std::ofstream out = open_for_writing(path);
  out << "time";
  for (Index i = 0; i < traj.dim(); ++i) out << ",x_" << (i + 1);
  out << '\n';
  for (Index k = -traj.delay_intervals(); k <= traj.steps(); ++k) {
    out << traj.time(k);
    const auto x = traj.state(k);
    for (Index i = 0; i < traj.dim(); ++i) out << ',' << x(i);
    out << '\n';
  }
}

Json trajectory_sidecar(const Trajectory& traj, const ModelSpec& spec, const NoisePath& noise) {
  return {{"seed", noise.seed},
          {"stream_id", noise.stream},
          {"h", traj.step()},
          {"kappa", spec.kappa()},
          {"r0", spec.delay()},
          {"model", spec.name()},
          {"n", traj.dim()},
          {"m", traj.delay_intervals()},
          {"steps", traj.steps()}};
}

void write_coupling_csv(const std::filesystem::path& path, const CouplingTrace& trace) {
  std::ofstream out = open_for_writing(path);
  out << "time,x,y,gap,envelope,g\n";
  for (Index k = 0; k <= trace.x.steps(); ++k) {
    const auto x = trace.x.state(k);
    const auto y = trace.y.state(k);
    const auto idx = static_cast<std::size_t>(k);
    out << trace.x.time(k) << ',' << x(0) << ',' << y(0) << ',' << (x - y).norm() << ','
        << trace.envelope[idx] << ',' << trace.g_values[idx] << '\n';
  }
}

void write_columns_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                       const std::vector<std::vector<double>>& columns) {
  if (header.size() != columns.size()) throw std::invalid_argument("header/column count mismatch");
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (const auto& c : columns) {
    if (c.size() != rows) throw std::invalid_argument("columns must have equal length");
  }
  std::ofstream out = open_for_writing(path);
  for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
  out << '\n';
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < columns.size(); ++j) out << (j ? "," : "") << columns[j][i];
    out << '\n';
  }
}

}  // namespace nfsde
