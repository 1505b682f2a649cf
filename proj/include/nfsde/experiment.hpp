#pragma once

#include "nfsde/estimators.hpp"
#include "nfsde/model.hpp"
#include "nfsde/report.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nfsde {

/// Malformed or invalid experiment configuration (CLI exit status 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kVersion = "1.0.0";

/// 64-bit FNV-1a of `text` as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view text);

struct TaskConfig {
  std::string name;
  std::string id;  // unique label; defaults to "<index>_<name>"
  Json params;
};

struct ExperimentConfig {
  Json raw;          // the parsed document
  std::string hash;  // fnv1a_hex of raw.dump()
  Json model;
  double h = 0.0;
  double horizon = 0.0;
  std::uint64_t seed = 0;
  std::int64_t trials = 1;
  unsigned workers = 0;
  DecisionRules rules;
  std::vector<TaskConfig> tasks;
  std::filesystem::path output = "nfsde-out";
  bool write_csv = true;
};

/// Parses and schema-checks a JSON config; throws ConfigError.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Builds the model from {"name", "parameters"} or {"linear": {...}}; throws ConfigError.
ModelSpec build_model(const Json& model);

struct ParameterInfo {
  std::string name;
  std::string description;
  bool required = true;
};

struct TaskInfo {
  std::string name;
  std::string summary;
  bool judged = true;  // has pass/fail semantics
  std::vector<ParameterInfo> parameters;
};

/// Task registry in stable (alphabetical) order.
const std::vector<TaskInfo>& task_registry();
const TaskInfo* find_task(std::string_view name);

struct RunOverrides {
  std::optional<std::filesystem::path> output;
  std::optional<unsigned> workers;
  std::optional<std::uint64_t> seed;
};

struct TaskOutcome {
  std::string id;
  std::string name;
  std::optional<bool> pass;
  std::filesystem::path report;
};

struct RunResult {
  int exit_code = 0;  // 0 all judged tasks pass, 1 some task failed
  std::vector<TaskOutcome> tasks;
  std::filesystem::path manifest;
};

/// Validates every task, then runs check_conditions and the tasks in order,
/// writing one JSON report per task plus manifest.json. Throws ConfigError on
/// validation failures; other exceptions are runtime faults.
RunResult run_experiment(const ExperimentConfig& config, const RunOverrides& overrides = {});

}  // namespace nfsde
