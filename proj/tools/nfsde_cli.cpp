#include "nfsde/experiment.hpp"
#include "nfsde/model.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

constexpr int kExitTaskFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

int list_models() {
  for (const auto& info : nfsde::builtin_models()) {
    std::cout << info.name << "\n  " << info.summary << "\n  defaults:";
    for (const auto& [key, value] : info.defaults) std::cout << ' ' << key << '=' << value;
    std::cout << '\n';
  }
  std::cout << "\ntasks:\n";
  for (const auto& task : nfsde::task_registry()) {
    std::cout << "  " << task.name << '\n';
  }
  return 0;
}

int describe(const std::string& name) {
  const nfsde::TaskInfo* info = nfsde::find_task(name);
  if (!info) {
    std::cerr << "nfsde: unknown task '" << name << "'\n";
    return kExitConfig;
  }
  std::cout << info->name << ": " << info->summary << '\n';
  std::cout << "pass/fail: " << (info->judged ? "yes" : "no") << '\n';
  std::cout << "parameters:\n";
  if (info->parameters.empty()) std::cout << "  (none)\n";
  for (const auto& p : info->parameters) {
    std::cout << "  " << p.name << (p.required ? " (required)" : " (optional)") << "  "
              << p.description << '\n';
  }
  return 0;
}

int run(const std::string& config_path, const nfsde::RunOverrides& overrides) {
  const nfsde::ExperimentConfig config = nfsde::load_config(config_path);
  const nfsde::RunResult result = nfsde::run_experiment(config, overrides);
  for (const auto& task : result.tasks) {
    const char* status = !task.pass ? "n/a " : (*task.pass ? "PASS" : "FAIL");
    std::cout << status << "  " << task.id << "  -> " << task.report.string() << '\n';
  }
  std::cout << "manifest: " << result.manifest.string() << '\n';
  return result.exit_code == 0 ? 0 : kExitTaskFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation and Monte Carlo verification for neutral functional SDEs"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output;
  unsigned workers = 0;
  std::uint64_t seed = 0;
  CLI::App* run_cmd = app.add_subcommand("run", "run an experiment config");
  run_cmd->add_option("-c,--config", config_path, "JSON experiment config")->required();
  auto* output_opt = run_cmd->add_option("-o,--output", output, "output directory override");
  auto* workers_opt = run_cmd->add_option("-w,--workers", workers, "worker threads (0: all cores)");
  auto* seed_opt = run_cmd->add_option("-s,--seed", seed, "master seed override");

  CLI::App* list_cmd = app.add_subcommand("list", "list built-in models and tasks");

  std::string task_name;
  CLI::App* describe_cmd = app.add_subcommand("describe", "describe a task and its parameters");
  describe_cmd->add_option("task", task_name, "task name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*list_cmd) return list_models();
    if (*describe_cmd) return describe(task_name);
    nfsde::RunOverrides overrides;
    if (*output_opt) overrides.output = output;
    if (*workers_opt) overrides.workers = workers;
    if (*seed_opt) overrides.seed = seed;
    (void)run_cmd;
    return run(config_path, overrides);
  } catch (const nfsde::ConfigError& e) {
    std::cerr << "nfsde: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "nfsde: runtime fault: " << e.what() << '\n';
    return kExitRuntime;
  }
}
