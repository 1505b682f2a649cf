#include "nfsde/experiment.hpp"

#include "nfsde/io.hpp"
#include "nfsde/noise.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace nfsde {

std::string fnv1a_hex(std::string_view text) {
  std::uint64_t hash = 14695981039346656037ull;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  std::ostringstream out;
  out << std::hex;
  out.width(16);
  out.fill('0');
  out << hash;
  return out.str();
}

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

const Json& require(const Json& obj, const std::string& key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) fail(where, "missing required key '" + key + "'");
  return obj.at(key);
}

double as_number(const Json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(where, "expected a finite number");
  return d;
}

std::int64_t as_count(const Json& v, const std::string& where) {
  if (!v.is_number_integer() && !v.is_number_unsigned()) fail(where, "expected an integer");
  const auto n = v.get<std::int64_t>();
  if (n < 1) fail(where, "expected an integer >= 1");
  return n;
}

std::vector<double> as_numbers(const Json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) fail(where, "expected a non-empty array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(as_number(v[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

void check_keys(const Json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) fail(where, "expected an object");
  for (const auto& item : obj.items()) {
    if (!allowed.contains(item.key())) fail(where, "unknown key '" + item.key() + "'");
  }
}

Matrix as_matrix(const Json& v, Index n, const std::string& where) {
  if (v.is_number()) {
    if (n != 1) fail(where, "a scalar is only allowed for dim 1");
    return Matrix::Constant(1, 1, as_number(v, where));
  }
  if (!v.is_array() || static_cast<Index>(v.size()) != n) fail(where, "expected a dim x dim array");
  Matrix m(n, n);
  for (Index i = 0; i < n; ++i) {
    const Json& row = v[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != n) fail(where, "rows must have dim entries");
    for (Index j = 0; j < n; ++j) m(i, j) = as_number(row[static_cast<std::size_t>(j)], where);
  }
  return m;
}

}  // namespace

ModelSpec build_model(const Json& model) {
  const std::string where = "model";
  try {
    if (model.is_object() && model.contains("linear")) {
      check_keys(model, {"linear"}, where);
      const Json& lin = model.at("linear");
      check_keys(lin, {"name", "dim", "kappa", "r0", "drift", "delayed", "present", "sigma", "constants"},
                 "model.linear");
      const Index n = static_cast<Index>(as_count(require(lin, "dim", where), "model.linear.dim"));
      const Json& c = require(lin, "constants", where);
      check_keys(c, {"L1", "L2", "lambda1", "lambda2", "kappa1"}, "model.linear.constants");
      HypothesisConstants constants;
      constants.lipschitz_z = as_number(require(c, "L1", where), "constants.L1");
      constants.lipschitz_b = as_number(require(c, "L2", where), "constants.L2");
      constants.lambda1 = as_number(require(c, "lambda1", where), "constants.lambda1");
      constants.lambda2 = as_number(require(c, "lambda2", where), "constants.lambda2");
      constants.kappa1 = as_number(require(c, "kappa1", where), "constants.kappa1");
      const Matrix zero = Matrix::Zero(n, n);
      auto optional_matrix = [&](const char* key) {
        return lin.contains(key) ? as_matrix(lin.at(key), n, std::string("model.linear.") + key) : zero;
      };
      const std::string name = lin.contains("name") ? lin.at("name").get<std::string>() : "linear";
      return linear_model(name, as_number(require(lin, "kappa", where), "model.linear.kappa"),
                          as_number(require(lin, "r0", where), "model.linear.r0"),
                          as_matrix(require(lin, "drift", where), n, "model.linear.drift"),
                          optional_matrix("delayed"), optional_matrix("present"),
                          as_matrix(require(lin, "sigma", where), n, "model.linear.sigma"),
                          constants);
    }
    check_keys(model, {"name", "parameters"}, where);
    const Json& name = require(model, "name", where);
    if (!name.is_string()) fail(where, "name must be a string");
    ModelParameters params;
    if (model.contains("parameters")) {
      const Json& p = model.at("parameters");
      if (!p.is_object()) fail("model.parameters", "expected an object");
      for (const auto& item : p.items()) {
        params[item.key()] = as_number(item.value(), "model.parameters." + item.key());
      }
    }
    return builtin_model(name.get<std::string>(), params);
  } catch (const ConfigError&) {
    throw;
  } catch (const Json::exception& e) {
    fail(where, e.what());
  } catch (const std::invalid_argument& e) {
    fail(where, e.what());
  }
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig config;
  try {
    config.raw = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("parse error: ") + e.what());
  }
  const Json& raw = config.raw;
  config.hash = fnv1a_hex(raw.dump());
  check_keys(raw, {"model", "grid", "seeds", "tasks", "output", "rules", "workers"}, "config");

  config.model = require(raw, "model", "config");
  const Json& grid = require(raw, "grid", "config");
  check_keys(grid, {"h", "horizon"}, "grid");
  config.h = as_number(require(grid, "h", "grid"), "grid.h");
  if (!(config.h > 0.0)) fail("grid.h", "must be positive");
  config.horizon = grid.contains("horizon") ? as_number(grid.at("horizon"), "grid.horizon") : 1.0;
  if (!(config.horizon > 0.0)) fail("grid.horizon", "must be positive");
  try {
    steps_for(config.horizon, config.h);
  } catch (const GridError& e) {
    fail("grid.horizon", e.what());
  }

  const Json& seeds = require(raw, "seeds", "config");
  check_keys(seeds, {"master", "trials"}, "seeds");
  const Json& master = require(seeds, "master", "seeds");
  if (!master.is_number_unsigned() && !(master.is_number_integer() && master.get<std::int64_t>() >= 0)) {
    fail("seeds.master", "expected a nonnegative integer");
  }
  config.seed = master.get<std::uint64_t>();
  if (seeds.contains("trials")) config.trials = as_count(seeds.at("trials"), "seeds.trials");

  if (raw.contains("workers")) {
    const Json& w = raw.at("workers");
    if (!w.is_number_unsigned() && !(w.is_number_integer() && w.get<std::int64_t>() >= 0)) {
      fail("workers", "expected a nonnegative integer");
    }
    config.workers = w.get<unsigned>();
  }

  if (raw.contains("rules")) {
    const Json& r = raw.at("rules");
    check_keys(r, {"se_multiplier", "contraction_tolerance", "tv_tolerance", "wasserstein_tolerance",
                   "l2_tolerance", "moment_slope_limit", "heavy_tail_fraction", "heavy_tail_share",
                   "density_log_cap"},
               "rules");
    auto set = [&](const char* key, double& field) {
      if (r.contains(key)) field = as_number(r.at(key), std::string("rules.") + key);
    };
    set("se_multiplier", config.rules.se_multiplier);
    set("contraction_tolerance", config.rules.contraction_tolerance);
    set("tv_tolerance", config.rules.tv_tolerance);
    set("wasserstein_tolerance", config.rules.wasserstein_tolerance);
    set("l2_tolerance", config.rules.l2_tolerance);
    set("moment_slope_limit", config.rules.moment_slope_limit);
    set("heavy_tail_fraction", config.rules.heavy_tail_fraction);
    set("heavy_tail_share", config.rules.heavy_tail_share);
    set("density_log_cap", config.rules.density_log_cap);
  }

  if (raw.contains("output")) {
    const Json& out = raw.at("output");
    check_keys(out, {"directory", "formats"}, "output");
    if (out.contains("directory")) {
      if (!out.at("directory").is_string()) fail("output.directory", "expected a string");
      config.output = out.at("directory").get<std::string>();
    }
    if (out.contains("formats")) {
      const Json& formats = out.at("formats");
      if (!formats.is_array()) fail("output.formats", "expected an array");
      config.write_csv = false;
      for (const auto& f : formats) {
        if (f == "csv") {
          config.write_csv = true;
        } else if (f != "json") {
          fail("output.formats", "unknown format " + f.dump() + " (json, csv)");
        }
      }
    }
  }

  const Json& tasks = require(raw, "tasks", "config");
  if (!tasks.is_array() || tasks.empty()) fail("tasks", "expected a non-empty array");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const std::string where = "tasks[" + std::to_string(i) + "]";
    const Json& t = tasks[i];
    check_keys(t, {"name", "id", "params"}, where);
    const Json& name = require(t, "name", where);
    if (!name.is_string()) fail(where, "name must be a string");
    TaskConfig task;
    task.name = name.get<std::string>();
    if (!find_task(task.name)) fail(where, "unknown task '" + task.name + "'");
    char prefix[8];
    std::snprintf(prefix, sizeof prefix, "%02zu_", i);
    task.id = t.contains("id") ? t.at("id").get<std::string>() : prefix + task.name;
    if (task.id.empty() || task.id.find_first_of("/\\") != std::string::npos) {
      fail(where, "id must be a non-empty file-name-safe string");
    }
    if (!ids.insert(task.id).second) fail(where, "duplicate task id '" + task.id + "'");
    task.params = t.contains("params") ? t.at("params") : Json::object();
    if (!task.params.is_object()) fail(where + ".params", "expected an object");
    config.tasks.push_back(std::move(task));
  }
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

namespace {

struct Context {
  const ExperimentConfig& config;
  const ModelSpec& spec;
  const ConditionReport& conditions;
  MonteCarloOptions mc;
  std::filesystem::path directory;
  std::string id;
  bool dry_run = true;
};

struct Outcome {
  Json result;
  std::optional<bool> pass;
};

using Runner = std::function<Outcome(const Json&, Context&)>;

// Parameter access for one task's params object.
class Params {
 public:
  Params(const Json& params, const Context& ctx) : p_(params), ctx_(ctx) {}

  bool has(const std::string& key) const { return p_.contains(key); }
  const Json& at(const std::string& key) const { return require(p_, key, where(key)); }
  std::string where(const std::string& key) const { return ctx_.id + "." + key; }

  double number(const std::string& key) const { return as_number(at(key), where(key)); }
  double number(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }
  std::int64_t count(const std::string& key) const { return as_count(at(key), where(key)); }
  std::int64_t trials() const { return has("trials") ? count("trials") : ctx_.config.trials; }
  std::uint64_t trial_index() const {
    if (!has("trial")) return 0;
    const Json& v = at("trial");
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) fail(where("trial"), "expected an integer >= 0");
    return v.get<std::uint64_t>();
  }

  /// A time that must sit on the grid.
  double time(const std::string& key) const { return on_grid(number(key), key); }
  double time(const std::string& key, double fallback) const {
    return has(key) ? time(key) : fallback;
  }
  std::vector<double> times(const std::string& key) const {
    std::vector<double> out = as_numbers(at(key), where(key));
    for (double t : out) on_grid(t, key);
    return out;
  }

  Segment segment(const std::string& key) const {
    const Json& v = at(key);
    const std::string w = where(key);
    const double h = ctx_.config.h;
    const Index n = ctx_.spec.dim();
    const Index m = ctx_.spec.delay_intervals(h);
    if (v.is_number()) return Segment::constant(Vector::Constant(n, as_number(v, w)), m, h);
    check_keys(v, {"constant", "nodes"}, w);
    if (v.contains("constant")) {
      const Json& c = v.at("constant");
      if (c.is_number()) return Segment::constant(Vector::Constant(n, as_number(c, w)), m, h);
      const std::vector<double> values = as_numbers(c, w);
      if (static_cast<Index>(values.size()) != n) fail(w, "constant vector must have dim entries");
      return Segment::constant(Eigen::Map<const Vector>(values.data(), n), m, h);
    }
    const Json& nodes = require(v, "nodes", w);
    if (!nodes.is_array() || static_cast<Index>(nodes.size()) != m + 1) {
      fail(w, "nodes must list m + 1 = " + std::to_string(m + 1) + " grid values");
    }
    Matrix values(n, m + 1);
    for (Index j = 0; j <= m; ++j) {
      const Json& node = nodes[static_cast<std::size_t>(j)];
      if (node.is_number()) {
        if (n != 1) fail(w, "vector nodes required for dim > 1");
        values(0, j) = as_number(node, w);
      } else {
        const std::vector<double> x = as_numbers(node, w);
        if (static_cast<Index>(x.size()) != n) fail(w, "each node must have dim entries");
        for (Index i = 0; i < n; ++i) values(i, j) = x[static_cast<std::size_t>(i)];
      }
    }
    return Segment(values, h);
  }

  NamedObservable observable(const Json& v, const std::string& w) const {
    try {
      if (v.is_string()) return {v.get<std::string>(), observables::by_name(v.get<std::string>())};
      check_keys(v, {"name", "params"}, w);
      const Json& name = require(v, "name", w);
      if (!name.is_string()) fail(w, "observable name must be a string");
      std::map<std::string, double> params;
      if (v.contains("params")) {
        for (const auto& item : v.at("params").items()) {
          params[item.key()] = as_number(item.value(), w + "." + item.key());
        }
      }
      return {name.get<std::string>(), observables::by_name(name.get<std::string>(), params)};
    } catch (const std::invalid_argument& e) {
      fail(w, e.what());
    }
  }
  NamedObservable observable(const std::string& key) const { return observable(at(key), where(key)); }
  std::vector<NamedObservable> observable_list(const std::string& key) const {
    const Json& v = at(key);
    if (!v.is_array() || v.empty()) fail(where(key), "expected a non-empty array of observables");
    std::vector<NamedObservable> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.push_back(observable(v[i], where(key) + "[" + std::to_string(i) + "]"));
    }
    return out;
  }

  InvariantSampling sampling() const {
    InvariantSampling s;
    s.warmup = time("warmup");
    s.outer = count("outer");
    s.inner = count("inner");
    if (has("start")) s.start = segment("start");
    return s;
  }

 private:
  double on_grid(double t, const std::string& key) const {
    if (!(t >= 0.0)) fail(where(key), "times must be >= 0");
    try {
      steps_for(t, ctx_.config.h);
    } catch (const GridError& e) {
      fail(where(key), e.what());
    }
    return t;
  }

  const Json& p_;
  const Context& ctx_;
};

void require_positive(double v, const Params& p, const std::string& key) {
  if (!(v > 0.0)) fail(p.where(key), "must be positive");
}

std::filesystem::path csv_path(const Context& ctx, const std::string& suffix) {
  return ctx.directory / (ctx.id + suffix + ".csv");
}

Outcome run_check_conditions(const Json&, Context& ctx) {
  if (ctx.dry_run) return {};
  return {to_json(ctx.conditions), ctx.conditions.feasible};
}

Outcome run_verify(const Json& json, Context& ctx, bool h2) {
  Params p(json, ctx);
  const std::int64_t samples = p.count("samples");
  const double radius = p.number("radius");
  require_positive(radius, p, "radius");
  if (ctx.dry_run) return {};
  const VerifierReport r = h2 ? verify_h2(ctx.spec, samples, radius, ctx.mc.seed)
                              : verify_dissipativity(ctx.spec, samples, radius, ctx.mc.seed);
  return {to_json(r), r.violations == 0};
}

Outcome run_simulate(const Json& json, Context& ctx) {
  Params p(json, ctx);
  const Segment xi = p.segment("xi");
  const double horizon = p.time("horizon", ctx.config.horizon);
  require_positive(horizon, p, "horizon");
  const std::uint64_t trial = p.trial_index();
  if (ctx.dry_run) return {};
  const double h = ctx.config.h;
  const NoisePath noise = generate_noise(ctx.mc.seed, stream_id(ctx.mc.task, trial),
                                         steps_for(horizon, h), h, ctx.spec.dim());
  IntegrateOptions options;
  options.record_gamma = true;
  const Trajectory traj = integrate(ctx.spec, xi, horizon, noise, options);
  Json result = trajectory_sidecar(traj, ctx.spec, noise);
  result["final_state"] = std::vector<double>(traj.state(traj.steps()).begin(),
                                              traj.state(traj.steps()).end());
  result["gamma_defect"] = gamma_consistency(traj, ctx.spec, noise);
  if (ctx.config.write_csv) {
    write_trajectory_csv(csv_path(ctx, ".trajectory"), traj);
    write_json(ctx.directory / (ctx.id + ".trajectory.json"), trajectory_sidecar(traj, ctx.spec, noise));
  }
  return {result, std::nullopt};
}

Outcome run_coupling_task(const Json& json, Context& ctx) {
  Params p(json, ctx);
  const Segment xi = p.segment("xi");
  const Segment eta = p.segment("eta");
  const double t = p.time("t");
  require_positive(t, p, "t");
  const std::uint64_t trial = p.trial_index();
  CouplingOptions options;
  if (p.has("tol")) {
    options.tol = p.number("tol");
    require_positive(*options.tol, p, "tol");
  }
  if (ctx.dry_run) return {};
  const double h = ctx.config.h;
  const Index K = steps_for(t, h) + ctx.spec.delay_intervals(h);
  const NoisePath noise = generate_noise(ctx.mc.seed, stream_id(ctx.mc.task, trial), K, h, ctx.spec.dim());
  options.with_density = ctx.spec.sigma_invertible();
  const CouplingTrace trace = run_coupling(ctx.spec, xi, eta, t, noise, options);
  if (ctx.config.write_csv) write_coupling_csv(csv_path(ctx, ".coupling"), trace);
  const bool ok = trace.coupled() && trace.tau <= t + h * (1.0 + 1e-9) && pinned_after_tau(trace);
  return {coupling_summary(trace), ok};
}

Outcome run_contraction(const Json& json, Context& ctx) {
  Params p(json, ctx);
  const Segment xi = p.segment("xi");
  const Segment eta = p.segment("eta");
  const double horizon = p.time("horizon", ctx.config.horizon);
  require_positive(horizon, p, "horizon");
  const std::uint64_t trial = p.trial_index();
  if (ctx.dry_run) return {};
  const double h = ctx.config.h;
  const NoisePath noise = generate_noise(ctx.mc.seed, stream_id(ctx.mc.task, trial),
                                         steps_for(horizon, h), h, ctx.spec.dim());
  const ContractionResult r = contraction_curve(ctx.spec, xi, eta, horizon, noise, ctx.mc.rules);
  if (ctx.config.write_csv) {
    write_columns_csv(csv_path(ctx, ".curve"), {"time", "squared_gap"}, {r.times, r.squared_gap});
  }
  return {to_json(r), r.pass};
}

Outcome run_exp_moment(const Json& json, Context& ctx) {
  Params p(json, ctx);
  const Segment xi = p.segment("xi");
  const double epsilon = p.number("epsilon");
  if (!(epsilon >= 0.0)) fail(p.where("epsilon"), "must be >= 0");
  const std::vector<double> times = p.times("times");
  const std::int64_t trials = p.trials();
  if (ctx.dry_run) return {};
  const ExpMomentSeries r = exp_moment_series(ctx.spec, xi, epsilon, times, trials, ctx.mc);
  return {to_json(r), r.pass};
}

Outcome run_harnack(const Json& json, Context& ctx, bool two_stage) {
  Params p(json, ctx);
  const NamedObservable f = p.observable("f");
  const Segment xi = p.segment("xi");
  const Segment eta = p.segment("eta");
  const double t_total = p.time("t_total");
  if (!(t_total > ctx.spec.delay())) fail(p.where("t_total"), "must exceed r0");
  const double c = two_stage ? 0.0 : p.number("c");
  const std::int64_t trials = p.trials();
  if (ctx.dry_run) return {};
  if (two_stage) {
    const HarnackTwoStage r = harnack_two_stage(ctx.spec, f.fn, xi, eta, t_total, trials, ctx.mc);
    return {to_json(r), r.verification.pass};
  }
  const HarnackReport r = harnack_check(ctx.spec, f.fn, xi, eta, t_total, c, trials, ctx.mc);
  return {to_json(r), r.pass};
}

Outcome run_law_check(const Json& json, Context& ctx) {
  Params p(json, ctx);
  const Segment xi = p.segment("xi");
  const Segment eta = p.segment("eta");
  const double t = p.time("t");
  require_positive(t, p, "t");
  const auto observables = p.observable_list("observables");
  const std::int64_t trials = p.trials();
  if (ctx.dry_run) return {};
  const LawCheckReport r = reweighted_law_check(ctx.spec, xi, eta, t, observables, trials, ctx.mc);
  return {to_json(r), r.pass};
}

Outcome run_tv(const Json& json, Context& ctx) {
  Params p(json, ctx);
  const Segment xi = p.segment("xi");
  const Segment eta = p.segment("eta");
  const std::vector<double> grid = p.times("t_grid");
  const std::int64_t trials = p.trials();
  TvOptions tv;
  if (p.has("window")) {
    tv.coupling_window = p.time("window");
    require_positive(*tv.coupling_window, p, "window");
  }
  tv.burn_in = p.number("burn_in", 0.0);
  if (ctx.dry_run) return {};
  const TvDecayReport r = tv_decay(ctx.spec, xi, eta, grid, trials, ctx.mc, tv);
  if (ctx.config.write_csv) {
    std::vector<double> est, se;
    for (const auto& b : r.bounds) {
      est.push_back(b.point_estimate);
      se.push_back(b.std_error);
    }
    write_columns_csv(csv_path(ctx, ".curve"), {"t", "total_time", "bound", "std_error"},
                      {r.times, r.total_times, est, se});
  }
  return {to_json(r), r.pass};
}

Outcome run_wasserstein(const Json& json, Context& ctx) {
  Params p(json, ctx);
  const Segment xi = p.segment("xi");
  const std::vector<double> t1 = p.times("t1_values");
  for (double t : t1) require_positive(t, p, "t1_values");
  const double offset = p.time("offset");
  const std::int64_t trials = p.trials();
  if (ctx.dry_run) return {};
  const WassersteinSeries r = wasserstein_cauchy_series(ctx.spec, xi, t1, offset, trials, ctx.mc);
  if (ctx.config.write_csv) {
    std::vector<double> est, se;
    for (const auto& b : r.reports) {
      est.push_back(b.point_estimate);
      se.push_back(b.std_error);
    }
    write_columns_csv(csv_path(ctx, ".curve"), {"t1", "bound", "std_error"}, {r.t1_values, est, se});
  }
  return {to_json(r), r.pass};
}

Outcome run_l2(const Json& json, Context& ctx) {
  Params p(json, ctx);
  const NamedObservable f = p.observable("f");
  const std::vector<double> grid = p.times("t_grid");
  const InvariantSampling sampling = p.sampling();
  if (sampling.outer < 2) fail(p.where("outer"), "must be >= 2");
  if (ctx.dry_run) return {};
  const L2DecayReport r = l2_decay(ctx.spec, f.fn, grid, sampling, ctx.config.h, ctx.mc);
  if (ctx.config.write_csv) {
    std::vector<double> est, se;
    for (const auto& v : r.variances) {
      est.push_back(v.point_estimate);
      se.push_back(v.std_error);
    }
    write_columns_csv(csv_path(ctx, ".curve"), {"t", "variance", "std_error"}, {r.times, est, se});
  }
  return {to_json(r), r.pass};
}

Outcome run_hyper(const Json& json, Context& ctx) {
  Params p(json, ctx);
  const NamedObservable f = p.observable("f");
  const double t = p.time("t");
  const InvariantSampling sampling = p.sampling();
  if (ctx.dry_run) return {};
  const HyperReport r = hyper_check(ctx.spec, f.fn, t, sampling, ctx.config.h, ctx.mc);
  return {to_json(r), r.pass};
}

Outcome run_novikov(const Json& json, Context& ctx) {
  Params p(json, ctx);
  const Segment xi = p.segment("xi");
  const Segment eta = p.segment("eta");
  const double t = p.time("t");
  require_positive(t, p, "t");
  const std::int64_t trials = p.trials();
  if (!ctx.spec.sigma_invertible()) fail(ctx.id, "novikov_diagnostic needs an invertible sigma");
  if (ctx.dry_run) return {};
  const NovikovReport r = novikov_diagnostic(ctx.spec, xi, eta, t, trials, ctx.mc);
  return {to_json(r), !r.divergence_suspected};
}

struct TaskEntry {
  TaskInfo info;
  Runner run;
};

const ParameterInfo kTrials{"trials", "Monte Carlo trials (default: seeds.trials)", false};
const ParameterInfo kXi{"xi", "initial segment for X: number, {constant}, or {nodes}", true};
const ParameterInfo kEta{"eta", "initial segment for Y", true};
const ParameterInfo kF{"f", "observable: registry name or {name, params}", true};
const ParameterInfo kTrial{"trial", "noise stream trial index (default 0)", false};

const std::vector<TaskEntry>& entries() {
  static const std::vector<TaskEntry> registry = {
      {{"check_conditions", "evaluate the rate condition; passes iff feasible", true, {}},
       run_check_conditions},
      {{"contraction_curve",
        "synchronous-noise curve ||X_t(xi) - X_t(eta)||^2 and its fitted log-slope",
        true,
        {kXi, kEta, {"horizon", "curve length (default grid.horizon)", false}, kTrial}},
       run_contraction},
      {{"coupling",
        "one coupling-by-change-of-measure run with CSV export",
        true,
        {kXi, kEta, {"t", "coupling horizon", true}, {"tol", "coupling threshold", false}, kTrial}},
       run_coupling_task},
      {{"exp_moment",
        "E exp(epsilon ||X_t||^2) over a list of times",
        true,
        {kXi, {"epsilon", "exponent weight >= 0", true}, {"times", "grid times", true}, kTrials}},
       run_exp_moment},
      {{"harnack_check",
        "(P_t f(xi))^2 <= P_t f^2(eta) exp(c ||xi - eta||^2) at t_total > r0",
        true,
        {kF, kXi, kEta, {"t_total", "evaluation time, > r0", true}, {"c", "Harnack constant", true},
         kTrials}},
       [](const Json& j, Context& c) { return run_harnack(j, c, false); }},
      {{"harnack_two_stage",
        "measure c*, freeze c* + |c*|/2, re-verify on fresh streams",
        true,
        {kF, kXi, kEta, {"t_total", "evaluation time, > r0", true}, kTrials}},
       [](const Json& j, Context& c) { return run_harnack(j, c, true); }},
      {{"hyper_check",
        "||P_t f||_4 <= ||f||_2 under warmed-up samples",
        true,
        {kF, {"t", "semigroup time", true}, {"warmup", "warm-up time", true},
         {"outer", "warmed-up samples", true}, {"inner", "paths per sample", true},
         {"start", "warm-up start segment (default 0)", false}}},
       run_hyper},
      {{"l2_decay",
        "Var_mu(P_t f) over a t grid with its fitted rate",
        true,
        {kF, {"t_grid", "grid times", true}, {"warmup", "warm-up time", true},
         {"outer", "warmed-up samples (>= 2)", true}, {"inner", "paths per sample", true},
         {"start", "warm-up start segment (default 0)", false}}},
       run_l2},
      {{"novikov_diagnostic",
        "E exp(1/2 int |sigma^{-1} h|^2) with a top-decile dominance flag",
        true,
        {kXi, kEta, {"t", "coupling horizon", true}, kTrials}},
       run_novikov},
      {{"reweighted_law_check",
        "E[R phi(Y_{t+r0})] against E phi(X_{t+r0}(eta)) for each observable",
        true,
        {kXi, kEta, {"t", "coupling horizon", true}, {"observables", "list of observables", true},
         kTrials}},
       run_law_check},
      {{"simulate",
        "one Euler-Maruyama path with trajectory CSV and sidecar",
        false,
        {kXi, {"horizon", "path length (default grid.horizon)", false}, kTrial}},
       run_simulate},
      {{"tv_decay",
        "E|1 - R| total-variation bounds over a t grid",
        true,
        {kXi, kEta, {"t_grid", "synchronous-phase lengths", true},
         {"window", "coupling window (default r0)", false},
         {"burn_in", "fit only t >= burn_in (default 0)", false}, kTrials}},
       run_tv},
      {{"verify_dissipativity",
        "sampled check of <Z(x)-Z(y), x-y> <= -kappa1 |x-y|^2",
        true,
        {{"samples", "number of sampled pairs", true}, {"radius", "ball radius", true}}},
       [](const Json& j, Context& c) { return run_verify(j, c, false); }},
      {{"verify_h2",
        "sampled check of the segment dissipativity inequality (lambda1, lambda2)",
        true,
        {{"samples", "number of sampled pairs", true}, {"radius", "segment bound", true}}},
       [](const Json& j, Context& c) { return run_verify(j, c, true); }},
      {{"wasserstein_cauchy",
        "E[1 ^ ||X_{t2} - Xbar_{t2}||] over t1 with t2 = t1 + offset",
        true,
        {kXi, {"t1_values", "list of t1", true}, {"offset", "t2 - t1", true}, kTrials}},
       run_wasserstein},
  };
  return registry;
}

const TaskEntry& entry(std::string_view name) {
  for (const auto& e : entries()) {
    if (e.info.name == name) return e;
  }
  throw ConfigError("unknown task '" + std::string(name) + "'");
}

void check_param_names(const TaskConfig& task) {
  const TaskInfo& info = entry(task.name).info;
  std::set<std::string> allowed;
  for (const auto& p : info.parameters) allowed.insert(p.name);
  check_keys(task.params, allowed, task.id);
}

}  // namespace

const std::vector<TaskInfo>& task_registry() {
  static const std::vector<TaskInfo> infos = [] {
    std::vector<TaskInfo> out;
    for (const auto& e : entries()) out.push_back(e.info);
    return out;
  }();
  return infos;
}

const TaskInfo* find_task(std::string_view name) {
  for (const auto& info : task_registry()) {
    if (info.name == name) return &info;
  }
  return nullptr;
}

RunResult run_experiment(const ExperimentConfig& config, const RunOverrides& overrides) {
  const auto started = std::chrono::steady_clock::now();
  const ModelSpec spec = build_model(config.model);
  try {
    spec.delay_intervals(config.h);
  } catch (const GridError& e) {
    throw ConfigError(std::string("grid.h must divide r0: ") + e.what());
  }
  const ConditionReport conditions = check_conditions(spec);
  const std::uint64_t seed = overrides.seed.value_or(config.seed);
  const std::filesystem::path directory = overrides.output.value_or(config.output);

  auto context = [&](std::size_t index, const TaskConfig& task, bool dry) {
    Context ctx{config, spec, conditions, {}, directory, task.id, dry};
    ctx.mc.seed = seed;
    // Stream prefix 2 (index + 1); the odd prefix above it is reserved for
    // the second stage of two-stage tasks.
    ctx.mc.task = 2 * (static_cast<std::uint64_t>(index) + 1);
    ctx.mc.workers = overrides.workers.value_or(config.workers);
    ctx.mc.rules = config.rules;
    return ctx;
  };

  for (std::size_t i = 0; i < config.tasks.size(); ++i) {
    const TaskConfig& task = config.tasks[i];
    check_param_names(task);
    Context ctx = context(i, task, true);
    try {
      entry(task.name).run(task.params, ctx);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(task.id + ": " + e.what());
    }
  }

  std::filesystem::create_directories(directory);
  const Json model = describe_model(spec);
  const Json condition_json = to_json(conditions);
  RunResult result;
  Json manifest_tasks = Json::array();
  for (std::size_t i = 0; i < config.tasks.size(); ++i) {
    const TaskConfig& task = config.tasks[i];
    Context ctx = context(i, task, false);
    const TaskEntry& e = entry(task.name);
    const Outcome outcome = e.run(task.params, ctx);
    const std::optional<bool> pass = e.info.judged ? outcome.pass : std::nullopt;
    Json report = {{"task", task.name},
                   {"id", task.id},
                   {"config_hash", config.hash},
                   {"seed", seed},
                   {"stream_prefix", ctx.mc.task},
                   {"version", kVersion},
                   {"model", model},
                   {"condition_report", condition_json},
                   {"params", task.params},
                   {"result", outcome.result},
                   {"pass", pass ? Json(*pass) : Json(nullptr)}};
    const std::filesystem::path path = directory / (task.id + ".json");
    write_json(path, report);
    result.tasks.push_back({task.id, task.name, pass, path});
    if (pass && !*pass) result.exit_code = 1;
    manifest_tasks.push_back({{"id", task.id},
                              {"task", task.name},
                              {"report", path.filename().string()},
                              {"pass", pass ? Json(*pass) : Json(nullptr)}});
  }

  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  const Json manifest = {{"config_hash", config.hash},
                         {"seed", seed},
                         {"version", kVersion},
                         {"eigen_version", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                               std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                               std::to_string(EIGEN_MINOR_VERSION)},
                         {"workers", overrides.workers.value_or(config.workers)},
                         {"condition_report", condition_json},
                         {"tasks", manifest_tasks},
                         {"exit_code", result.exit_code},
                         {"wall_clock_seconds", seconds}};
  result.manifest = directory / "manifest.json";
  write_json(result.manifest, manifest);
  return result;
}

}  // namespace nfsde
