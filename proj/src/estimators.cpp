#include "nfsde/estimators.hpp"

#include "nfsde/noise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nfsde {
namespace {

constexpr double kTimeSlack = 1e-9;

void require_trials(std::int64_t trials) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
}

std::size_t count_of(std::int64_t trials) { return static_cast<std::size_t>(trials); }

double sup_squared(SegmentView seg) {
  const double u = uniform_norm(seg);
  return u * u;
}

// Difference trajectory of two synchronously driven paths.
Trajectory paired_difference(const ModelSpec& spec, const Segment& xi, const Segment& eta,
                             double horizon, const NoisePath& noise) {
  if (spec.linear()) {
    if (noise.h != xi.step()) throw GridError("noise step differs from the segment grid step");
    return synchronous_difference(spec, xi, eta, horizon);
  }
  const Trajectory a = integrate(spec, xi, horizon, noise);
  const Trajectory b = integrate(spec, eta, horizon, noise);
  return Trajectory(a.states() - b.states(), a.delay_intervals(), a.step());
}

struct LogFit {
  std::optional<LineFit> fit;
  std::size_t points = 0;
};

// Least squares of log y against x over points with x >= from and y > 0.
LogFit fit_log(const std::vector<double>& x, const std::vector<double>& y, double from) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] >= from - kTimeSlack && y[i] > 0.0 && std::isfinite(y[i])) {
      xs.push_back(x[i]);
      ys.push_back(std::log(y[i]));
    }
  }
  return {fit_line(xs, ys), xs.size()};
}

EstimateReport summarize(const std::vector<double>& samples) {
  const SampleMoments m = moments(samples);
  EstimateReport r;
  r.point_estimate = m.mean;
  r.std_error = m.std_error;
  r.trials = static_cast<std::int64_t>(m.count);
  return r;
}

Segment zero_segment(const ModelSpec& spec, double h) {
  return Segment::constant(Vector::Zero(spec.dim()), spec.delay_intervals(h), h);
}

std::vector<double> validated_times(std::vector<double> times) {
  for (double t : times) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("times must be finite and >= 0");
  }
  return times;
}

double max_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
}

}  // namespace

std::optional<double> certified_rate(const ModelSpec& spec) {
  const ConditionReport report = check_conditions(spec);
  if (!report.feasible) return std::nullopt;
  return report.lambda;
}

ContractionResult contraction_curve(const ModelSpec& spec, const Segment& xi, const Segment& eta,
                                    double horizon, const NoisePath& noise,
                                    const DecisionRules& rules) {
  const Trajectory diff = paired_difference(spec, xi, eta, horizon, noise);
  ContractionResult result;
  result.lambda_cert = certified_rate(spec);
  for (Index k = 0; k <= diff.steps(); ++k) {
    result.times.push_back(diff.time(k));
    result.squared_gap.push_back(sup_squared(diff.segment(k)));
  }
  const LogFit lf = fit_log(result.times, result.squared_gap, spec.delay());
  result.fit = lf.fit;
  if (result.lambda_cert) {
    const bool all_zero = std::all_of(result.squared_gap.begin(), result.squared_gap.end(),
                                      [](double v) { return v == 0.0; });
    if (all_zero) {
      result.pass = true;
    } else {
      result.pass = result.fit.has_value() &&
                    result.fit->slope <= -(1.0 - rules.contraction_tolerance) * *result.lambda_cert;
    }
  }
  return result;
}

namespace {

// exp(eps ||X_t||^2) along one path per trial, evaluated at each time.
std::vector<std::vector<double>> moment_samples(const ModelSpec& spec, const Segment& xi,
                                                double epsilon, const std::vector<double>& times,
                                                std::int64_t trials,
                                                const MonteCarloOptions& mc) {
  if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be >= 0");
  require_trials(trials);
  const double h = xi.step();
  std::vector<Index> steps;
  for (double t : times) steps.push_back(steps_for(t, h));
  const double horizon = max_of(times);
  const Index K = steps_for(horizon, h);
  std::vector<std::vector<double>> samples(times.size(), std::vector<double>(count_of(trials)));
  parallel_for(count_of(trials), mc.workers, [&](std::size_t i) {
    const NoisePath noise = generate_noise(mc.seed, stream_id(mc.task, i), K, h, spec.dim());
    const Trajectory traj = integrate(spec, xi, horizon, noise);
    for (std::size_t j = 0; j < times.size(); ++j) {
      samples[j][i] = std::exp(epsilon * sup_squared(traj.segment(steps[j])));
    }
  });
  return samples;
}

EstimateReport moment_report(const std::vector<double>& samples, double epsilon, double t,
                             const DecisionRules& rules) {
  EstimateReport r = summarize(samples);
  const double share = top_share(samples, rules.heavy_tail_fraction);
  const bool heavy = share > rules.heavy_tail_share;
  const bool finite = std::isfinite(r.point_estimate) && std::isfinite(r.std_error);
  r.pass = finite && !heavy;
  r.rule = "finite and top-share <= heavy_tail_share";
  r.metadata = {{"t", t},
                {"epsilon", epsilon},
                {"top_share", share},
                {"heavy_tail", heavy ? 1.0 : 0.0}};
  return r;
}

}  // namespace

EstimateReport exp_moment(const ModelSpec& spec, const Segment& xi, double epsilon, double t,
                          std::int64_t trials, const MonteCarloOptions& mc) {
  const auto samples = moment_samples(spec, xi, epsilon, {t}, trials, mc);
  return moment_report(samples[0], epsilon, t, mc.rules);
}

ExpMomentSeries exp_moment_series(const ModelSpec& spec, const Segment& xi, double epsilon,
                                  const std::vector<double>& times, std::int64_t trials,
                                  const MonteCarloOptions& mc) {
  if (times.empty()) throw std::invalid_argument("exp_moment_series needs at least one time");
  const auto samples = moment_samples(spec, xi, epsilon, validated_times(times), trials, mc);
  ExpMomentSeries series;
  std::vector<double> estimates;
  bool all_pass = true;
  for (std::size_t j = 0; j < times.size(); ++j) {
    series.reports.push_back(moment_report(samples[j], epsilon, times[j], mc.rules));
    estimates.push_back(series.reports.back().point_estimate);
    all_pass = all_pass && *series.reports.back().pass;
  }
  series.fit = fit_log(times, estimates, -std::numeric_limits<double>::infinity()).fit;
  const bool flat = times.size() < 2 ||
                    (series.fit && series.fit->slope <= mc.rules.moment_slope_limit);
  series.pass = all_pass && flat;
  return series;
}

HarnackReport harnack_check(const ModelSpec& spec, const Observable& f, const Segment& xi,
                            const Segment& eta, double t_total, double c, std::int64_t trials,
                            const MonteCarloOptions& mc) {
  require_trials(trials);
  if (!(t_total > spec.delay())) throw std::invalid_argument("harnack_check needs t_total > r0");
  const double h = xi.step();
  const Index K = steps_for(t_total, h);
  const std::size_t n = count_of(trials);
  // a_i = f(X_t(xi)), b_i = f(X_t(eta))^2 with common increments per trial.
  std::vector<double> a(n), b(n);
  parallel_for(n, mc.workers, [&](std::size_t i) {
    const NoisePath noise = generate_noise(mc.seed, stream_id(mc.task, i), K, h, spec.dim());
    const double fx = f(integrate(spec, xi, t_total, noise).segment(K));
    const double fy = f(integrate(spec, eta, t_total, noise).segment(K));
    if (fx < 0.0 || fy < 0.0 || !std::isfinite(fx) || !std::isfinite(fy)) {
      throw std::invalid_argument("harnack_check: f must be finite and nonnegative");
    }
    a[i] = fx;
    b[i] = fy * fy;
  });

  const SampleMoments ma = moments(a);
  const SampleMoments mb = moments(b);
  const double dist = uniform_norm(difference(xi, eta));
  const double weight = std::exp(c * dist * dist);

  HarnackReport r;
  r.trials = trials;
  r.c = c;
  r.lhs = ma.mean * ma.mean;
  r.lhs_se = 2.0 * std::abs(ma.mean) * ma.std_error;
  r.pf2_eta = mb.mean;
  r.pf2_eta_se = mb.std_error;
  r.rhs = weight * mb.mean;
  r.rhs_se = weight * mb.std_error;

  // Delta method on the paired samples: rhs - lhs ~ mean of weight b_i - 2 abar a_i.
  std::vector<double> linear(n);
  for (std::size_t i = 0; i < n; ++i) linear[i] = weight * b[i] - 2.0 * ma.mean * a[i];
  const double se = moments(linear).std_error;
  r.margin = r.rhs + mc.rules.se_multiplier * se - r.lhs;
  r.pass = r.margin >= 0.0;

  if (dist > 0.0 && r.lhs > 0.0 && r.pf2_eta > 0.0) {
    const double d2 = dist * dist;
    r.c_star = (std::log(r.lhs) - std::log(r.pf2_eta)) / d2;
    std::vector<double> grad(n);
    for (std::size_t i = 0; i < n; ++i) grad[i] = (2.0 * a[i] / ma.mean - b[i] / mb.mean) / d2;
    r.c_star_se = moments(grad).std_error;
  }
  return r;
}

HarnackTwoStage harnack_two_stage(const ModelSpec& spec, const Observable& f, const Segment& xi,
                                  const Segment& eta, double t_total, std::int64_t trials,
                                  const MonteCarloOptions& mc) {
  HarnackTwoStage out;
  out.measurement = harnack_check(spec, f, xi, eta, t_total, 0.0, trials, mc);
  const double c_star = out.measurement.c_star.value_or(0.0);
  out.c_frozen = c_star + 0.5 * std::abs(c_star);
  MonteCarloOptions fresh = mc;
  fresh.task = mc.task + 1;
  out.verification = harnack_check(spec, f, xi, eta, t_total, out.c_frozen, trials, fresh);
  return out;
}

LawCheckReport reweighted_law_check(const ModelSpec& spec, const Segment& xi, const Segment& eta,
                                    double t, const std::vector<NamedObservable>& observables,
                                    std::int64_t trials, const MonteCarloOptions& mc) {
  require_trials(trials);
  const double h = xi.step();
  const Index m = spec.delay_intervals(h);
  const Index K = steps_for(t, h) + m;
  const double total = t + spec.delay();
  const std::size_t n = count_of(trials);
  const std::size_t q = observables.size();
  std::vector<char> excluded(n, 0);
  std::vector<std::vector<double>> weighted(q, std::vector<double>(n));
  std::vector<std::vector<double>> plain(q, std::vector<double>(n));

  parallel_for(n, mc.workers, [&](std::size_t i) {
    const NoisePath noise = generate_noise(mc.seed, stream_id(mc.task, i), K, h, spec.dim());
    const CouplingTrace trace = run_coupling(spec, xi, eta, t, noise);
    if (!std::isfinite(trace.log_density) || trace.log_density > mc.rules.density_log_cap) {
      excluded[i] = 1;
      return;
    }
    const Trajectory reference = integrate(spec, eta, total, noise);
    const SegmentView y_end = trace.y.segment(K);
    const SegmentView x_end = reference.segment(K);
    for (std::size_t j = 0; j < q; ++j) {
      weighted[j][i] = trace.density * observables[j].fn(y_end);
      plain[j][i] = observables[j].fn(x_end);
    }
  });

  LawCheckReport report;
  report.trials = trials;
  report.excluded = std::count(excluded.begin(), excluded.end(), 1);
  report.exclusion_rate = static_cast<double>(report.excluded) / static_cast<double>(n);
  report.pass = true;
  for (std::size_t j = 0; j < q; ++j) {
    std::vector<double> w, p, d;
    for (std::size_t i = 0; i < n; ++i) {
      if (excluded[i]) continue;
      w.push_back(weighted[j][i]);
      p.push_back(plain[j][i]);
      d.push_back(weighted[j][i] - plain[j][i]);
    }
    LawComparison cmp;
    cmp.name = observables[j].name;
    cmp.reweighted = summarize(w);
    cmp.plain = summarize(p);
    const SampleMoments md = moments(d);
    cmp.difference = md.mean;
    cmp.difference_se = md.std_error;
    cmp.pass = !d.empty() && std::abs(md.mean) <= mc.rules.se_multiplier * md.std_error;
    cmp.reweighted.metadata = {{"t", t}};
    cmp.plain.metadata = {{"t", t}};
    report.pass = report.pass && cmp.pass;
    report.comparisons.push_back(std::move(cmp));
  }
  return report;
}

TvDecayReport tv_decay(const ModelSpec& spec, const Segment& xi, const Segment& eta,
                       const std::vector<double>& t_grid, std::int64_t trials,
                       const MonteCarloOptions& mc, const TvOptions& tv) {
  require_trials(trials);
  if (t_grid.empty()) throw std::invalid_argument("tv_decay needs a non-empty t grid");
  if (t_grid.size() > 254) throw std::invalid_argument("tv_decay supports at most 254 grid times");
  const double h = xi.step();
  const Index m = spec.delay_intervals(h);
  const double window = tv.coupling_window.value_or(spec.delay());
  const Index Kw = steps_for(window, h);
  if (Kw < 1) throw std::invalid_argument("coupling window must be positive");
  std::vector<Index> sync_steps;
  for (double t : validated_times(t_grid)) sync_steps.push_back(steps_for(t, h));
  const double t_max = max_of(t_grid);
  const Index K_max = steps_for(t_max, h);

  const std::size_t n = count_of(trials);
  const std::size_t g = t_grid.size();
  std::vector<std::vector<double>> values(g, std::vector<double>(n));
  std::vector<std::vector<char>> dropped(g, std::vector<char>(n, 0));

  parallel_for(n, mc.workers, [&](std::size_t i) {
    const NoisePath sync = generate_noise(mc.seed, stream_id(mc.task, i, 0), K_max, h, spec.dim());
    const Trajectory from_xi = integrate(spec, xi, t_max, sync);
    const Trajectory from_eta = integrate(spec, eta, t_max, sync);
    for (std::size_t j = 0; j < g; ++j) {
      const NoisePath noise =
          generate_noise(mc.seed, stream_id(mc.task, i, 1 + j), Kw + m, h, spec.dim());
      const CouplingTrace trace = run_coupling(spec, from_xi.segment_copy(sync_steps[j]),
                                               from_eta.segment_copy(sync_steps[j]), window, noise);
      if (!std::isfinite(trace.log_density) || trace.log_density > mc.rules.density_log_cap) {
        dropped[j][i] = 1;
        continue;
      }
      values[j][i] = std::abs(1.0 - trace.density);
    }
  });

  TvDecayReport report;
  report.lambda_cert = certified_rate(spec);
  std::vector<double> estimates;
  for (std::size_t j = 0; j < g; ++j) {
    std::vector<double> kept;
    for (std::size_t i = 0; i < n; ++i) {
      if (dropped[j][i]) {
        ++report.excluded;
      } else {
        kept.push_back(values[j][i]);
      }
    }
    EstimateReport r = summarize(kept);
    r.metadata = {{"t", t_grid[j]}, {"window", window},
                  {"excluded", static_cast<double>(n - kept.size())}};
    report.times.push_back(t_grid[j]);
    report.total_times.push_back(t_grid[j] + window + spec.delay());
    estimates.push_back(r.point_estimate);
    report.bounds.push_back(std::move(r));
  }
  report.fit = fit_log(report.times, estimates, tv.burn_in).fit;
  report.trend = spearman_decreasing(report.times, estimates);
  if (report.lambda_cert) {
    const bool all_zero =
        std::all_of(estimates.begin(), estimates.end(), [](double v) { return v == 0.0; });
    report.pass = all_zero || (report.fit && report.fit->slope <=
                                                 -(1.0 - mc.rules.tv_tolerance) *
                                                     *report.lambda_cert / 2.0);
  }
  for (auto& r : report.bounds) {
    r.pass = report.pass;
    if (report.lambda_cert) r.metadata["lambda"] = *report.lambda_cert;
  }
  return report;
}

namespace {

std::vector<double> cauchy_samples(const ModelSpec& spec, const Segment& xi, double t1, double t2,
                                   std::int64_t trials, std::uint64_t role,
                                   const MonteCarloOptions& mc) {
  require_trials(trials);
  if (!(t1 > 0.0) || t2 < t1) throw std::invalid_argument("wasserstein_cauchy needs t2 >= t1 > 0");
  const double h = xi.step();
  const Index K1 = steps_for(t1, h);
  const Index K2 = steps_for(t2, h);
  std::vector<double> samples(count_of(trials));
  parallel_for(samples.size(), mc.workers, [&](std::size_t i) {
    const NoisePath noise = generate_noise(mc.seed, stream_id(mc.task, i, role), K2, h, spec.dim());
    const Trajectory full = integrate(spec, xi, t2, noise);
    IntegrateOptions late;
    late.noise_offset = K2 - K1;
    const Trajectory restarted = integrate(spec, xi, t1, noise, late);
    samples[i] = std::min(1.0, uniform_norm(difference(full.segment(K2), restarted.segment(K1))));
  });
  return samples;
}

}  // namespace

EstimateReport wasserstein_cauchy(const ModelSpec& spec, const Segment& xi, double t1, double t2,
                                  std::int64_t trials, const MonteCarloOptions& mc) {
  EstimateReport r = summarize(cauchy_samples(spec, xi, t1, t2, trials, 0, mc));
  r.metadata = {{"t1", t1}, {"t2", t2}};
  if (auto lambda = certified_rate(spec)) r.metadata["lambda"] = *lambda;
  return r;
}

WassersteinSeries wasserstein_cauchy_series(const ModelSpec& spec, const Segment& xi,
                                            const std::vector<double>& t1_values, double offset,
                                            std::int64_t trials, const MonteCarloOptions& mc) {
  if (t1_values.empty()) throw std::invalid_argument("wasserstein series needs t1 values");
  if (t1_values.size() > 255) throw std::invalid_argument("at most 255 t1 values");
  if (!(offset >= 0.0)) throw std::invalid_argument("offset t2 - t1 must be >= 0");
  WassersteinSeries series;
  series.t1_values = t1_values;
  series.offset = offset;
  series.lambda_cert = certified_rate(spec);
  std::vector<double> estimates;
  for (std::size_t j = 0; j < t1_values.size(); ++j) {
    const double t1 = t1_values[j];
    const double t2 = snap_to_grid(t1 + offset, xi.step());
    EstimateReport r = summarize(cauchy_samples(spec, xi, t1, t2, trials, j, mc));
    r.metadata = {{"t1", t1}, {"t2", t2}};
    estimates.push_back(r.point_estimate);
    series.reports.push_back(std::move(r));
  }
  series.fit = fit_log(t1_values, estimates, -std::numeric_limits<double>::infinity()).fit;
  series.trend = spearman_decreasing(t1_values, estimates);
  if (series.lambda_cert) {
    const bool all_zero =
        std::all_of(estimates.begin(), estimates.end(), [](double v) { return v == 0.0; });
    series.pass = all_zero || (series.fit && series.fit->slope <=
                                                 -(1.0 - mc.rules.wasserstein_tolerance) *
                                                     *series.lambda_cert / 2.0);
  }
  for (auto& r : series.reports) r.pass = series.pass;
  return series;
}

std::vector<Segment> warm_samples(const ModelSpec& spec, const InvariantSampling& sampling,
                                  double h, const MonteCarloOptions& mc) {
  if (sampling.outer < 1 || sampling.inner < 1) {
    throw std::invalid_argument("outer and inner budgets must be >= 1");
  }
  if (!(sampling.warmup >= 0.0)) throw std::invalid_argument("warmup must be >= 0");
  const Segment start = sampling.start.value_or(zero_segment(spec, h));
  const Index K = steps_for(sampling.warmup, h);
  std::vector<std::optional<Segment>> slots(count_of(sampling.outer));
  parallel_for(slots.size(), mc.workers, [&](std::size_t i) {
    if (K == 0) {
      slots[i] = start;
      return;
    }
    const NoisePath noise = generate_noise(mc.seed, stream_id(mc.task, i, 0), K, h, spec.dim());
    slots[i] = integrate(spec, start, sampling.warmup, noise).segment_copy(K);
  });
  std::vector<Segment> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

namespace {

// values[t][i][j] = f(X_t(xi_i)) along inner path j; inner paths are shared across t.
using NestedSamples = std::vector<std::vector<std::vector<double>>>;

NestedSamples nested_samples(const ModelSpec& spec, const Observable& f,
                             const std::vector<double>& times, const std::vector<Segment>& starts,
                             std::int64_t inner, double h, const MonteCarloOptions& mc) {
  const std::size_t outer = starts.size();
  if (static_cast<double>(outer) * static_cast<double>(inner) > 4294967295.0) {
    throw std::invalid_argument("outer * inner exceeds the stream range");
  }
  std::vector<Index> steps;
  for (double t : validated_times(times)) steps.push_back(steps_for(t, h));
  const double horizon = max_of(times);
  const Index K = steps_for(horizon, h);
  const std::size_t in = count_of(inner);
  NestedSamples values(times.size(),
                       std::vector<std::vector<double>>(outer, std::vector<double>(in)));
  parallel_for(outer * in, mc.workers, [&](std::size_t index) {
    const std::size_t i = index / in;
    const std::size_t j = index % in;
    if (K == 0) {
      for (std::size_t s = 0; s < times.size(); ++s) values[s][i][j] = f(starts[i]);
      return;
    }
    const NoisePath noise = generate_noise(mc.seed, stream_id(mc.task, index, 1), K, h, spec.dim());
    const Trajectory traj = integrate(spec, starts[i], horizon, noise);
    for (std::size_t s = 0; s < times.size(); ++s) values[s][i][j] = f(traj.segment(steps[s]));
  });
  return values;
}

// Var over outer of the inner means minus the mean inner variance / inner.
double corrected_variance(const std::vector<std::vector<double>>& samples,
                          const std::vector<std::size_t>& pick) {
  std::vector<double> means;
  NeumaierSum noise;
  for (std::size_t i : pick) {
    const SampleMoments m = moments(samples[i]);
    means.push_back(m.mean);
    if (m.count > 1) noise.add(m.variance / static_cast<double>(m.count));
  }
  return moments(means).variance - noise.value() / static_cast<double>(pick.size());
}

}  // namespace

L2DecayReport l2_decay(const ModelSpec& spec, const Observable& f,
                       const std::vector<double>& t_grid, const InvariantSampling& sampling,
                       double h, const MonteCarloOptions& mc) {
  if (t_grid.empty()) throw std::invalid_argument("l2_decay needs a non-empty t grid");
  if (sampling.outer < 2) throw std::invalid_argument("l2_decay needs outer >= 2");
  const std::vector<Segment> starts = warm_samples(spec, sampling, h, mc);
  const NestedSamples values = nested_samples(spec, f, t_grid, starts, sampling.inner, h, mc);
  const std::size_t outer = starts.size();

  std::vector<std::size_t> identity(outer);
  for (std::size_t i = 0; i < outer; ++i) identity[i] = i;
  constexpr int kBootstrap = 200;
  Rng rng = make_rng(mc.seed, stream_id(mc.task, 0, 255));
  std::vector<std::vector<std::size_t>> resamples(kBootstrap, std::vector<std::size_t>(outer));
  for (auto& pick : resamples) {
    for (auto& p : pick) p = static_cast<std::size_t>(rng() % outer);
  }

  L2DecayReport report;
  report.lambda_cert = certified_rate(spec);
  std::vector<double> estimates;
  for (std::size_t s = 0; s < t_grid.size(); ++s) {
    EstimateReport r;
    r.point_estimate = corrected_variance(values[s], identity);
    std::vector<double> boot;
    for (const auto& pick : resamples) boot.push_back(corrected_variance(values[s], pick));
    r.std_error = std::sqrt(moments(boot).variance);
    r.trials = static_cast<std::int64_t>(outer) * sampling.inner;
    r.metadata = {{"t", t_grid[s]},
                  {"warmup", sampling.warmup},
                  {"outer", static_cast<double>(outer)},
                  {"inner", static_cast<double>(sampling.inner)}};
    report.times.push_back(t_grid[s]);
    estimates.push_back(r.point_estimate);
    report.variances.push_back(std::move(r));
  }
  // P_0 f = f exactly, so t = 0 carries no decay information about the rate.
  report.fit = fit_log(report.times, estimates, kTimeSlack * 2.0).fit;
  if (report.lambda_cert) {
    const bool all_zero =
        std::all_of(estimates.begin(), estimates.end(), [](double v) { return v == 0.0; });
    report.pass = all_zero || (report.fit && report.fit->slope <=
                                                 -(1.0 - mc.rules.l2_tolerance) *
                                                     *report.lambda_cert);
  }
  for (auto& r : report.variances) {
    r.pass = report.pass;
    if (report.lambda_cert) r.metadata["lambda"] = *report.lambda_cert;
  }
  return report;
}

HyperReport hyper_check(const ModelSpec& spec, const Observable& f, double t,
                        const InvariantSampling& sampling, double h, const MonteCarloOptions& mc) {
  const std::vector<Segment> starts = warm_samples(spec, sampling, h, mc);
  const NestedSamples values = nested_samples(spec, f, {t}, starts, sampling.inner, h, mc);
  const std::size_t outer = starts.size();
  std::vector<double> fourth(outer), square(outer);
  for (std::size_t i = 0; i < outer; ++i) {
    const double p = moments(values[0][i]).mean;
    fourth[i] = p * p * p * p;
    const double f0 = f(starts[i]);
    square[i] = f0 * f0;
  }
  const SampleMoments m4 = moments(fourth);
  const SampleMoments m2 = moments(square);
  HyperReport r;
  r.t = t;
  r.norm4 = std::pow(m4.mean, 0.25);
  r.norm2 = std::sqrt(m2.mean);
  r.norm4_se = r.norm4 > 0.0 ? m4.std_error / (4.0 * r.norm4 * r.norm4 * r.norm4) : 0.0;
  r.norm2_se = r.norm2 > 0.0 ? m2.std_error / (2.0 * r.norm2) : 0.0;
  const double se = std::hypot(r.norm4_se, r.norm2_se);
  r.pass = r.norm4 <= r.norm2 + mc.rules.se_multiplier * se;
  return r;
}

NovikovReport novikov_diagnostic(const ModelSpec& spec, const Segment& xi, const Segment& eta,
                                 double t, std::int64_t trials, const MonteCarloOptions& mc) {
  require_trials(trials);
  spec.sigma_inverse();
  const double h = xi.step();
  const Index K = steps_for(t, h) + spec.delay_intervals(h);
  std::vector<double> values(count_of(trials));
  CouplingOptions options;
  options.with_density = false;
  parallel_for(values.size(), mc.workers, [&](std::size_t i) {
    const NoisePath noise = generate_noise(mc.seed, stream_id(mc.task, i), K, h, spec.dim());
    const CouplingTrace trace = run_coupling(spec, xi, eta, t, noise, options);
    values[i] = std::exp(novikov_exponent(trace, spec));
  });
  const SampleMoments m = moments(values);
  NovikovReport r;
  r.estimate = m.mean;
  r.std_error = m.std_error;
  r.trials = trials;
  r.top_decile_share = top_share(values, 0.1);
  r.divergence_suspected = !std::isfinite(m.mean) || r.top_decile_share > 0.5;
  return r;
}

}  // namespace nfsde
