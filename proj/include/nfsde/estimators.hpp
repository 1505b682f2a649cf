#pragma once

#include "nfsde/coupling.hpp"
#include "nfsde/model.hpp"
#include "nfsde/observables.hpp"
#include "nfsde/simulate.hpp"
#include "nfsde/stats.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace nfsde {

/// Default pass/fail thresholds; every field may be overridden per experiment.
struct DecisionRules {
  double se_multiplier = 3.0;
  double contraction_tolerance = 0.10;   // slope <= -(1 - tol) lambda
  double tv_tolerance = 0.20;            // slope <= -(1 - tol) lambda / 2
  double wasserstein_tolerance = 0.25;   // slope <= -(1 - tol) lambda / 2
  double l2_tolerance = 0.30;            // slope <= -(1 - tol) lambda
  double moment_slope_limit = 0.05;      // d log E e^{eps ||X_t||^2} / dt <= limit
  double heavy_tail_fraction = 0.01;     // top 1% of samples ...
  double heavy_tail_share = 0.5;         // ... contributing more than 50% of the mean
  double density_log_cap = 700.0;        // trials with log R above are excluded
};

/// Reproducibility and execution controls shared by the estimators.
/// Trial i of an estimator draws noise from stream_id(task, i, role).
struct MonteCarloOptions {
  std::uint64_t seed = 1;
  std::uint64_t task = 0;
  unsigned workers = 0;  // 0: hardware concurrency
  DecisionRules rules;
};

/// Point estimate with standard error and the producing operation's decision.
struct EstimateReport {
  double point_estimate = 0.0;
  double std_error = 0.0;
  std::int64_t trials = 0;
  std::optional<bool> pass;  // nullopt when no judgement applies
  std::string rule;
  std::map<std::string, double> metadata;
};

/// Certified rate lambda of a feasible model, otherwise nullopt.
std::optional<double> certified_rate(const ModelSpec& spec);

struct ContractionResult {
  std::vector<double> times;
  std::vector<double> squared_gap;  // ||X_t(xi) - X_t(eta)||^2 on the grid
  std::optional<LineFit> fit;       // log squared_gap over [r0, horizon]
  std::optional<double> lambda_cert;
  std::optional<bool> pass;         // nullopt when infeasible
};

/// Synchronous-noise contraction curve; pass iff the fitted log-slope is
/// <= -(1 - tol) lambda_cert (vacuously true when the curve is zero).
ContractionResult contraction_curve(const ModelSpec& spec, const Segment& xi, const Segment& eta,
                                    double horizon, const NoisePath& noise,
                                    const DecisionRules& rules = {});

/// E exp(eps ||X_t(xi)||^2); metadata carries the top-1% share and heavy-tail flag.
EstimateReport exp_moment(const ModelSpec& spec, const Segment& xi, double epsilon, double t,
                          std::int64_t trials, const MonteCarloOptions& mc = {});

struct ExpMomentSeries {
  std::vector<EstimateReport> reports;  // one per time, same sample paths
  std::optional<LineFit> fit;           // log estimate against t
  bool pass = false;                    // finite, no heavy tail, slope <= limit
};

ExpMomentSeries exp_moment_series(const ModelSpec& spec, const Segment& xi, double epsilon,
                                  const std::vector<double>& times, std::int64_t trials,
                                  const MonteCarloOptions& mc = {});

struct HarnackReport {
  double lhs = 0.0;      // (P_t f(xi))^2
  double lhs_se = 0.0;
  double pf2_eta = 0.0;  // P_t f^2(eta)
  double pf2_eta_se = 0.0;
  double rhs = 0.0;      // P_t f^2(eta) e^{c ||xi - eta||^2}
  double rhs_se = 0.0;
  double c = 0.0;
  double margin = 0.0;   // rhs + k SE - lhs
  bool pass = false;
  std::optional<double> c_star;  // [log lhs - log P_t f^2(eta)] / ||xi - eta||^2
  double c_star_se = 0.0;
  std::int64_t trials = 0;
};

/// Monte Carlo check of (P_t f(xi))^2 <= P_t f^2(eta) e^{c ||xi-eta||^2}, t > r0.
/// Throws std::invalid_argument if f takes a negative value.
HarnackReport harnack_check(const ModelSpec& spec, const Observable& f, const Segment& xi,
                            const Segment& eta, double t_total, double c, std::int64_t trials,
                            const MonteCarloOptions& mc = {});

struct HarnackTwoStage {
  HarnackReport measurement;  // stage 1, streams of task mc.task
  double c_frozen = 0.0;      // c* + |c*| / 2 (= 1.5 c* for c* >= 0)
  HarnackReport verification; // stage 2, fresh streams of task mc.task + 1
};

/// Measure c*, freeze an inflated constant, re-verify on fresh seeds.
HarnackTwoStage harnack_two_stage(const ModelSpec& spec, const Observable& f, const Segment& xi,
                                  const Segment& eta, double t_total, std::int64_t trials,
                                  const MonteCarloOptions& mc = {});

struct LawComparison {
  std::string name;
  EstimateReport reweighted;  // E[R phi(Y_{t+r0})]
  EstimateReport plain;       // E[phi(X_{t+r0}(eta))]
  double difference = 0.0;    // paired mean of R phi(Y) - phi(X(eta))
  double difference_se = 0.0;
  bool pass = false;
};

struct LawCheckReport {
  std::vector<LawComparison> comparisons;
  std::int64_t trials = 0;
  std::int64_t excluded = 0;
  double exclusion_rate = 0.0;
  bool pass = false;
};

/// Compares the reweighted coupling estimate with a plain simulation of the
/// equation started at eta (same increments, separate integrator run).
LawCheckReport reweighted_law_check(const ModelSpec& spec, const Segment& xi, const Segment& eta,
                                    double t, const std::vector<NamedObservable>& observables,
                                    std::int64_t trials, const MonteCarloOptions& mc = {});

struct TvOptions {
  /// Length of the change-of-measure window after the synchronous phase;
  /// defaults to r0. The bound refers to time t + window + r0.
  std::optional<double> coupling_window;
  /// Only grid times >= burn_in enter the rate fit.
  double burn_in = 0.0;
};

struct TvDecayReport {
  std::vector<double> times;               // synchronous-phase lengths t
  std::vector<double> total_times;         // t + window + r0
  std::vector<EstimateReport> bounds;      // E|1 - R|
  std::optional<LineFit> fit;
  TrendTest trend;
  std::optional<double> lambda_cert;
  std::optional<bool> pass;
  std::int64_t excluded = 0;
};

/// Upper bounds on the total variation distance between the laws of the
/// segment at time t + window + r0 started from xi and eta.
TvDecayReport tv_decay(const ModelSpec& spec, const Segment& xi, const Segment& eta,
                       const std::vector<double>& t_grid, std::int64_t trials,
                       const MonteCarloOptions& mc = {}, const TvOptions& tv = {});

/// E[1 ^ ||X_{t2}(xi) - Xbar_{t2}||], Xbar restarted from xi at t2 - t1 with
/// the same increments on the overlap.
EstimateReport wasserstein_cauchy(const ModelSpec& spec, const Segment& xi, double t1, double t2,
                                  std::int64_t trials, const MonteCarloOptions& mc = {});

struct WassersteinSeries {
  std::vector<double> t1_values;
  double offset = 0.0;  // t2 - t1
  std::vector<EstimateReport> reports;
  std::optional<LineFit> fit;
  TrendTest trend;
  std::optional<double> lambda_cert;
  std::optional<bool> pass;
};

WassersteinSeries wasserstein_cauchy_series(const ModelSpec& spec, const Segment& xi,
                                            const std::vector<double>& t1_values, double offset,
                                            std::int64_t trials, const MonteCarloOptions& mc = {});

struct InvariantSampling {
  /// Start of the warm-up chains; defaults to the zero segment.
  std::optional<Segment> start;
  double warmup = 0.0;
  std::int64_t outer = 1;
  std::int64_t inner = 1;
};

struct L2DecayReport {
  std::vector<double> times;
  std::vector<EstimateReport> variances;  // Var over mu_hat of P_t f
  std::optional<LineFit> fit;
  std::optional<double> lambda_cert;
  std::optional<bool> pass;
};

/// Bias-corrected nested Monte Carlo estimate of Var_mu(P_t f) with
/// bootstrap standard errors; mu is approximated by warmed-up samples.
L2DecayReport l2_decay(const ModelSpec& spec, const Observable& f,
                       const std::vector<double>& t_grid, const InvariantSampling& sampling,
                       double h, const MonteCarloOptions& mc = {});

struct HyperReport {
  double norm4 = 0.0;  // mu_hat(|P_t f|^4)^{1/4}
  double norm4_se = 0.0;
  double norm2 = 0.0;  // mu_hat(f^2)^{1/2}
  double norm2_se = 0.0;
  double t = 0.0;
  bool pass = false;
};

/// Necessary-condition check of ||P_t f||_4 <= ||f||_2 for one f.
HyperReport hyper_check(const ModelSpec& spec, const Observable& f, double t,
                        const InvariantSampling& sampling, double h,
                        const MonteCarloOptions& mc = {});

struct NovikovReport {
  double estimate = 1.0;  // E exp(1/2 int |sigma^{-1} h|^2)
  double std_error = 0.0;
  double top_decile_share = 0.0;
  bool divergence_suspected = false;
  std::int64_t trials = 0;
};

NovikovReport novikov_diagnostic(const ModelSpec& spec, const Segment& xi, const Segment& eta,
                                 double t, std::int64_t trials, const MonteCarloOptions& mc = {});

/// Warmed-up samples X_{warmup}(start), one per outer chain.
std::vector<Segment> warm_samples(const ModelSpec& spec, const InvariantSampling& sampling,
                                  double h, const MonteCarloOptions& mc);

}  // namespace nfsde
