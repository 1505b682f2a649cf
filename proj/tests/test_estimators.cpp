#include "nfsde/estimators.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace nfsde {
namespace {

Segment constant(const ModelSpec& spec, double value, double h) {
  return Segment::constant(Vector::Constant(spec.dim(), value), spec.delay_intervals(h), h);
}

MonteCarloOptions options(std::uint64_t task, unsigned workers = 0) {
  MonteCarloOptions mc;
  mc.seed = 77;
  mc.task = task;
  mc.workers = workers;
  return mc;
}

TEST(Contraction, IdenticalStartsGiveZeroCurve) {
  const ModelSpec spec = builtin_model("scalar_linear");
  const double h = 0.002;
  const Segment xi = constant(spec, 1.0, h);
  const NoisePath noise = generate_noise(1, 1, steps_for(1.0, h), h, 1);
  const ContractionResult r = contraction_curve(spec, xi, xi, 1.0, noise);
  for (double v : r.squared_gap) EXPECT_EQ(v, 0.0);
  ASSERT_TRUE(r.pass.has_value());
  EXPECT_TRUE(*r.pass);
}

TEST(Contraction, IndependentOfNoiseAndStableUnderRefinement) {
  const ModelSpec spec = builtin_model("scalar_linear");
  auto curve = [&](double h, std::uint64_t stream) {
    const NoisePath noise = generate_noise(1, stream, steps_for(2.0, h), h, 1);
    return contraction_curve(spec, constant(spec, 1.0, h), constant(spec, 0.0, h), 2.0, noise);
  };
  const ContractionResult a = curve(0.002, 1), b = curve(0.002, 2);
  EXPECT_EQ(a.squared_gap, b.squared_gap);
  ASSERT_TRUE(a.fit.has_value());
  EXPECT_TRUE(*a.pass);
  EXPECT_LE(a.fit->slope, -0.9 * *a.lambda_cert);
  const ContractionResult fine = curve(0.0002, 1);
  EXPECT_NEAR(fine.fit->slope / a.fit->slope, 1.0, 0.02);
}

TEST(Contraction, NonAffineModelPasses) {
  const ModelSpec spec = builtin_model("cubic");
  const double h = 0.005;
  const NoisePath noise = generate_noise(1, 3, steps_for(4.0, h), h, 1);
  const ContractionResult r =
      contraction_curve(spec, constant(spec, 1.0, h), constant(spec, -0.5, h), 4.0, noise);
  ASSERT_TRUE(r.pass.has_value());
  EXPECT_TRUE(*r.pass);
}

TEST(Contraction, InfeasibleModelHasNoVerdict) {
  HypothesisConstants c;
  c.lambda1 = 10.0;
  c.lambda2 = 0.2;
  c.kappa1 = 1.0;
  const Matrix one = Matrix::Identity(1, 1);
  const ModelSpec spec = linear_model("wide", 0.9, 2.0, -one, Matrix::Zero(1, 1), Matrix::Zero(1, 1), one, c);
  const double h = 0.05;
  const NoisePath noise = generate_noise(1, 3, steps_for(4.0, h), h, 1);
  const ContractionResult r = contraction_curve(spec, constant(spec, 1.0, h), constant(spec, 0.0, h), 4.0, noise);
  EXPECT_FALSE(r.lambda_cert.has_value());
  EXPECT_FALSE(r.pass.has_value());
}

TEST(ExpMoment, DeterministicMatchesDiscreteClosedForm) {
  // sigma = 0, Z(x) = -x, constant start x0: X(t_k) = x0 (1 - h)^k and the segment
  // supremum sits at its oldest node.
  const ModelSpec spec = builtin_model("ornstein", {{"sigma", 0.0}});
  const double h = 0.01, x0 = 1.5, eps = 0.3, t = 2.0;
  const Index shift = steps_for(t, h) - spec.delay_intervals(h);
  const double oldest = x0 * std::pow(1.0 - h, static_cast<double>(shift));
  const EstimateReport r = exp_moment(spec, constant(spec, x0, h), eps, t, 3, options(1));
  EXPECT_NEAR(r.point_estimate, std::exp(eps * oldest * oldest), 1e-12);
  EXPECT_EQ(r.std_error, 0.0);
  EXPECT_EQ(r.metadata.at("heavy_tail"), 0.0);
}

TEST(ExpMoment, ZeroEpsilonIsOne) {
  const ModelSpec spec = builtin_model("scalar_linear");
  const EstimateReport r = exp_moment(spec, constant(spec, 1.0, 0.01), 0.0, 1.0, 50, options(2));
  EXPECT_EQ(r.point_estimate, 1.0);
  EXPECT_EQ(r.std_error, 0.0);
  EXPECT_TRUE(*r.pass);
}

TEST(ExpMoment, OrnsteinSeriesIsBoundedAndAboveHeadBound) {
  const ModelSpec spec = builtin_model("ornstein");
  const double h = 0.01, eps = 0.2;
  const ExpMomentSeries s =
      exp_moment_series(spec, constant(spec, 0.0, h), eps, {1.0, 2.0, 3.0, 4.0}, 4000, options(3));
  EXPECT_TRUE(s.pass);
  ASSERT_TRUE(s.fit.has_value());
  EXPECT_LE(s.fit->slope, 0.05);
  for (const auto& r : s.reports) {
    // Euler variance of X(t_K) from 0: (1 - (1-h)^{2K}) / (2 - h).
    const double K = r.metadata.at("t") / h;
    const double v = (1.0 - std::pow(1.0 - h, 2.0 * K)) / (2.0 - h);
    EXPECT_GE(r.point_estimate + 3.0 * r.std_error, 1.0 / std::sqrt(1.0 - 2.0 * eps * v));
  }
}

TEST(ExpMoment, WorkerCountDoesNotChangeResults) {
  const ModelSpec spec = builtin_model("cubic");
  const Segment xi = constant(spec, 0.5, 0.01);
  const EstimateReport a = exp_moment(spec, xi, 0.1, 1.0, 300, options(4, 1));
  const EstimateReport b = exp_moment(spec, xi, 0.1, 1.0, 300, options(4, 7));
  EXPECT_EQ(a.point_estimate, b.point_estimate);
  EXPECT_EQ(a.std_error, b.std_error);
  const EstimateReport other = exp_moment(spec, xi, 0.1, 1.0, 300, options(5, 1));
  EXPECT_NE(a.point_estimate, other.point_estimate);
}

TEST(ExpMoment, StandardErrorScalesWithTrials) {
  const ModelSpec spec = builtin_model("scalar_linear");
  const Segment xi = constant(spec, 0.5, 0.01);
  const double small = exp_moment(spec, xi, 0.2, 1.0, 4000, options(6)).std_error;
  const double large = exp_moment(spec, xi, 0.2, 1.0, 8000, options(6)).std_error;
  EXPECT_NEAR(large / small, 1.0 / std::sqrt(2.0), 0.15 / std::sqrt(2.0));
}

TEST(Harnack, IdenticalStartsHoldWithZeroConstant) {
  const ModelSpec spec = builtin_model("scalar_linear");
  const Segment xi = constant(spec, 0.4, 0.01);
  const HarnackReport r = harnack_check(spec, observables::clipped_head(), xi, xi, 0.5, 0.0, 500, options(7));
  EXPECT_TRUE(r.pass);
  EXPECT_LE(r.lhs, r.rhs);  // Cauchy-Schwarz on the same samples
  EXPECT_FALSE(r.c_star.has_value());
}

TEST(Harnack, ConstantObservable) {
  const ModelSpec spec = builtin_model("scalar_linear");
  const double h = 0.01;
  const HarnackReport r = harnack_check(spec, observables::constant(1.0), constant(spec, 1.0, h),
                                        constant(spec, 0.0, h), 0.5, -0.5, 200, options(8));
  EXPECT_EQ(r.lhs, 1.0);
  EXPECT_EQ(r.pf2_eta, 1.0);
  EXPECT_NEAR(r.rhs, std::exp(-0.5), 1e-15);
  EXPECT_FALSE(r.pass);
  ASSERT_TRUE(r.c_star.has_value());
  EXPECT_EQ(*r.c_star, 0.0);
  EXPECT_EQ(r.c_star_se, 0.0);
}

TEST(Harnack, TwoStageFreezesInflatedConstant) {
  const ModelSpec spec = builtin_model("scalar_linear");
  const double h = 0.01;
  const HarnackTwoStage r = harnack_two_stage(spec, observables::clipped_head(), constant(spec, 1.0, h),
                                              constant(spec, 0.5, h), 0.6, 2000, options(9));
  ASSERT_TRUE(r.measurement.c_star.has_value());
  const double c = *r.measurement.c_star;
  EXPECT_NEAR(r.c_frozen, c + 0.5 * std::abs(c), 1e-15);
  EXPECT_EQ(r.verification.c, r.c_frozen);
  EXPECT_TRUE(r.verification.pass);
}

TEST(Harnack, Validation) {
  const ModelSpec spec = builtin_model("scalar_linear");
  const Segment xi = constant(spec, 1.0, 0.01);
  const Observable negative = [](SegmentView) { return -1.0; };
  EXPECT_THROW(harnack_check(spec, negative, xi, xi, 0.5, 0.0, 10, options(1)), std::invalid_argument);
  EXPECT_THROW(harnack_check(spec, observables::constant(1.0), xi, xi, 0.2, 0.0, 10, options(1)),
               std::invalid_argument);
  EXPECT_THROW(harnack_check(spec, observables::constant(1.0), xi, xi, 0.5, 0.0, 0, options(1)),
               std::invalid_argument);
}

TEST(LawCheck, IdenticalStartsMatchPathwise) {
  const ModelSpec spec = builtin_model("scalar_linear");
  const Segment xi = constant(spec, 0.3, 0.01);
  const LawCheckReport r = reweighted_law_check(
      spec, xi, xi, 0.4, {{"clipped_head", observables::clipped_head()}}, 200, options(10));
  ASSERT_EQ(r.comparisons.size(), 1u);
  EXPECT_NEAR(r.comparisons[0].difference, 0.0, 1e-12);
  EXPECT_LT(r.comparisons[0].difference_se, 1e-12);
  EXPECT_EQ(r.excluded, 0);
}

TEST(LawCheck, ReweightingIsUnbiased) {
  const ModelSpec spec = builtin_model("scalar_linear");
  const double h = 0.005;
  const LawCheckReport r = reweighted_law_check(
      spec, constant(spec, 0.8, h), constant(spec, 0.0, h), 5.0 * spec.delay(),
      {{"one", observables::constant(1.0)},
       {"clipped_head", observables::clipped_head()},
       {"logistic", observables::logistic_head(2.0)}},
      4000, options(11));
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.comparisons[0].reweighted.point_estimate, 1.0, 4.0 * r.comparisons[0].reweighted.std_error);
  EXPECT_EQ(r.comparisons[0].plain.point_estimate, 1.0);
  EXPECT_LE(r.exclusion_rate, 0.01);
}

TEST(TotalVariation, IdenticalStartsGiveZero) {
  const ModelSpec spec = builtin_model("scalar_linear");
  const Segment xi = constant(spec, 0.5, 0.01);
  const TvDecayReport r = tv_decay(spec, xi, xi, {0.2, 0.4}, 100, options(12));
  for (const auto& b : r.bounds) EXPECT_EQ(b.point_estimate, 0.0);
  ASSERT_TRUE(r.pass.has_value());
  EXPECT_TRUE(*r.pass);
  EXPECT_NEAR(r.total_times[1], 0.4 + 2.0 * spec.delay(), 1e-15);
}

TEST(TotalVariation, BoundsDecayWithSynchronousPhase) {
  const ModelSpec spec = builtin_model("scalar_linear");
  const double lambda = *certified_rate(spec);
  const double h = 0.005;
  std::vector<double> grid;
  for (int i = 1; i <= 4; ++i) grid.push_back(snap_to_grid(i / lambda, h));
  const TvDecayReport r = tv_decay(spec, constant(spec, 1.0, h), constant(spec, 0.0, h), grid, 2000, options(13));
  for (const auto& b : r.bounds) {
    EXPECT_GE(b.point_estimate, 0.0);
    EXPECT_LE(b.point_estimate, 2.0);
  }
  EXPECT_LT(r.bounds.back().point_estimate, r.bounds.front().point_estimate);
  EXPECT_LT(r.trend.p_value, 0.05);
  EXPECT_TRUE(*r.pass);
}

TEST(WassersteinCauchy, EqualTimesGiveZero) {
  const ModelSpec spec = builtin_model("scalar_linear");
  const EstimateReport r = wasserstein_cauchy(spec, constant(spec, 1.0, 0.01), 0.5, 0.5, 50, options(14));
  EXPECT_EQ(r.point_estimate, 0.0);
  EXPECT_THROW(wasserstein_cauchy(spec, constant(spec, 1.0, 0.01), 0.5, 0.4, 50, options(14)),
               std::invalid_argument);
}

TEST(WassersteinCauchy, DeterministicMatchesDirectIntegration) {
  const ModelSpec spec = builtin_model("scalar_linear", {{"sigma", 0.0}});
  const double h = 0.01, t1 = 0.3, t2 = 0.5;
  const Segment xi = constant(spec, 1.0, h);
  const NoisePath quiet = generate_noise(1, 1, steps_for(t2, h), h, 1);
  const Trajectory a = integrate(spec, xi, t2, quiet);
  const Trajectory b = integrate(spec, xi, t1, quiet);
  const double expected =
      std::min(1.0, uniform_norm(difference(a.segment(steps_for(t2, h)), b.segment(steps_for(t1, h)))));
  const EstimateReport r = wasserstein_cauchy(spec, xi, t1, t2, 5, options(15));
  EXPECT_NEAR(r.point_estimate, expected, 1e-14);
  EXPECT_GT(expected, 0.0);
}

TEST(WassersteinCauchy, SeriesDecreases) {
  const ModelSpec spec = builtin_model("scalar_linear");
  const double lambda = *certified_rate(spec);
  const double h = 0.005;
  std::vector<double> t1;
  for (int i = 1; i <= 4; ++i) t1.push_back(snap_to_grid(i / lambda, h));
  const WassersteinSeries s =
      wasserstein_cauchy_series(spec, constant(spec, 1.0, h), t1, snap_to_grid(2.0 / lambda, h), 2000, options(16));
  EXPECT_LT(s.reports.back().point_estimate, s.reports.front().point_estimate);
  EXPECT_TRUE(*s.pass);
}

TEST(L2Decay, ConstantObservableHasNoVariance) {
  const ModelSpec spec = builtin_model("ornstein");
  InvariantSampling sampling;
  sampling.warmup = 1.0;
  sampling.outer = 50;
  sampling.inner = 5;
  const L2DecayReport r = l2_decay(spec, observables::constant(1.0), {0.0, 0.5}, sampling, 0.01, options(17));
  for (const auto& v : r.variances) EXPECT_EQ(v.point_estimate, 0.0);
  EXPECT_TRUE(*r.pass);
}

// Var_mu(P_t f) for dX = -X dt + dW, f = 1 ^ |x|, mu = N(0, 1/2), computed by
// numerical integration against the exact Gaussian transition.
TEST(L2Decay, OrnsteinMatchesGaussianOracle) {
  const ModelSpec spec = builtin_model("ornstein");
  InvariantSampling sampling;
  sampling.warmup = 5.0;
  sampling.outer = 2000;
  sampling.inner = 100;
  const L2DecayReport r =
      l2_decay(spec, observables::clipped_head(), {0.0, 0.5}, sampling, 0.01, options(18));
  const double oracle[] = {0.10696727080187551, 0.009088319697086338};
  for (int i = 0; i < 2; ++i) {
    const auto& v = r.variances[static_cast<std::size_t>(i)];
    EXPECT_NEAR(v.point_estimate, oracle[i], 4.0 * v.std_error + 0.05 * oracle[i]) << "t index " << i;
  }
}

TEST(L2Decay, TimeZeroIsSampleVariance) {
  const ModelSpec spec = builtin_model("ornstein");
  InvariantSampling sampling;
  sampling.warmup = 2.0;
  sampling.outer = 300;
  sampling.inner = 3;
  const MonteCarloOptions mc = options(19);
  const L2DecayReport r = l2_decay(spec, observables::clipped_head(), {0.0}, sampling, 0.01, mc);
  std::vector<double> f0;
  for (const auto& s : warm_samples(spec, sampling, 0.01, mc)) f0.push_back(observables::clipped_head()(s));
  EXPECT_NEAR(r.variances[0].point_estimate, moments(f0).variance, 1e-15);
}

TEST(Hypercontractivity, ConstantAndSmallObservables) {
  const ModelSpec spec = builtin_model("ornstein");
  InvariantSampling sampling;
  sampling.warmup = 3.0;
  sampling.outer = 200;
  sampling.inner = 10;
  const HyperReport one = hyper_check(spec, observables::constant(1.0), 0.5, sampling, 0.01, options(20));
  EXPECT_NEAR(one.norm4, 1.0, 1e-15);
  EXPECT_NEAR(one.norm2, 1.0, 1e-15);
  EXPECT_TRUE(one.pass);
  const HyperReport small = hyper_check(spec, observables::constant(1e-3), 0.5, sampling, 0.01, options(20));
  EXPECT_TRUE(small.pass);
}

TEST(Hypercontractivity, RareEventFailsAtTimeZero) {
  // At t = 0, ||1_A||_4 = P(A)^{1/4} exceeds ||1_A||_2 = P(A)^{1/2}.
  const ModelSpec spec = builtin_model("ornstein");
  InvariantSampling sampling;
  sampling.warmup = 5.0;
  sampling.outer = 2000;
  sampling.inner = 1;
  const HyperReport r = hyper_check(spec, observables::head_exceeds(1.0), 0.0, sampling, 0.01, options(21));
  EXPECT_FALSE(r.pass);
  EXPECT_NEAR(r.norm4, std::sqrt(r.norm2), 1e-12);
}

TEST(Novikov, IdenticalStartsAndSingularSigma) {
  const ModelSpec spec = builtin_model("scalar_linear");
  const Segment xi = constant(spec, 0.1, 0.01);
  const NovikovReport r = novikov_diagnostic(spec, xi, xi, 0.5, 100, options(22));
  EXPECT_EQ(r.estimate, 1.0);
  EXPECT_EQ(r.std_error, 0.0);
  EXPECT_FALSE(r.divergence_suspected);
  const ModelSpec quiet = builtin_model("scalar_linear", {{"sigma", 0.0}});
  EXPECT_THROW(novikov_diagnostic(quiet, xi, xi, 0.5, 10, options(22)), std::domain_error);
}

TEST(Novikov, FiniteForModerateGap) {
  const ModelSpec spec = builtin_model("scalar_linear");
  const double h = 0.005;
  const NovikovReport r =
      novikov_diagnostic(spec, constant(spec, 0.5, h), constant(spec, 0.0, h), 1.0, 1000, options(23));
  EXPECT_GT(r.estimate, 1.0);
  EXPECT_TRUE(std::isfinite(r.estimate));
  EXPECT_FALSE(r.divergence_suspected);
}

}  // namespace
}  // namespace nfsde
