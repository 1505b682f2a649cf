#include "nfsde/coupling.hpp"
#include "nfsde/stats.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

namespace nfsde {
namespace {

constexpr double kH = 0.002;

ModelSpec linear(double sigma = 1.0) {
  return builtin_model("scalar_linear", {{"sigma", sigma}});
}

Segment constant(const ModelSpec& spec, double value, double h = kH) {
  return Segment::constant(value, spec.delay_intervals(h), h);
}

NoisePath noise_for(const ModelSpec& spec, double t, std::uint64_t trial, double h = kH) {
  return generate_noise(99, stream_id(3, trial), steps_for(t + spec.delay(), h), h, spec.dim());
}

// Reference values from direct evaluation of the closed forms with kappa1 = 1, t = 1, gap = 1.
TEST(Schedule, FrozenValues) {
  const DriftSchedule g(1.0, 1.0, 1.0);
  const Envelope G(1.0, 1.0, 1.0);
  EXPECT_NEAR(g(0.0), 0.31303528549933135, 1e-14);
  EXPECT_NEAR(G(0.5), 0.44340944198503696, 1e-14);
  EXPECT_EQ(G(0.0), 1.0);
  EXPECT_EQ(G(1.0), 0.0);
  EXPECT_EQ(G(2.0), 0.0);
  EXPECT_EQ(g(1.5), 0.0);
  EXPECT_EQ(g(-0.1), 0.0);
}

TEST(Schedule, EnvelopeSolvesTheControlledEquation) {
  // G(s) = gap e^{-k s} - int_0^s e^{-k (s - r)} g(r) dr, by trapezoid quadrature.
  for (double k1 : {-0.7, 0.0, 0.4, 6.0}) {
    const double gap = 1.3, t = 0.9;
    const DriftSchedule g(k1, gap, t);
    const Envelope G(k1, gap, t);
    for (double s : {0.1, 0.45, 0.8}) {
      const int n = 20000;
      double integral = 0.0;
      for (int i = 0; i <= n; ++i) {
        const double r = s * i / n;
        const double w = (i == 0 || i == n) ? 0.5 : 1.0;
        integral += w * std::exp(-k1 * (s - r)) * g(r);
      }
      integral *= s / n;
      EXPECT_NEAR(G(s), gap * std::exp(-k1 * s) - integral, 1e-8) << "kappa1 " << k1;
    }
  }
}

TEST(Schedule, ContinuousThroughZeroKappa1AndNonincreasing) {
  const double t = 2.0;
  for (double s : {0.0, 0.5, 1.9}) {
    EXPECT_NEAR(Envelope(1e-7, 1.0, t)(s), Envelope(0.0, 1.0, t)(s), 1e-6);
    EXPECT_NEAR(Envelope(-1e-7, 1.0, t)(s), Envelope(0.0, 1.0, t)(s), 1e-6);
    EXPECT_NEAR(DriftSchedule(1e-7, 1.0, t)(s), DriftSchedule(0.0, 1.0, t)(s), 1e-6);
  }
  for (double k1 : {-2.0, 0.0, 3.0, 200.0}) {
    const Envelope G(k1, 1.0, t);
    double previous = G(0.0);
    for (int i = 1; i <= 400; ++i) {
      const double value = G(t * i / 400.0);
      EXPECT_LE(value, previous + 1e-15);
      EXPECT_TRUE(std::isfinite(value));
      previous = value;
    }
  }
}

TEST(Schedule, Validation) {
  EXPECT_THROW(DriftSchedule(1.0, 1.0, 0.0), std::invalid_argument);
  EXPECT_THROW(Envelope(1.0, 1.0, -1.0), std::invalid_argument);
  EXPECT_THROW(Envelope(1.0, -1.0, 1.0), std::invalid_argument);
  const Vector a = Vector::Constant(1, 2.0), b = Vector::Constant(1, -1.0);
  EXPECT_NEAR(g_schedule(0.0, a, b, 3.0)(1.0), 1.0, 1e-15);
  EXPECT_NEAR(envelope(0.0, a, b, 3.0)(1.5), 1.5, 1e-15);
}

TEST(Coupling, IdenticalStartsAreTrivial) {
  const ModelSpec spec = linear();
  const double t = 0.5;
  const NoisePath noise = noise_for(spec, t, 0);
  const Segment xi = constant(spec, 0.7);
  const CouplingTrace trace = run_coupling(spec, xi, xi, t, noise);
  ASSERT_TRUE(trace.coupled());
  EXPECT_EQ(*trace.tau_index, 0);
  EXPECT_EQ(trace.density, 1.0);
  EXPECT_EQ(trace.log_density, 0.0);
  EXPECT_EQ(trace.h.norm(), 0.0);
  EXPECT_EQ(trace.x.states(), trace.y.states());
  EXPECT_EQ(novikov_exponent(trace, spec), 0.0);
  EXPECT_EQ(neutral_identity_check(trace), 0.0);
}

TEST(Coupling, DeterministicGapStaysUnderEnvelope) {
  const ModelSpec spec = linear(0.0);
  const double t = 1.0;
  const NoisePath noise = noise_for(spec, t, 0);
  CouplingOptions opts;
  opts.with_density = false;
  const CouplingTrace trace = run_coupling(spec, constant(spec, 1.0), constant(spec, 0.5), t, noise, opts);
  const auto& c = spec.constants();
  const double slack = 10.0 * kH * (c.lipschitz_z + c.lipschitz_b) * 0.5;
  EXPECT_LE(envelope_excess(trace), slack);
  EXPECT_LE(segment_gap_excess(trace), slack);
  ASSERT_TRUE(trace.coupled());
  EXPECT_LE(trace.tau, t + 1e-12);
  EXPECT_TRUE(pinned_after_tau(trace));
  EXPECT_TRUE(std::isnan(trace.density));
}

TEST(Coupling, AlwaysCoupledByHorizon) {
  for (const char* name : {"scalar_linear", "cubic", "ornstein"}) {
    const ModelSpec spec = builtin_model(name);
    const double h = 0.01;
    for (std::uint64_t trial = 0; trial < 20; ++trial) {
      const double t = 3.0 * spec.delay();
      const CouplingTrace trace = run_coupling(spec, constant(spec, 1.5, h), constant(spec, -1.0, h), t,
                                               noise_for(spec, t, trial, h));
      ASSERT_TRUE(trace.coupled()) << name;
      EXPECT_LE(trace.tau, t + 1e-12);
      EXPECT_TRUE(pinned_after_tau(trace));
      EXPECT_LE(trace.gap_at_tau, trace.tol);
      // Lambda vanishes from tau on, so the weight is spent by tau + r0.
      const Index m = spec.delay_intervals(h);
      for (Index k = *trace.tau_index + m + 1; k < trace.h.cols(); ++k) {
        EXPECT_LT(trace.h.col(k).norm(), 1e-12) << name << " k " << k;
      }
    }
  }
}

TEST(Coupling, YSolvesTheEquationUnderShiftedNoise) {
  // Y(t_{k+1}) = Y(t_k) + h F(Y_{t_k}) + sigma (dW_k + h sigma^{-1} h_k)
  const ModelSpec spec = linear();
  const double t = 0.6;
  const NoisePath noise = noise_for(spec, t, 4);
  const Segment xi = Segment::sample([](double th) { return Vector::Constant(1, 1.0 + th); }, 1,
                                     spec.delay_intervals(kH), kH);
  const CouplingTrace trace = run_coupling(spec, xi, constant(spec, -0.4), t, noise);
  const Matrix& inv = spec.sigma_inverse();
  for (Index k = 0; k < trace.y.steps(); ++k) {
    const SegmentView seg = trace.y.segment(k);
    const Vector predicted = seg.head() + kH * explicit_drift(spec, seg) +
                             spec.sigma() * (noise.increments.col(k) + kH * inv * trace.h.col(k));
    EXPECT_NEAR(predicted(0), trace.y.state(k + 1)(0), 1e-7) << "k " << k;
  }
}

TEST(Coupling, DensityHasUnitMean) {
  const ModelSpec spec = linear();
  const double t = 5.0 * spec.delay();
  const int trials = 4000;
  std::vector<double> r(trials);
  parallel_for(trials, 0, [&](std::size_t i) {
    r[i] = run_coupling(spec, constant(spec, 0.5), constant(spec, 0.0), t, noise_for(spec, t, i)).density;
  });
  const SampleMoments m = moments(r);
  EXPECT_NEAR(m.mean, 1.0, 4.0 * m.std_error);
  EXPECT_GT(m.std_error, 0.0);
}

TEST(Girsanov, ConstantWeightClosedForm) {
  const ModelSpec spec = builtin_model("scalar_linear", {{"sigma", 2.0}});
  const double t = 0.4;
  const NoisePath noise = noise_for(spec, t, 7);
  CouplingTrace trace = run_coupling(spec, constant(spec, 0.3), constant(spec, 0.3), t, noise);
  const double c = 0.8;
  trace.h.setConstant(c);
  const Index K = trace.x.steps();
  const double w = noise.increments.leftCols(K).sum();
  const double expected = -(c / 2.0) * w - 0.5 * (c / 2.0) * (c / 2.0) * kH * static_cast<double>(K);
  const DensityResult r = girsanov_density(trace, spec, noise);
  EXPECT_NEAR(r.log_density, expected, 1e-12);
  EXPECT_NEAR(r.density, std::exp(expected), 1e-12);
  EXPECT_NEAR(novikov_exponent(trace, spec), 0.5 * (c / 2.0) * (c / 2.0) * kH * static_cast<double>(K),
              1e-12);
}

TEST(Girsanov, SingularSigmaRejected) {
  const ModelSpec spec = linear(0.0);
  const double t = 0.4;
  const NoisePath noise = noise_for(spec, t, 0);
  const CouplingTrace trace = run_coupling(spec, constant(spec, 1.0), constant(spec, 0.0), t, noise);
  EXPECT_THROW(girsanov_density(trace, spec, noise), std::domain_error);
  EXPECT_THROW(novikov_exponent(trace, spec), std::domain_error);
}

TEST(Novikov, StableUnderRefinement) {
  const ModelSpec spec = linear();
  const double t = 0.6;
  auto exponent = [&](double h) {
    CouplingOptions opts;
    opts.with_density = false;
    const CouplingTrace tr = run_coupling(spec, constant(spec, 0.5, h), constant(spec, 0.0, h), t,
                                          noise_for(spec, t, 1, h), opts);
    return novikov_exponent(tr, spec);
  };
  const double coarse = exponent(0.004), fine = exponent(0.002);
  EXPECT_GT(coarse, 0.0);
  EXPECT_NEAR(fine / coarse, 1.0, 0.1);
}

TEST(NeutralIdentity, FirstOrderDefect) {
  const ModelSpec spec = builtin_model("scalar_linear", {{"sigma", 0.0}, {"kappa", 0.3}, {"a", 8.0}});
  auto defect = [&](double h) {
    const double t = 0.6;
    CouplingOptions opts;
    opts.with_density = false;
    const Segment xi = Segment::sample([](double th) { return Vector::Constant(1, std::cos(5.0 * th)); },
                                       1, spec.delay_intervals(h), h);
    return neutral_identity_check(
        run_coupling(spec, xi, constant(spec, 0.0, h), t, noise_for(spec, t, 0, h), opts));
  };
  const double coarse = defect(0.004), fine = defect(0.002);
  EXPECT_GT(coarse, 0.0);
  EXPECT_GE(coarse / fine, 1.8);
  EXPECT_LT(coarse, 0.05);
}

TEST(Coupling, Validation) {
  const ModelSpec spec = linear();
  const NoisePath noise = noise_for(spec, 1.0, 0);
  const Segment xi = constant(spec, 1.0);
  EXPECT_THROW(run_coupling(spec, xi, xi, 0.0, noise), std::invalid_argument);
  CouplingOptions bad;
  bad.tol = 0.0;
  EXPECT_THROW(run_coupling(spec, xi, xi, 0.5, noise, bad), std::invalid_argument);
  EXPECT_THROW(run_coupling(spec, xi, xi, 5.0, noise), GridError);
  EXPECT_THROW(run_coupling(spec, xi, Segment::constant(1.0, 50, 0.004), 0.5, noise), GridError);
}

}  // namespace
}  // namespace nfsde
