#include "nfsde/stats.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace nfsde {
namespace {

TEST(Moments, SmallSample) {
  const std::vector<double> v = {1.0, 2.0, 3.0, 4.0};
  const SampleMoments m = moments(v);
  EXPECT_EQ(m.count, 4u);
  EXPECT_DOUBLE_EQ(m.mean, 2.5);
  EXPECT_DOUBLE_EQ(m.variance, 5.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.std_error, std::sqrt(5.0 / 12.0));
}

TEST(Moments, DegenerateSizes) {
  EXPECT_EQ(moments(std::vector<double>{}).count, 0u);
  const SampleMoments one = moments(std::vector<double>{7.0});
  EXPECT_EQ(one.mean, 7.0);
  EXPECT_EQ(one.variance, 0.0);
}

TEST(Moments, CompensatedSum) {
  std::vector<double> v = {1e16};
  for (int i = 0; i < 1000; ++i) v.push_back(1.0);
  v.push_back(-1e16);
  EXPECT_DOUBLE_EQ(moments(v).mean * static_cast<double>(v.size()), 1000.0);
}

TEST(FitLine, ExactLine) {
  const std::vector<double> x = {0.0, 1.0, 2.0, 3.0};
  const std::vector<double> y = {1.0, -1.0, -3.0, -5.0};
  const auto fit = fit_line(x, y);
  ASSERT_TRUE(fit.has_value());
  EXPECT_NEAR(fit->slope, -2.0, 1e-14);
  EXPECT_NEAR(fit->intercept, 1.0, 1e-14);
  EXPECT_NEAR(fit->slope_std_error, 0.0, 1e-14);
}

TEST(FitLine, KnownResiduals) {
  // y = x + (+1, -1, -1, +1): slope 1 exactly, rss 4, sxx 5
  const std::vector<double> x = {0.0, 1.0, 2.0, 3.0};
  const std::vector<double> y = {1.0, 0.0, 1.0, 4.0};
  const auto fit = fit_line(x, y);
  ASSERT_TRUE(fit.has_value());
  EXPECT_NEAR(fit->slope, 1.0, 1e-14);
  EXPECT_NEAR(fit->intercept, 0.0, 1e-14);
  EXPECT_NEAR(fit->slope_std_error, std::sqrt(4.0 / 2.0 / 5.0), 1e-14);
}

TEST(FitLine, Degenerate) {
  EXPECT_FALSE(fit_line(std::vector<double>{1.0}, std::vector<double>{1.0}).has_value());
  EXPECT_FALSE(fit_line(std::vector<double>{1.0, 1.0}, std::vector<double>{1.0, 2.0}).has_value());
  EXPECT_THROW(fit_line(std::vector<double>{1.0, 2.0}, std::vector<double>{1.0}), std::invalid_argument);
}

TEST(Spearman, ExactPermutationTail) {
  const std::vector<double> x = {1, 2, 3, 4, 5, 6};
  const std::vector<double> down = {6, 5, 4, 3, 2, 1};
  const TrendTest strict = spearman_decreasing(x, down);
  EXPECT_NEAR(strict.rho, -1.0, 1e-14);
  EXPECT_NEAR(strict.p_value, 1.0 / 720.0, 1e-15);
  const TrendTest up = spearman_decreasing(x, x);
  EXPECT_NEAR(up.rho, 1.0, 1e-14);
  EXPECT_NEAR(up.p_value, 1.0, 1e-15);
  // one adjacent swap: rho = 1 - 6*2/(6*35); permutations at least as extreme are
  // the identity reversal plus the five single adjacent swaps of it
  const std::vector<double> swapped = {6, 5, 4, 3, 1, 2};
  const TrendTest near = spearman_decreasing(x, swapped);
  EXPECT_NEAR(near.rho, -1.0 + 12.0 / 210.0, 1e-14);
  EXPECT_NEAR(near.p_value, 6.0 / 720.0, 1e-15);
}

// Reference values from scipy.stats.spearmanr and scipy.stats.t.cdf.
TEST(Spearman, StudentApproximationAboveNine) {
  const std::vector<double> x = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  const std::vector<double> y1 = {12, 10, 11, 9, 7, 8, 6, 5, 3, 4, 2, 1};
  const TrendTest a = spearman_decreasing(x, y1);
  EXPECT_NEAR(a.rho, -0.9790209790209792, 1e-13);
  EXPECT_NEAR(a.p_value / 1.5449006992743506e-08, 1.0, 1e-8);
  const std::vector<double> y2 = {3, 1, 4, 1.5, 5, 9, 2, 6, 5.5, 3.5, 8, 7};
  const TrendTest b = spearman_decreasing(x, y2);
  EXPECT_NEAR(b.rho, 0.6153846153846154, 1e-13);
  EXPECT_NEAR(b.p_value, 0.9834150494549471, 1e-10);
}

TEST(Spearman, TooShortIsUninformative) {
  const std::vector<double> x = {1, 2};
  EXPECT_EQ(spearman_decreasing(x, x).p_value, 1.0);
}

TEST(TopShare, Values) {
  std::vector<double> v(100, 1.0);
  EXPECT_NEAR(top_share(v, 0.01), 0.01, 1e-15);
  v[42] = 199.0;
  EXPECT_NEAR(top_share(v, 0.01), 199.0 / 298.0, 1e-15);
  EXPECT_NEAR(top_share(std::vector<double>(10, 1.0), 0.01), 0.1, 1e-15);  // ceil(0.1) = 1
  EXPECT_EQ(top_share(std::vector<double>{}, 0.01), 0.0);
}

TEST(ParallelFor, SlotsAreSchedulingIndependent) {
  const std::size_t n = 10000;
  auto run = [&](unsigned workers) {
    std::vector<double> out(n);
    parallel_for(n, workers, [&](std::size_t i) { out[i] = std::sin(static_cast<double>(i)); });
    return out;
  };
  const auto serial = run(1);
  EXPECT_EQ(serial, run(4));
  EXPECT_EQ(serial, run(0));
  EXPECT_EQ(serial, run(64));
}

TEST(ParallelFor, PropagatesExceptions) {
  EXPECT_THROW(parallel_for(100, 4,
                            [](std::size_t i) {
                              if (i == 37) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
  EXPECT_THROW(parallel_for(3, 1, [](std::size_t) { throw std::logic_error("x"); }), std::logic_error);
  EXPECT_NO_THROW(parallel_for(0, 4, [](std::size_t) { throw std::logic_error("never"); }));
  EXPECT_GE(default_workers(), 1u);
}

}  // namespace
}  // namespace nfsde
