#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace nfsde {

/// Neumaier-compensated summation; result independent of how partial
/// sums would have been grouped, to within one rounding.
class NeumaierSum {
 public:
  void add(double x);
  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

struct SampleMoments {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;   // unbiased sample variance (0 when count < 2)
  double std_error = 0.0;  // sqrt(variance / count)
};

SampleMoments moments(std::span<const double> samples);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_std_error = 0.0;
};

/// Ordinary least squares y = intercept + slope x; needs >= 2 distinct x.
std::optional<LineFit> fit_line(std::span<const double> x, std::span<const double> y);

struct TrendTest {
  double rho = 0.0;      // Spearman rank correlation
  double p_value = 1.0;  // one-sided, H1: decreasing
};

/// Spearman test for a decreasing trend of y in x. Exact permutation
/// distribution for n <= 9, t-approximation above.
TrendTest spearman_decreasing(std::span<const double> x, std::span<const double> y);

/// Share of the total contributed by the largest ceil(fraction * n) samples.
double top_share(std::span<const double> samples, double fraction);

/// Runs body(i) for i in [0, count) on `workers` threads. Results must be
/// written to per-index slots so the outcome does not depend on scheduling.
void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& body);

/// Worker count to use when the caller passes 0.
unsigned default_workers();

}  // namespace nfsde
