#pragma once

#include "nfsde/model.hpp"
#include "nfsde/noise.hpp"
#include "nfsde/segment.hpp"

#include <optional>
#include <stdexcept>
#include <string>

namespace nfsde {

/// A state became NaN or infinite; `step()` is the index k of the first
/// offending grid time t_k.
class NonFiniteState : public std::runtime_error {
 public:
  NonFiniteState(Index step, const std::string& what)
      : std::runtime_error(what + " (first non-finite state at step " + std::to_string(step) + ")"),
        step_(step) {}
  Index step() const { return step_; }

 private:
  Index step_;
};

/// Path X(t_k) on the grid t_k = k h, k = -m..K. Column k + m of `states`
/// holds X(t_k); the first m + 1 columns are the initial segment.
class Trajectory {
 public:
  Trajectory(Matrix states, Index delay_intervals, double step);

  Index dim() const { return states_.rows(); }
  Index delay_intervals() const { return m_; }
  /// K, the number of steps taken after t = 0.
  Index steps() const { return states_.cols() - 1 - m_; }
  double step() const { return h_; }
  double time(Index k) const { return static_cast<double>(k) * h_; }
  double horizon() const { return time(steps()); }

  auto state(Index k) const { return states_.col(k + m_); }
  auto state(Index k) { return states_.col(k + m_); }
  /// Segment X_{t_k} for 0 <= k <= K.
  SegmentView segment(Index k) const;
  Segment segment_copy(Index k) const { return Segment(segment(k).values(), h_); }

  const Matrix& states() const { return states_; }

  /// Gamma(t_k) = X(t_k) + L X_{t_k}, columns k = 0..K, when recorded.
  const std::optional<Matrix>& gamma() const { return gamma_; }
  void set_gamma(Matrix gamma) { gamma_ = std::move(gamma); }

 private:
  Matrix states_;
  Index m_;
  double h_;
  std::optional<Matrix> gamma_;
};

struct IntegrateOptions {
  /// Index of the first noise increment to use.
  Index noise_offset = 0;
  bool record_gamma = false;
};

/// Drift of the explicit form of the neutral equation,
/// -kappa (phi(0) - phi(-r0)) + Z(phi(0)) + b(phi), using
/// d(L X_t)/dt = kappa (X(t) - X(t - r0)).
Vector explicit_drift(const ModelSpec& spec, SegmentView seg);

/// Euler-Maruyama on [0, horizon] from `initial`.
/// Throws GridError on grid mismatch and NonFiniteState on blow-up.
Trajectory integrate(const ModelSpec& spec, const Segment& initial, double horizon,
                     const NoisePath& noise, const IntegrateOptions& options = {});

/// Difference X(xi) - X(eta) of two synchronously driven paths of an affine
/// model, integrated directly as the noise-free delay equation it solves.
/// Agrees with subtracting two `integrate` runs up to round-off and does not
/// depend on the noise at all. Throws std::invalid_argument for non-affine specs.
Trajectory synchronous_difference(const ModelSpec& spec, const Segment& xi, const Segment& eta,
                                  double horizon);

/// Max over k of |Gamma(t_k) - Gamma(0) - sum_{j<k} (h [Z(X_j) + b(X_{t_j})] + sigma dW_j)|.
/// The defect is O(h) uniformly on [0, T].
double gamma_consistency(const Trajectory& traj, const ModelSpec& spec, const NoisePath& noise,
                         Index noise_offset = 0);

}  // namespace nfsde
