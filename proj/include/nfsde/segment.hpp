#pragma once

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>

namespace nfsde {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised when a time, step or delay does not sit on the simulation grid.
class GridError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Number of grid steps of size `step` covering `span`; throws GridError if
/// `span` is not an integer multiple of `step` (relative tolerance 1e-9).
Index steps_for(double span, double step);

/// Nearest grid node time to `t`.
double snap_to_grid(double t, double step);

/// Non-owning, read-only view of a history window on the uniform grid
/// theta_j = -r0 + j*h, j = 0..m. Column j holds the state at theta_j.
class SegmentView {
 public:
  using Values = Eigen::Map<const Matrix>;

  SegmentView(const double* data, Index dim, Index intervals, double step)
      : values_(data, dim, intervals + 1), step_(step) {}

  const Values& values() const { return values_; }
  Index dim() const { return values_.rows(); }
  Index intervals() const { return values_.cols() - 1; }
  Index nodes() const { return values_.cols(); }
  double step() const { return step_; }
  double delay() const { return static_cast<double>(intervals()) * step_; }

  /// State at theta_j.
  auto node(Index j) const { return values_.col(j); }
  /// phi(0), the most recent value.
  auto head() const { return values_.col(intervals()); }
  /// phi(-r0), the oldest value.
  auto tail() const { return values_.col(0); }

 private:
  Values values_;
  double step_;
};

/// Owning segment: an immutable value once constructed.
class Segment {
 public:
  /// `values` is dim x (m+1); m >= 1, dim >= 1, step > 0.
  Segment(Matrix values, double step);

  static Segment constant(const Vector& value, Index intervals, double step);
  static Segment constant(double value, Index intervals, double step);
  /// Samples `fn(theta)` at the grid nodes of [-m*step, 0].
  static Segment sample(const std::function<Vector(double)>& fn, Index dim,
                        Index intervals, double step);

  SegmentView view() const { return {values_.data(), values_.rows(), values_.cols() - 1, step_}; }
  operator SegmentView() const { return view(); }  // NOLINT(google-explicit-constructor)

  const Matrix& values() const { return values_; }
  Index dim() const { return values_.rows(); }
  Index intervals() const { return values_.cols() - 1; }
  double step() const { return step_; }
  double delay() const { return static_cast<double>(intervals()) * step_; }
  auto head() const { return values_.col(values_.cols() - 1); }
  auto tail() const { return values_.col(0); }

 private:
  Matrix values_;
  double step_;
};

/// Grid maximum of the Euclidean norm of the nodes.
double uniform_norm(SegmentView seg);

/// kappa times the composite-trapezoid integral of the segment over [-r0, 0].
Vector neutral_L(SegmentView seg, double kappa);

/// Drops node 0, shifts the rest left and stores `value` at theta = 0.
Segment shift_append(SegmentView seg, const Vector& value);

/// Node-wise difference of two segments on the same grid.
Segment difference(SegmentView a, SegmentView b);

}  // namespace nfsde
