#include "nfsde/segment.hpp"

#include <cmath>
#include <string>

namespace nfsde {

Index steps_for(double span, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw GridError("grid step must be positive and finite");
  }
  if (span < 0.0 || !std::isfinite(span)) {
    throw GridError("span must be nonnegative and finite");
  }
  const double ratio = span / step;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
    throw GridError("span " + std::to_string(span) + " is not a multiple of step " +
                    std::to_string(step));
  }
  return static_cast<Index>(rounded);
}

double snap_to_grid(double t, double step) {
  return std::round(t / step) * step;
}

Segment::Segment(Matrix values, double step) : values_(std::move(values)), step_(step) {
  if (values_.rows() < 1) throw std::invalid_argument("segment dimension must be >= 1");
  if (values_.cols() < 2) throw std::invalid_argument("segment needs at least two nodes (m >= 1)");
  if (!(step_ > 0.0) || !std::isfinite(step_)) {
    throw std::invalid_argument("segment grid step must be positive");
  }
}

Segment Segment::constant(const Vector& value, Index intervals, double step) {
  Matrix values(value.size(), intervals + 1);
  values.colwise() = value;
  return Segment(std::move(values), step);
}

Segment Segment::constant(double value, Index intervals, double step) {
  return constant(Vector::Constant(1, value), intervals, step);
}

Segment Segment::sample(const std::function<Vector(double)>& fn, Index dim, Index intervals,
                        double step) {
  Matrix values(dim, intervals + 1);
  for (Index j = 0; j <= intervals; ++j) {
    const double theta = static_cast<double>(j - intervals) * step;
    Vector v = fn(theta);
    if (v.size() != dim) throw std::invalid_argument("sampled value has wrong dimension");
    values.col(j) = v;
  }
  return Segment(std::move(values), step);
}

double uniform_norm(SegmentView seg) {
  return seg.values().colwise().stableNorm().maxCoeff();
}

Vector neutral_L(SegmentView seg, double kappa) {
  if (!(kappa >= 0.0 && kappa < 1.0)) {
    throw std::invalid_argument("neutral weight kappa must lie in [0, 1)");
  }
  const auto& v = seg.values();
  const Index m = seg.intervals();
  Vector integral = 0.5 * (v.col(0) + v.col(m));
  for (Index j = 1; j < m; ++j) integral += v.col(j);
  return kappa * seg.step() * integral;
}

Segment shift_append(SegmentView seg, const Vector& value) {
  if (value.size() != seg.dim()) {
    throw std::invalid_argument("shift_append: dimension mismatch");
  }
  const Index m = seg.intervals();
  Matrix values(seg.dim(), m + 1);
  values.leftCols(m) = seg.values().rightCols(m);
  values.col(m) = value;
  return Segment(std::move(values), seg.step());
}

Segment difference(SegmentView a, SegmentView b) {
  if (a.dim() != b.dim() || a.intervals() != b.intervals() || a.step() != b.step()) {
    throw GridError("segments live on different grids");
  }
  return Segment(a.values() - b.values(), a.step());
}

}  // namespace nfsde
