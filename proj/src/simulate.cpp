#include "nfsde/simulate.hpp"

#include <cmath>

namespace nfsde {

Trajectory::Trajectory(Matrix states, Index delay_intervals, double step)
    : states_(std::move(states)), m_(delay_intervals), h_(step) {
  if (m_ < 1 || states_.cols() < m_ + 1) {
    throw std::invalid_argument("trajectory must contain its initial segment");
  }
}

SegmentView Trajectory::segment(Index k) const {
  if (k < 0 || k > steps()) throw std::out_of_range("segment index outside [0, K]");
  return {states_.col(k).data(), dim(), m_, h_};
}

Vector explicit_drift(const ModelSpec& spec, SegmentView seg) {
  Vector drift = spec.Z(seg.head()) + spec.b(seg);
  if (spec.kappa() != 0.0) drift -= spec.kappa() * (seg.head() - seg.tail());
  return drift;
}

namespace {

void check_grid(const ModelSpec& spec, const Segment& initial, const NoisePath& noise) {
  if (initial.dim() != spec.dim() || noise.dim() != spec.dim()) {
    throw GridError("dimension mismatch between model, initial segment and noise");
  }
  if (noise.h != initial.step()) throw GridError("noise step differs from the segment grid step");
  if (spec.delay_intervals(initial.step()) != initial.intervals()) {
    throw GridError("initial segment does not span the model delay r0");
  }
}

}  // namespace

Trajectory integrate(const ModelSpec& spec, const Segment& initial, double horizon,
                     const NoisePath& noise, const IntegrateOptions& options) {
  check_grid(spec, initial, noise);
  const double h = initial.step();
  const Index m = initial.intervals();
  const Index K = steps_for(horizon, h);
  if (options.noise_offset < 0 || options.noise_offset + K > noise.steps()) {
    throw GridError("noise path too short for the requested horizon");
  }

  Matrix states(spec.dim(), m + 1 + K);
  states.leftCols(m + 1) = initial.values();
  std::optional<Matrix> gamma;
  if (options.record_gamma) gamma.emplace(spec.dim(), K + 1);

  for (Index k = 0; k <= K; ++k) {
    const SegmentView seg(states.col(k).data(), spec.dim(), m, h);
    if (gamma) gamma->col(k) = seg.head() + neutral_L(seg, spec.kappa());
    if (k == K) break;
    auto next = states.col(k + m + 1);
    next = seg.head() + h * explicit_drift(spec, seg) +
           spec.sigma() * noise.increments.col(options.noise_offset + k);
    if (!next.allFinite()) {
      throw NonFiniteState(k + 1, "integrate: state blew up");
    }
  }
  Trajectory traj(std::move(states), m, h);
  if (gamma) traj.set_gamma(std::move(*gamma));
  return traj;
}

Trajectory synchronous_difference(const ModelSpec& spec, const Segment& xi, const Segment& eta,
                                  double horizon) {
  if (!spec.linear()) {
    throw std::invalid_argument("synchronous_difference needs an affine model");
  }
  if (xi.dim() != spec.dim() || eta.dim() != spec.dim()) {
    throw GridError("dimension mismatch between model and initial segments");
  }
  if (xi.step() != eta.step() || xi.intervals() != eta.intervals()) {
    throw GridError("xi and eta must share one grid");
  }
  const double h = xi.step();
  const Index m = xi.intervals();
  if (spec.delay_intervals(h) != m) throw GridError("initial segment does not span r0");
  const Index K = steps_for(horizon, h);
  const auto& lin = *spec.linear();
  const Matrix present = lin.drift + lin.present;
  const double kappa = spec.kappa();

  Matrix d(spec.dim(), m + 1 + K);
  d.leftCols(m + 1) = xi.values() - eta.values();
  for (Index k = 0; k < K; ++k) {
    const auto now = d.col(k + m);
    const auto past = d.col(k);
    d.col(k + m + 1) = now + h * (-kappa * (now - past) + present * now + lin.delayed * past);
    if (!d.col(k + m + 1).allFinite()) throw NonFiniteState(k + 1, "synchronous_difference");
  }
  return Trajectory(std::move(d), m, h);
}

double gamma_consistency(const Trajectory& traj, const ModelSpec& spec, const NoisePath& noise,
                         Index noise_offset) {
  const Index K = traj.steps();
  const double h = traj.step();
  auto gamma_at = [&](Index k) -> Vector {
    if (traj.gamma()) return traj.gamma()->col(k);
    const SegmentView seg = traj.segment(k);
    return seg.head() + neutral_L(seg, spec.kappa());
  };
  const Vector gamma0 = gamma_at(0);
  Vector accumulated = Vector::Zero(traj.dim());
  double worst = 0.0;
  for (Index k = 1; k <= K; ++k) {
    const SegmentView seg = traj.segment(k - 1);
    accumulated += h * (spec.Z(seg.head()) + spec.b(seg)) +
                   spec.sigma() * noise.increments.col(noise_offset + k - 1);
    worst = std::max(worst, (gamma_at(k) - gamma0 - accumulated).norm());
  }
  return worst;
}

}  // namespace nfsde
