#include "nfsde/coupling.hpp"

#include "nfsde/stats.hpp"

#include <cmath>
#include <limits>

namespace nfsde {

DriftSchedule::DriftSchedule(double kappa1, double gap, double horizon)
    : kappa1_(kappa1), gap_(gap), t_(horizon) {
  if (!(horizon > 0.0)) throw std::invalid_argument("g schedule needs t > 0");
  if (!(gap >= 0.0)) throw std::invalid_argument("initial gap must be >= 0");
}

double DriftSchedule::operator()(double r) const {
  if (r < 0.0 || r > t_ || gap_ == 0.0) return 0.0;
  if (kappa1_ > kKappa1Epsilon) {
    return gap_ * 2.0 * kappa1_ * std::exp(kappa1_ * r - 2.0 * kappa1_ * t_) /
           -std::expm1(-2.0 * kappa1_ * t_);
  }
  if (kappa1_ < -kKappa1Epsilon) {
    return gap_ * 2.0 * kappa1_ * std::exp(kappa1_ * r) / std::expm1(2.0 * kappa1_ * t_);
  }
  return gap_ / t_;
}

Envelope::Envelope(double kappa1, double gap, double horizon)
    : kappa1_(kappa1), gap_(gap), t_(horizon) {
  if (!(horizon > 0.0)) throw std::invalid_argument("envelope needs t > 0");
  if (!(gap >= 0.0)) throw std::invalid_argument("initial gap must be >= 0");
}

double Envelope::operator()(double s) const {
  if (s >= t_) return 0.0;
  s = std::max(s, 0.0);
  if (kappa1_ > kKappa1Epsilon) {
    return gap_ * std::exp(-kappa1_ * s) * -std::expm1(-2.0 * kappa1_ * (t_ - s)) /
           -std::expm1(-2.0 * kappa1_ * t_);
  }
  if (kappa1_ < -kKappa1Epsilon) {
    return gap_ * std::exp(kappa1_ * s) * std::expm1(2.0 * kappa1_ * (t_ - s)) /
           std::expm1(2.0 * kappa1_ * t_);
  }
  return gap_ * (t_ - s) / t_;
}

DriftSchedule g_schedule(double kappa1, const Vector& xi0, const Vector& eta0, double t) {
  return DriftSchedule(kappa1, (xi0 - eta0).norm(), t);
}

Envelope envelope(double kappa1, const Vector& xi0, const Vector& eta0, double t) {
  return Envelope(kappa1, (xi0 - eta0).norm(), t);
}

CouplingTrace run_coupling(const ModelSpec& spec, const Segment& xi, const Segment& eta, double t,
                           const NoisePath& noise, const CouplingOptions& options) {
  if (xi.dim() != spec.dim() || eta.dim() != spec.dim() || noise.dim() != spec.dim()) {
    throw GridError("run_coupling: dimension mismatch");
  }
  if (xi.step() != eta.step() || xi.intervals() != eta.intervals() || noise.h != xi.step()) {
    throw GridError("run_coupling: xi, eta and noise must share one grid");
  }
  const double h = xi.step();
  const Index m = xi.intervals();
  if (spec.delay_intervals(h) != m) throw GridError("run_coupling: segments do not span r0");
  if (!(t > 0.0)) throw std::invalid_argument("run_coupling: t must be positive");
  const Index Kt = steps_for(t, h);
  const Index K = Kt + m;
  if (noise.steps() < K) throw GridError("run_coupling: noise shorter than t + r0");

  const Index n = spec.dim();
  const double gap0 = (xi.head() - eta.head()).norm();
  const double tol = options.tol.value_or(1e-8 * (1.0 + gap0));
  if (!(tol > 0.0)) throw std::invalid_argument("run_coupling: tol must be positive");
  const double kappa = spec.kappa();
  const DriftSchedule g(spec.constants().kappa1, gap0, t);
  const Envelope G(spec.constants().kappa1, gap0, t);

  Matrix xs(n, m + 1 + K);
  Matrix ys(n, m + 1 + K);
  xs.leftCols(m + 1) = xi.values();
  ys.leftCols(m + 1) = eta.values();

  CouplingTrace trace{Trajectory(Matrix(n, m + 1), m, h), Trajectory(Matrix(n, m + 1), m, h)};
  trace.t = t;
  trace.kappa = kappa;
  trace.tol = tol;
  trace.g_values.assign(K + 1, 0.0);
  trace.push.assign(K + 1, 0.0);
  trace.envelope.assign(K + 1, 0.0);
  trace.h1 = Matrix::Zero(n, K + 1);
  trace.h2 = Matrix::Zero(n, K + 1);
  trace.h3 = Matrix::Zero(n, K + 1);
  trace.h = Matrix::Zero(n, K + 1);
  trace.lambda = Matrix::Zero(n, K + 1);

  // Compensated running sum of Lambda over the window [t_k - r0, t_k).
  std::vector<NeumaierSum> window(static_cast<std::size_t>(n));
  bool coupled = false;
  bool snap_next = false;

  for (Index k = 0; k <= K; ++k) {
    const SegmentView seg_x(xs.col(k).data(), n, m, h);
    auto x_now = xs.col(k + m);
    auto y_now = ys.col(k + m);
    if (!coupled && (snap_next || (x_now - y_now).norm() <= tol)) {
      coupled = true;
      trace.tau_index = k;
      trace.gap_at_tau = (x_now - y_now).norm();
      y_now = x_now;
    }
    const SegmentView seg_y(ys.col(k).data(), n, m, h);
    const double t_k = static_cast<double>(k) * h;
    trace.envelope[k] = G(t_k);
    if (k <= Kt) trace.g_values[k] = g(t_k);

    const Vector z_x = spec.Z(x_now);
    const Vector z_y = spec.Z(y_now);
    Vector push = Vector::Zero(n);
    snap_next = false;
    if (!coupled && k < Kt) {
      const Vector diff = x_now - y_now;
      const Vector remaining = diff + h * (z_x - z_y);
      const double nominal = trace.g_values[k];
      if (k + 1 == Kt || h * nominal >= remaining.norm()) {
        push = remaining / h;
        snap_next = true;
      } else {
        push = nominal / diff.norm() * diff;
      }
    }
    trace.push[k] = push.norm();
    trace.lambda.col(k) = z_y - z_x + push;

    if (k <= m) {
      trace.h1.col(k) = xs.col(k) - ys.col(k) + y_now - x_now;
    } else {
      for (Index i = 0; i < n; ++i) trace.h2(i, k) = h * window[i].value();
    }
    trace.h3.col(k) = push + spec.b(seg_x) - spec.b(seg_y);
    trace.h.col(k) = kappa * (k <= m ? trace.h1.col(k) : trace.h2.col(k)) + trace.h3.col(k);

    for (Index i = 0; i < n; ++i) {
      window[i].add(trace.lambda(i, k));
      if (k >= m) window[i].add(-trace.lambda(i, k - m));
    }
    if (k == K) break;

    const auto dW = noise.increments.col(k);
    Vector neutral = Vector::Zero(n);
    if (kappa != 0.0) neutral = -kappa * (seg_x.head() - seg_x.tail());
    const Vector b_x = spec.b(seg_x);
    auto x_next = xs.col(k + m + 1);
    auto y_next = ys.col(k + m + 1);
    x_next = x_now + h * (neutral + z_x + b_x) + spec.sigma() * dW;
    if (coupled || snap_next) {
      y_next = x_next;
    } else {
      y_next = y_now + h * (neutral + z_y + b_x + push) + spec.sigma() * dW;
    }
    if (!x_next.allFinite() || !y_next.allFinite()) {
      throw NonFiniteState(k + 1, "run_coupling: state blew up");
    }
  }

  trace.tau = trace.tau_index ? static_cast<double>(*trace.tau_index) * h
                              : std::numeric_limits<double>::infinity();
  trace.x = Trajectory(std::move(xs), m, h);
  trace.y = Trajectory(std::move(ys), m, h);
  if (options.with_density && spec.sigma_invertible()) {
    const DensityResult r = girsanov_density(trace, spec, noise);
    trace.log_density = r.log_density;
    trace.density = r.density;
  } else {
    trace.log_density = std::numeric_limits<double>::quiet_NaN();
    trace.density = std::numeric_limits<double>::quiet_NaN();
  }
  return trace;
}

DensityResult girsanov_density(const CouplingTrace& trace, const ModelSpec& spec,
                               const NoisePath& noise) {
  const Matrix& inv = spec.sigma_inverse();
  const Index K = trace.x.steps();
  const double h = trace.x.step();
  if (noise.steps() < K) throw GridError("girsanov_density: noise shorter than the trace");
  NeumaierSum stochastic;
  NeumaierSum quadratic;
  for (Index k = 0; k < K; ++k) {
    const Vector u = inv * trace.h.col(k);
    stochastic.add(u.dot(noise.increments.col(k)));
    quadratic.add(u.squaredNorm() * h);
  }
  DensityResult r;
  r.log_density = -stochastic.value() - 0.5 * quadratic.value();
  r.density = std::exp(r.log_density);
  return r;
}

double novikov_exponent(const CouplingTrace& trace, const ModelSpec& spec) {
  const Matrix& inv = spec.sigma_inverse();
  const Index K = trace.x.steps();
  NeumaierSum quadratic;
  for (Index k = 0; k < K; ++k) quadratic.add((inv * trace.h.col(k)).squaredNorm());
  return 0.5 * trace.x.step() * quadratic.value();
}

double neutral_identity_check(const CouplingTrace& trace) {
  const Index K = trace.x.steps();
  const Index m = trace.x.delay_intervals();
  const double h = trace.x.step();
  const Matrix diff = trace.y.states() - trace.x.states();
  auto L_at = [&](Index k) -> Vector {
    const SegmentView seg(diff.col(k).data(), diff.rows(), m, h);
    return neutral_L(seg, trace.kappa);
  };
  double worst = 0.0;
  Vector previous = L_at(0);
  for (Index k = 0; k < K; ++k) {
    Vector next = L_at(k + 1);
    const Vector rate = (next - previous) / h;
    const Vector term = trace.kappa * (k <= m ? trace.h1.col(k) : trace.h2.col(k));
    worst = std::max(worst, (rate - term).norm());
    previous = std::move(next);
  }
  return worst;
}

double envelope_excess(const CouplingTrace& trace) {
  const double h = trace.x.step();
  const Index Kt = steps_for(trace.t, h);
  const Index last = trace.tau_index ? std::min(*trace.tau_index, Kt) : Kt;
  double worst = -std::numeric_limits<double>::infinity();
  for (Index k = 0; k <= last; ++k) {
    double gap = (trace.x.state(k) - trace.y.state(k)).norm();
    if (trace.tau_index && k == *trace.tau_index) gap = trace.gap_at_tau;
    worst = std::max(worst, gap - trace.envelope[k]);
  }
  return worst;
}

double segment_gap_excess(const CouplingTrace& trace) {
  const Index K = trace.x.steps();
  const Index m = trace.x.delay_intervals();
  const double initial = uniform_norm(difference(trace.x.segment(0), trace.y.segment(0)));
  double worst = -std::numeric_limits<double>::infinity();
  for (Index k = 0; k <= K; ++k) {
    const double sup = uniform_norm(difference(trace.x.segment(k), trace.y.segment(k)));
    const double bound = k <= m ? initial : trace.envelope[k - m];
    worst = std::max(worst, sup - bound);
  }
  return worst;
}

bool pinned_after_tau(const CouplingTrace& trace) {
  if (!trace.tau_index) return true;
  for (Index k = *trace.tau_index; k <= trace.x.steps(); ++k) {
    for (Index i = 0; i < trace.x.dim(); ++i) {
      if (trace.x.state(k)(i) != trace.y.state(k)(i)) return false;
    }
  }
  return true;
}

}  // namespace nfsde
