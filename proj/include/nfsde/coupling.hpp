#pragma once

#include "nfsde/model.hpp"
#include "nfsde/noise.hpp"
#include "nfsde/simulate.hpp"

#include <optional>
#include <vector>

namespace nfsde {

/// Threshold below which kappa1 is treated as zero in the closed forms.
inline constexpr double kKappa1Epsilon = 1e-8;

/// Drift schedule g(r) = |xi(0)-eta(0)| e^{kappa1 r} / int_0^t e^{2 kappa1 u} du
/// on [0, t], extended by zero beyond t. Evaluated in overflow-safe form.
class DriftSchedule {
 public:
  DriftSchedule(double kappa1, double gap, double horizon);
  double operator()(double r) const;
  double gap() const { return gap_; }
  double horizon() const { return t_; }

 private:
  double kappa1_;
  double gap_;
  double t_;
};

/// Envelope G(s) = |xi(0)-eta(0)| (e^{2 kappa1 t - kappa1 s} - e^{kappa1 s}) / (e^{2 kappa1 t} - 1)
/// on [0, t]: G(0) = gap, G(t) = 0, nonincreasing; zero beyond t.
class Envelope {
 public:
  Envelope(double kappa1, double gap, double horizon);
  double operator()(double s) const;

 private:
  double kappa1_;
  double gap_;
  double t_;
};

DriftSchedule g_schedule(double kappa1, const Vector& xi0, const Vector& eta0, double t);
Envelope envelope(double kappa1, const Vector& xi0, const Vector& eta0, double t);

/// Paired paths of the coupling by change of measure and the quantities
/// of its Girsanov reweighting. Grid vectors are indexed by k = 0..K with
/// K = (t + r0)/h; the "left-point" quantities at k drive step k -> k+1.
struct CouplingTrace {
  Trajectory x;
  Trajectory y;
  double t = 0.0;        // coupling horizon (g is active on [0, t])
  double kappa = 0.0;    // neutral weight used for the h-decomposition
  double tol = 0.0;
  std::optional<Index> tau_index;  // first k with |X - Y| <= tol
  double tau = 0.0;                // tau_index * h, or +inf when never coupled
  double gap_at_tau = 0.0;         // |X - Y| at tau before Y is pinned to X

  std::vector<double> g_values;   // nominal g(t_k), zero for t_k > t
  std::vector<double> push;       // realized |push| applied at step k
  std::vector<double> envelope;   // G(t_k), zero for t_k > t
  Matrix h1;     // xi(t_k - r0) - eta(t_k - r0) + Y(t_k) - X(t_k), k <= m (else 0)
  Matrix h2;     // int_{t_k - r0}^{t_k} Lambda(u) du, k > m (else 0)
  Matrix h3;     // push_k + b(X_{t_k}) - b(Y_{t_k})
  Matrix h;      // kappa (h1 1_{[0,r0]} + h2 1_{(r0,t+r0]}) + h3
  Matrix lambda; // Lambda(t_k) = Z(Y) - Z(X) + push
  double log_density = 0.0;
  double density = 1.0;

  bool coupled() const { return tau_index.has_value(); }
};

struct CouplingOptions {
  /// Coupling threshold; defaults to 1e-8 (1 + |xi(0) - eta(0)|).
  std::optional<double> tol;
  /// Compute log_density/density; requires an invertible sigma.
  bool with_density = true;
};

/// Runs X from xi and Y from eta on [0, t + r0] with the same noise.
/// Y follows d{Y + L X_s} = {Z(Y) + b(X_s) + g 1_{[0,tau)} (X-Y)/|X-Y|} ds + sigma dW.
/// The push of step k is the full remaining deterministic gap whenever
/// h g(t_k) reaches it, and on the step that ends at t; Y is pinned to X
/// from tau on.
CouplingTrace run_coupling(const ModelSpec& spec, const Segment& xi, const Segment& eta, double t,
                           const NoisePath& noise, const CouplingOptions& options = {});

struct DensityResult {
  double log_density = 0.0;
  double density = 1.0;
};

/// R = exp[-sum <sigma^{-1} h_k, dW_k> - 1/2 sum |sigma^{-1} h_k|^2 h] over
/// k = 0..K-1 (left-endpoint sums). Throws std::domain_error if sigma is
/// singular.
DensityResult girsanov_density(const CouplingTrace& trace, const ModelSpec& spec,
                               const NoisePath& noise);

/// 1/2 int_0^{t+r0} |sigma^{-1} h(s)|^2 ds (left Riemann sum).
double novikov_exponent(const CouplingTrace& trace, const ModelSpec& spec);

/// Max over k of |[L(Y-X)_{t_{k+1}} - L(Y-X)_{t_k}]/h - kappa (h1 or h2)(t_k)|; O(h).
double neutral_identity_check(const CouplingTrace& trace);

/// Max over grid s <= tau (or s <= t if uncoupled) of |X(s) - Y(s)| - G(s).
double envelope_excess(const CouplingTrace& trace);

/// Max over k of ||X_{t_k} - Y_{t_k}|| minus its bound: ||xi - eta|| on
/// [0, r0] and G(t_k - r0) on (r0, t + r0].
double segment_gap_excess(const CouplingTrace& trace);

/// True when Y equals X bit-for-bit at every grid time >= tau.
bool pinned_after_tau(const CouplingTrace& trace);

}  // namespace nfsde
