#pragma once

#include "nfsde/segment.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace nfsde {

/// Present-state drift Z: R^n -> R^n.
using StateDrift = std::function<Vector(const Vector&)>;
/// Functional drift b acting on the history window.
using SegmentDrift = std::function<Vector(SegmentView)>;

/// Declared constants of the Lipschitz and dissipativity hypotheses.
struct HypothesisConstants {
  double lipschitz_z = 0.0;  // L1
  double lipschitz_b = 0.0;  // L2, w.r.t. the uniform norm
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double kappa1 = 0.0;  // one-sided dissipativity of Z
};

/// Z(x) = drift x, b(xi) = delayed xi(-r0) + present xi(0).
struct LinearCoefficients {
  Matrix drift;
  Matrix delayed;
  Matrix present;
};

/// Coefficients of d{X(t) + L X_t} = {Z(X(t)) + b(X_t)} dt + sigma dW(t).
///
/// Immutable after construction; Z and b must be pure so the spec can be
/// shared between Monte Carlo workers. sigma may be singular (sigma = 0 is
/// allowed for deterministic runs); anything needing sigma^{-1} checks
/// `sigma_invertible()` first.
class ModelSpec {
 public:
  ModelSpec(std::string name, Index dim, double kappa, double delay, StateDrift z,
            SegmentDrift b, Matrix sigma, HypothesisConstants constants,
            std::map<std::string, double> parameters = {});

  const std::string& name() const { return name_; }
  Index dim() const { return dim_; }
  double kappa() const { return kappa_; }
  double delay() const { return delay_; }
  const Matrix& sigma() const { return sigma_; }
  const HypothesisConstants& constants() const { return constants_; }
  const std::map<std::string, double>& parameters() const { return parameters_; }

  Vector Z(const Vector& x) const { return z_(x); }
  Vector b(SegmentView seg) const { return b_(seg); }

  bool sigma_invertible() const { return sigma_inverse_.has_value(); }
  /// Throws std::domain_error when sigma is singular.
  const Matrix& sigma_inverse() const;
  /// 2-norm condition number; +inf when singular.
  double sigma_condition() const { return sigma_condition_; }

  /// Copy of this spec that also records an affine representation of Z and b.
  /// The caller guarantees the coefficients agree with the function handles.
  ModelSpec with_linear(LinearCoefficients coefficients) const;
  /// Present for models declared affine; enables noise-free difference paths.
  const std::optional<LinearCoefficients>& linear() const { return linear_; }

  /// Number of grid intervals spanning the delay for grid step h.
  Index delay_intervals(double h) const { return steps_for(delay_, h); }

 private:
  std::string name_;
  Index dim_;
  double kappa_;
  double delay_;
  StateDrift z_;
  SegmentDrift b_;
  Matrix sigma_;
  std::optional<Matrix> sigma_inverse_;
  double sigma_condition_;
  HypothesisConstants constants_;
  std::map<std::string, double> parameters_;
  std::optional<LinearCoefficients> linear_;
};

/// Feasibility of the rate condition and the certified rates.
struct ConditionReport {
  double rho = 0.0;
  double gate = 0.0;
  std::optional<double> lambda;  // only when gate > 0
  bool feasible = false;
};

/// rho = lambda1/(1+kappa), gate = 1 - kappa r0^2 e^{rho r0},
/// lambda = rho - (kappa r0^2 lambda1 + lambda2) e^{rho r0} / ((1-kappa) gate).
ConditionReport check_conditions(const ModelSpec& spec);

struct VerifierReport {
  std::int64_t samples = 0;
  std::int64_t violations = 0;
  /// Largest observed lhs - rhs (negative when every sample has room).
  double worst_margin = 0.0;
};

/// Samples pairs in the ball of `radius` and tests
/// <Z(x)-Z(y), x-y> <= -kappa1 |x-y|^2 with relative slack 1e-9.
VerifierReport verify_dissipativity(const ModelSpec& spec, std::int64_t sample_count, double radius,
                                    std::uint64_t seed = 1);

/// Samples pairs of random piecewise-linear segments bounded by `radius` on a
/// grid of `intervals` steps across the delay and tests the segment dissipativity inequality
/// 2<Z(xi(0))-Z(eta(0)) + b(xi)-b(eta), xi(0)-eta(0) + L(xi-eta)>
///   <= lambda2 ||xi-eta||^2 - lambda1 |xi(0)-eta(0)|^2.
VerifierReport verify_h2(const ModelSpec& spec, std::int64_t sample_count, double radius,
                         std::uint64_t seed = 1, Index intervals = 20);

using ModelParameters = std::map<std::string, double>;

/// Built-in fixtures: "ornstein", "scalar_linear", "cubic".
ModelSpec builtin_model(const std::string& name, const ModelParameters& parameters = {});

struct BuiltinModelInfo {
  std::string name;
  std::string summary;
  ModelParameters defaults;
};

/// Registry of built-in models in stable (alphabetical) order.
const std::vector<BuiltinModelInfo>& builtin_models();

/// Linear model Z(x) = A x, b(xi) = B xi(-r0) + C xi(0) with user-declared
/// hypothesis constants; used for inline coefficient tables.
ModelSpec linear_model(std::string name, double kappa, double delay, Matrix drift, Matrix delayed,
                       Matrix present, Matrix sigma, HypothesisConstants constants);

}  // namespace nfsde
