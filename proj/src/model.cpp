#include "nfsde/model.hpp"

#include "nfsde/noise.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nfsde {

ModelSpec::ModelSpec(std::string name, Index dim, double kappa, double delay, StateDrift z,
                     SegmentDrift b, Matrix sigma, HypothesisConstants constants,
                     std::map<std::string, double> parameters)
    : name_(std::move(name)),
      dim_(dim),
      kappa_(kappa),
      delay_(delay),
      z_(std::move(z)),
      b_(std::move(b)),
      sigma_(std::move(sigma)),
      constants_(constants),
      parameters_(std::move(parameters)) {
  if (dim_ < 1) throw std::invalid_argument("model dimension must be >= 1");
  if (!(kappa_ >= 0.0 && kappa_ < 1.0)) throw std::invalid_argument("kappa must lie in [0, 1)");
  if (!(delay_ > 0.0) || !std::isfinite(delay_)) throw std::invalid_argument("delay r0 must be > 0");
  if (!z_ || !b_) throw std::invalid_argument("coefficient functions Z and b are required");
  if (sigma_.rows() != dim_ || sigma_.cols() != dim_) {
    throw std::invalid_argument("sigma must be a dim x dim matrix");
  }
  if (!sigma_.allFinite()) throw std::invalid_argument("sigma must be finite");
  const auto& c = constants_;
  if (!(c.lipschitz_z >= 0.0) || !(c.lipschitz_b >= 0.0)) {
    throw std::invalid_argument("Lipschitz constants must be >= 0");
  }
  if (!(c.lambda2 > 0.0) || !(c.lambda1 > c.lambda2)) {
    throw std::invalid_argument("dissipativity constants need lambda1 > lambda2 > 0");
  }
  if (!std::isfinite(c.kappa1)) throw std::invalid_argument("kappa1 must be finite");

  Eigen::JacobiSVD<Matrix> svd(sigma_);
  const auto& sv = svd.singularValues();
  const double largest = sv.maxCoeff();
  const double smallest = sv.minCoeff();
  if (largest > 0.0 && smallest > largest * 1e-13) {
    sigma_condition_ = largest / smallest;
    sigma_inverse_ = sigma_.inverse();
  } else {
    sigma_condition_ = std::numeric_limits<double>::infinity();
  }
}

const Matrix& ModelSpec::sigma_inverse() const {
  if (!sigma_inverse_) throw std::domain_error("model '" + name_ + "' has a singular sigma");
  return *sigma_inverse_;
}

ModelSpec ModelSpec::with_linear(LinearCoefficients coefficients) const {
  for (const Matrix* m : {&coefficients.drift, &coefficients.delayed, &coefficients.present}) {
    if (m->rows() != dim_ || m->cols() != dim_) {
      throw std::invalid_argument("linear coefficients must be dim x dim");
    }
  }
  ModelSpec copy = *this;
  copy.linear_ = std::move(coefficients);
  return copy;
}

ConditionReport check_conditions(const ModelSpec& spec) {
  const double kappa = spec.kappa();
  const double r0 = spec.delay();
  const auto& c = spec.constants();
  ConditionReport report;
  report.rho = c.lambda1 / (1.0 + kappa);
  const double growth = std::exp(report.rho * r0);
  report.gate = 1.0 - kappa * r0 * r0 * growth;
  if (report.gate > 0.0) {
    report.lambda = report.rho - (kappa * r0 * r0 * c.lambda1 + c.lambda2) * growth /
                                     ((1.0 - kappa) * report.gate);
    report.feasible = *report.lambda > 0.0;
  }
  return report;
}

namespace {

Vector uniform_in_ball(Rng& rng, Index dim, double radius) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;
  Vector direction(dim);
  double norm = 0.0;
  do {
    for (Index i = 0; i < dim; ++i) direction(i) = normal(rng);
    norm = direction.norm();
  } while (norm == 0.0);
  const double r = radius * std::pow(unit(rng), 1.0 / static_cast<double>(dim));
  return direction * (r / norm);
}

/// Piecewise-linear path through random knots (endpoints included).
Matrix random_piecewise_linear(Rng& rng, Index dim, Index intervals, double radius) {
  std::uniform_int_distribution<int> knot_count(2, 6);
  const int knots = knot_count(rng);
  std::vector<double> positions(knots);
  std::uniform_real_distribution<double> unit;
  positions.front() = 0.0;
  positions.back() = 1.0;
  for (int i = 1; i + 1 < knots; ++i) positions[i] = unit(rng);
  std::sort(positions.begin(), positions.end());
  std::vector<Vector> values;
  for (int i = 0; i < knots; ++i) values.push_back(uniform_in_ball(rng, dim, radius));

  Matrix out(dim, intervals + 1);
  for (Index j = 0; j <= intervals; ++j) {
    const double s = static_cast<double>(j) / static_cast<double>(intervals);
    std::size_t i = 1;
    while (i + 1 < positions.size() && positions[i] < s) ++i;
    const double width = positions[i] - positions[i - 1];
    const double w = width > 0.0 ? (s - positions[i - 1]) / width : 1.0;
    out.col(j) = (1.0 - w) * values[i - 1] + w * values[i];
  }
  return out;
}

void record(VerifierReport& report, double margin, double scale) {
  if (report.samples == 0 || margin > report.worst_margin) report.worst_margin = margin;
  if (margin > 1e-9 * scale) ++report.violations;
  ++report.samples;
}

}  // namespace

VerifierReport verify_dissipativity(const ModelSpec& spec, std::int64_t sample_count, double radius,
                                    std::uint64_t seed) {
  if (sample_count < 1) throw std::invalid_argument("sample_count must be >= 1");
  if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");
  Rng rng = make_rng(seed, 0x44495353ULL);
  const double kappa1 = spec.constants().kappa1;
  VerifierReport report;
  for (std::int64_t s = 0; s < sample_count; ++s) {
    const Vector x = uniform_in_ball(rng, spec.dim(), radius);
    const Vector y = uniform_in_ball(rng, spec.dim(), radius);
    const Vector d = x - y;
    const double lhs = (spec.Z(x) - spec.Z(y)).dot(d);
    const double gap2 = d.squaredNorm();
    record(report, lhs + kappa1 * gap2, std::abs(lhs) + gap2);
  }
  return report;
}

VerifierReport verify_h2(const ModelSpec& spec, std::int64_t sample_count, double radius,
                         std::uint64_t seed, Index intervals) {
  if (sample_count < 1) throw std::invalid_argument("sample_count must be >= 1");
  if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");
  if (intervals < 1) throw std::invalid_argument("intervals must be >= 1");
  Rng rng = make_rng(seed, 0x48322020ULL);
  std::uniform_real_distribution<double> unit;
  const double h = spec.delay() / static_cast<double>(intervals);
  const auto& c = spec.constants();
  VerifierReport report;
  for (std::int64_t s = 0; s < sample_count; ++s) {
    const Segment xi(random_piecewise_linear(rng, spec.dim(), intervals, radius), h);
    Matrix eta_values;
    if (unit(rng) < 0.5) {
      eta_values = random_piecewise_linear(rng, spec.dim(), intervals, radius);
    } else {
      // Nearby pair: probes the local regime of the inequality.
      const double scale = radius * std::pow(10.0, -4.0 * unit(rng));
      eta_values = xi.values() + random_piecewise_linear(rng, spec.dim(), intervals, scale);
    }
    const Segment eta(std::move(eta_values), h);
    const Segment diff = difference(xi, eta);
    const Vector d0 = xi.head() - eta.head();
    const Vector drift = spec.Z(xi.head()) - spec.Z(eta.head()) + spec.b(xi) - spec.b(eta);
    const double lhs = 2.0 * drift.dot(d0 + neutral_L(diff, spec.kappa()));
    const double sup2 = std::pow(uniform_norm(diff), 2);
    const double head2 = d0.squaredNorm();
    const double rhs = c.lambda2 * sup2 - c.lambda1 * head2;
    record(report, lhs - rhs, std::abs(lhs) + sup2 + head2);
  }
  return report;
}

}  // namespace nfsde
