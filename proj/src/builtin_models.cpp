#include "nfsde/model.hpp"

#include <cmath>
#include <stdexcept>

namespace nfsde {
namespace {

ModelParameters merged(const std::string& model, const ModelParameters& given) {
  const ModelParameters* defaults = nullptr;
  for (const auto& info : builtin_models()) {
    if (info.name == model) defaults = &info.defaults;
  }
  ModelParameters out = *defaults;
  for (const auto& [key, value] : given) {
    if (!defaults->contains(key)) {
      throw std::invalid_argument("model '" + model + "' has no parameter '" + key + "'");
    }
    if (!std::isfinite(value)) {
      throw std::invalid_argument("model parameter '" + key + "' must be finite");
    }
    out[key] = value;
  }
  return out;
}

Index dimension_of(double value) {
  if (value < 1.0 || value != std::floor(value)) {
    throw std::invalid_argument("dim must be a positive integer");
  }
  return static_cast<Index>(value);
}

void require_ordered(const std::string& model, const HypothesisConstants& c) {
  if (!(c.lambda2 > 0.0) || !(c.lambda1 > c.lambda2)) {
    throw std::invalid_argument("parameters of '" + model +
                                "' give lambda1 = " + std::to_string(c.lambda1) +
                                ", lambda2 = " + std::to_string(c.lambda2) +
                                "; need lambda1 > lambda2 > 0");
  }
}

ModelSpec make_ornstein(const ModelParameters& given) {
  const ModelParameters p = merged("ornstein", given);
  const double a = p.at("a");
  const Index n = dimension_of(p.at("dim"));
  HypothesisConstants c;
  c.lipschitz_z = std::abs(a);
  c.lipschitz_b = 0.0;
  c.kappa1 = a;
  // -2a|x-y|^2 <= lambda2 ||xi-eta||^2 - 2a |xi(0)-eta(0)|^2 for every lambda2 >= 0.
  c.lambda1 = 2.0 * a;
  c.lambda2 = p.at("delta");
  require_ordered("ornstein", c);
  const Matrix identity = Matrix::Identity(n, n);
  return ModelSpec("ornstein", n, 0.0, p.at("r0"),
                   [a](const Vector& x) -> Vector { return -a * x; },
                   [n](SegmentView) -> Vector { return Vector::Zero(n); },
                   p.at("sigma") * identity, c, p)
      .with_linear({-a * identity, Matrix::Zero(n, n), Matrix::Zero(n, n)});
}

ModelSpec make_scalar_linear(const ModelParameters& given) {
  const ModelParameters p = merged("scalar_linear", given);
  const double a = p.at("a");
  const double beta = p.at("beta");
  const double kappa = p.at("kappa");
  const double r0 = p.at("r0");
  const double delta = p.at("delta");
  if (!(kappa >= 0.0 && kappa < 1.0)) throw std::invalid_argument("kappa must lie in [0, 1)");
  if (!(r0 > 0.0)) throw std::invalid_argument("r0 must be positive");
  // With d0 = xi(0)-eta(0), D = ||xi-eta||, |L(xi-eta)| <= kappa r0 D:
  // lhs <= -2a d0^2 + 2(a kappa r0 + |beta|)|d0| D + 2|beta| kappa r0 D^2
  //     <= -(2a - s) d0^2 + (s + 2|beta| kappa r0) D^2,  s = a kappa r0 + |beta|.
  const double s = std::abs(a) * kappa * r0 + std::abs(beta);
  HypothesisConstants c;
  c.lipschitz_z = std::abs(a);
  c.lipschitz_b = std::abs(beta);
  c.kappa1 = a;
  c.lambda1 = 2.0 * a - s - delta;
  c.lambda2 = s + 2.0 * std::abs(beta) * kappa * r0 + delta;
  require_ordered("scalar_linear", c);
  return ModelSpec("scalar_linear", 1, kappa, r0,
                   [a](const Vector& x) -> Vector { return -a * x; },
                   [beta](SegmentView seg) -> Vector { return beta * seg.tail(); },
                   p.at("sigma") * Matrix::Identity(1, 1), c, p)
      .with_linear({Matrix::Constant(1, 1, -a), Matrix::Constant(1, 1, beta), Matrix::Zero(1, 1)});
}

ModelSpec make_cubic(const ModelParameters& given) {
  const ModelParameters p = merged("cubic", given);
  const double a = p.at("a");
  const double kappa = p.at("kappa");
  const double r0 = p.at("r0");
  const double radius = p.at("radius");
  const Index n = dimension_of(p.at("dim"));
  if (!(kappa >= 0.0 && kappa < 1.0)) throw std::invalid_argument("kappa must lie in [0, 1)");
  if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");
  HypothesisConstants c;
  // Z is only locally Lipschitz; L1 is the constant on the ball of `radius`.
  c.lipschitz_z = std::abs(a) + 3.0 * radius * radius;
  c.lipschitz_b = 0.0;
  // x -> x^3 is monotone, so the cubic part never weakens dissipativity.
  c.kappa1 = a;
  const double cross = c.lipschitz_z * kappa * r0;
  c.lambda1 = 2.0 * a - cross;
  c.lambda2 = cross + p.at("delta");
  require_ordered("cubic", c);
  return ModelSpec(
      "cubic", n, kappa, r0,
      [a](const Vector& x) -> Vector { return -x.array().cube().matrix() - a * x; },
      [n](SegmentView) -> Vector { return Vector::Zero(n); },
      p.at("sigma") * Matrix::Identity(n, n), c, p);
}

}  // namespace

const std::vector<BuiltinModelInfo>& builtin_models() {
  static const std::vector<BuiltinModelInfo> registry = {
      {"cubic",
       "Z(x) = -x^3 - a x (componentwise), b = 0; L1 is local to the ball of `radius`",
       {{"a", 1.0}, {"kappa", 0.0}, {"r0", 0.5}, {"sigma", 1.0}, {"delta", 0.01},
        {"radius", 3.0}, {"dim", 1.0}}},
      {"ornstein", "Z(x) = -a x, b = 0, kappa = 0 (Ornstein-Uhlenbeck segment process)",
       {{"a", 1.0}, {"r0", 0.5}, {"sigma", 1.0}, {"delta", 0.01}, {"dim", 1.0}}},
      {"scalar_linear", "Z(x) = -a x, b(xi) = beta xi(-r0), scalar",
       {{"a", 6.0}, {"beta", 0.1}, {"kappa", 0.05}, {"r0", 0.2}, {"sigma", 1.0},
        {"delta", 0.05}}},
  };
  return registry;
}

ModelSpec builtin_model(const std::string& name, const ModelParameters& parameters) {
  if (name == "ornstein") return make_ornstein(parameters);
  if (name == "scalar_linear") return make_scalar_linear(parameters);
  if (name == "cubic") return make_cubic(parameters);
  throw std::invalid_argument("unknown built-in model '" + name + "'");
}

ModelSpec linear_model(std::string name, double kappa, double delay, Matrix drift, Matrix delayed,
                       Matrix present, Matrix sigma, HypothesisConstants constants) {
  const Index n = drift.rows();
  if (drift.cols() != n || delayed.rows() != n || delayed.cols() != n || present.rows() != n ||
      present.cols() != n) {
    throw std::invalid_argument("linear model coefficient matrices must all be dim x dim");
  }
  return ModelSpec(
             std::move(name), n, kappa, delay,
             [drift](const Vector& x) -> Vector { return drift * x; },
             [delayed, present](SegmentView seg) -> Vector {
               return delayed * seg.tail() + present * seg.head();
             },
             std::move(sigma), constants)
      .with_linear({drift, delayed, present});
}

}  // namespace nfsde
