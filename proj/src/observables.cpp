#include "nfsde/observables.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nfsde::observables {

Observable constant(double value) {
  return [value](SegmentView) { return value; };
}

Observable clipped_head() {
  return [](SegmentView seg) { return std::min(1.0, seg.head().norm()); };
}

Observable clipped_sup() {
  return [](SegmentView seg) { return std::min(1.0, uniform_norm(seg)); };
}

Observable clipped_tail() {
  return [](SegmentView seg) { return std::min(1.0, seg.tail().norm()); };
}

Observable gaussian_bump() {
  return [](SegmentView seg) { return std::exp(-seg.head().squaredNorm()); };
}

Observable logistic_head(double scale) {
  return [scale](SegmentView seg) { return 1.0 / (1.0 + std::exp(-scale * seg.head()(0))); };
}

Observable head_exceeds(double threshold) {
  return [threshold](SegmentView seg) { return seg.head().norm() > threshold ? 1.0 : 0.0; };
}

Observable cosine_head(double frequency) {
  return [frequency](SegmentView seg) {
    return 0.5 * (1.0 + std::cos(frequency * seg.head()(0)));
  };
}

namespace {

double param(const std::map<std::string, double>& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

}  // namespace

Observable by_name(const std::string& name, const std::map<std::string, double>& p) {
  if (name == "constant") return constant(param(p, "value", 1.0));
  if (name == "clipped_head") return clipped_head();
  if (name == "clipped_sup") return clipped_sup();
  if (name == "clipped_tail") return clipped_tail();
  if (name == "gaussian_bump") return gaussian_bump();
  if (name == "logistic_head") return logistic_head(param(p, "scale", 1.0));
  if (name == "head_exceeds") return head_exceeds(param(p, "threshold", 1.0));
  if (name == "cosine_head") return cosine_head(param(p, "frequency", 1.0));
  throw std::invalid_argument("unknown observable '" + name + "'");
}

const std::vector<std::string>& names() {
  static const std::vector<std::string> registry = {
      "clipped_head",  "clipped_sup",   "clipped_tail", "constant",
      "cosine_head",   "gaussian_bump", "head_exceeds", "logistic_head"};
  return registry;
}

}  // namespace nfsde::observables
