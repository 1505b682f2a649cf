#pragma once

#include "nfsde/segment.hpp"

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace nfsde {

/// Bounded test function on segment space.
using Observable = std::function<double(SegmentView)>;

struct NamedObservable {
  std::string name;
  Observable fn;
};

namespace observables {

Observable constant(double value);
/// 1 ^ |phi(0)|
Observable clipped_head();
/// 1 ^ ||phi||_inf
Observable clipped_sup();
/// 1 ^ |phi(-r0)|
Observable clipped_tail();
/// exp(-|phi(0)|^2)
Observable gaussian_bump();
/// 1 / (1 + exp(-scale phi_1(0)))
Observable logistic_head(double scale = 1.0);
/// 1{|phi(0)| > threshold}
Observable head_exceeds(double threshold);
/// cos(frequency * first coordinate of phi(0)), scaled to [0, 1]
Observable cosine_head(double frequency);

/// Builds an observable from a registry name plus parameters
/// ("constant", "clipped_head", "clipped_sup", "clipped_tail", "gaussian_bump",
/// "logistic_head", "head_exceeds", "cosine_head").
Observable by_name(const std::string& name, const std::map<std::string, double>& parameters = {});

/// Registry names in stable order.
const std::vector<std::string>& names();

}  // namespace observables
}  // namespace nfsde
