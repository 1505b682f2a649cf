#include "nfsde/noise.hpp"

#include <cmath>
#include <stdexcept>

namespace nfsde {

Rng make_rng(std::uint64_t seed, std::uint64_t stream_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream_id),
                    static_cast<std::uint32_t>(stream_id >> 32)};
  return Rng(seq);
}

NoisePath generate_noise(std::uint64_t seed, std::uint64_t stream, Index steps, double h,
                         Index dim) {
  if (steps < 0) throw std::invalid_argument("generate_noise: steps must be >= 0");
  if (!(h > 0.0)) throw std::invalid_argument("generate_noise: h must be positive");
  if (dim < 1) throw std::invalid_argument("generate_noise: dim must be >= 1");
  Rng rng = make_rng(seed, stream);
  std::normal_distribution<double> normal(0.0, std::sqrt(h));
  NoisePath path;
  path.increments.resize(dim, steps);
  for (Index k = 0; k < steps; ++k) {
    for (Index i = 0; i < dim; ++i) path.increments(i, k) = normal(rng);
  }
  path.h = h;
  path.seed = seed;
  path.stream = stream;
  return path;
}

}  // namespace nfsde
