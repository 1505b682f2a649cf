#pragma once

#include "nfsde/segment.hpp"

#include <cstdint>
#include <random>

namespace nfsde {

using Rng = std::mt19937_64;

/// Engine for stream `stream_id` under master `seed`. The four 32-bit halves
/// of (seed, stream_id) go through std::seed_seq, so every pair gets an
/// independent, platform-stable state.
Rng make_rng(std::uint64_t seed, std::uint64_t stream_id);

/// Splittable stream numbering: bits 40.. task, bits 32..39 role, bits 0..31
/// trial. Roles separate independent samplers inside one task (for example
/// the coupled run and the plain reference run of a law check).
constexpr std::uint64_t stream_id(std::uint64_t task, std::uint64_t trial, std::uint64_t role = 0) {
  return (task << 40) | ((role & 0xffu) << 32) | (trial & 0xffffffffu);
}

/// Brownian increments dW_k ~ N(0, h I), one column per step.
struct NoisePath {
  Matrix increments;
  double h = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  Index steps() const { return increments.cols(); }
  Index dim() const { return increments.rows(); }
};

NoisePath generate_noise(std::uint64_t seed, std::uint64_t stream, Index steps, double h, Index dim);

}  // namespace nfsde
