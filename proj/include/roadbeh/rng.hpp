#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace roadbeh {

using Rng = std::mt19937_64;

/// Stable 64-bit stream seed for (seed, label, index). Labels name the consumer
/// ("synth", "split", "init", ...) so streams never collide across modules.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label, std::uint64_t index = 0);

inline Rng make_rng(std::uint64_t seed, std::string_view label, std::uint64_t index = 0) {
  return Rng(derive_seed(seed, label, index));
}

/// Uniform double in [lo, hi]; returns lo when the range is degenerate.
double uniform(Rng& rng, double lo, double hi);

}  // namespace roadbeh
