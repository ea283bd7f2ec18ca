#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace groundbridge {

using Rng = std::mt19937_64;

// Sub-seed derivation: splitmix64(global ^ fnv1a64(name)). Every component
// that needs randomness asks for a named stream so that changing one consumer
// never perturbs another.
std::uint64_t fnv1a64(std::string_view text);
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view name);
std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view name, std::uint64_t index);

inline Rng make_rng(std::uint64_t global_seed, std::string_view name) {
  return Rng(derive_seed(global_seed, name));
}

}  // namespace groundbridge
