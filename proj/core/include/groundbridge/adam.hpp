#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "groundbridge/encoder.hpp"

namespace groundbridge {

struct AdamConfig {
  double lr = 5e-6;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::uint64_t step = 0;
  std::vector<double> m;  // first moment
  std::vector<double> v;  // second moment

  AdamState() = default;
  AdamState(std::size_t n, AdamConfig cfg) : config(cfg), m(n, 0.0), v(n, 0.0) {}
};

// One bias-corrected Adam update, in place. Throws a numeric error and leaves
// both `state` and `params` untouched when any gradient is non-finite.
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads);
void adam_step(AdamState& state, EncoderParams& params, const ParamGrads& grads);

}  // namespace groundbridge
