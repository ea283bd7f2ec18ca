#include "groundbridge/adam.hpp"

#include <cmath>

#include "groundbridge/error.hpp"

namespace groundbridge {

void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads) {
  require(params.size() == grads.size() && state.m.size() == params.size() && state.v.size() == params.size(),
          ErrorKind::shape, "Adam state, parameters and gradients differ in size");
  for (double g : grads) require(std::isfinite(g), ErrorKind::numeric, "non-finite gradient");

  const auto& c = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = c.beta1 * state.m[i] + (1.0 - c.beta1) * g;
    state.v[i] = c.beta2 * state.v[i] + (1.0 - c.beta2) * g * g;
    const double mhat = state.m[i] / bc1;
    const double vhat = state.v[i] / bc2;
    params[i] -= c.lr * mhat / (std::sqrt(vhat) + c.eps);
  }
}

void adam_step(AdamState& state, EncoderParams& params, const ParamGrads& grads) {
  adam_step(state, std::span<double>(params.values), std::span<const double>(grads.values));
}

}  // namespace groundbridge
