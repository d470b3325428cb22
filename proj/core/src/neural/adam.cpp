#include "envmorph/neural/adam.hpp"

#include <cmath>

#include "envmorph/errors.hpp"

namespace envmorph::nn {

template <typename T>
void adam_step(std::span<T> params, std::span<const T> grads, AdamState& state, const AdamConfig& cfg) {
  if (params.size() != grads.size() || state.m.size() != params.size() || state.v.size() != params.size()) {
    throw InvalidArgument("adam_step: size mismatch");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correct1 = 1.0 - std::pow(cfg.beta1, t);
  const double correct2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
    const double m_hat = state.m[i] / correct1;
    const double v_hat = state.v[i] / correct2;
    const double update = cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.eps);
    params[i] = static_cast<T>(static_cast<double>(params[i]) - update);
  }
}

template void adam_step(std::span<float>, std::span<const float>, AdamState&, const AdamConfig&);
template void adam_step(std::span<double>, std::span<const double>, AdamState&, const AdamConfig&);

}  // namespace envmorph::nn
