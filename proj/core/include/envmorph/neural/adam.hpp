#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace envmorph::nn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First and second moment estimates for one parameter group.
struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;

  AdamState() = default;
  explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

/// One bias-corrected Adam update. Elements are independent, so parameter
/// groups may be stepped in any order.
template <typename T>
void adam_step(std::span<T> params, std::span<const T> grads, AdamState& state, const AdamConfig& cfg);

}  // namespace envmorph::nn
