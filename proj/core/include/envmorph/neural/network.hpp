#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "envmorph/neural/tensor.hpp"
#include "envmorph/rng.hpp"

namespace envmorph::nn {

enum class LayerKind : std::uint32_t {
  Conv = 1,          // strided cross-correlation, kernel 2*stride+1
  UpsampleConv = 2,  // nearest-neighbor upsample by `stride`, then conv with kernel 2*stride+1
  Dense = 3,
  Relu = 4,
  Sigmoid = 5,
};

struct LayerSpec {
  LayerKind kind = LayerKind::Relu;
  int in = 0;
  int out = 0;
  int kernel = 0;
  int stride = 1;

  static LayerSpec conv(int in, int out, int stride) {
    return {LayerKind::Conv, in, out, 2 * stride + 1, stride};
  }
  static LayerSpec upsample_conv(int in, int out, int factor) {
    return {LayerKind::UpsampleConv, in, out, 2 * factor + 1, factor};
  }
  static LayerSpec dense(int in, int out) { return {LayerKind::Dense, in, out, 1, 1}; }
  static LayerSpec relu() { return {LayerKind::Relu, 0, 0, 0, 1}; }
  static LayerSpec sigmoid() { return {LayerKind::Sigmoid, 0, 0, 0, 1}; }

  bool has_params() const noexcept {
    return kind == LayerKind::Conv || kind == LayerKind::UpsampleConv || kind == LayerKind::Dense;
  }
  /// Weight matrix [out, kernel * in] (column-major) followed by bias [out].
  Index weight_count() const noexcept { return has_params() ? Index(out) * kernel * in : 0; }
  Index param_count() const noexcept { return has_params() ? weight_count() + out : 0; }
  Index output_length(Index input_length) const noexcept;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

template <typename T>
struct LayerCache {
  Matrix<T> saved;  // im2col columns for conv layers, outputs for activations
  Index batch = 0;
  Index in_length = 0;
};

template <typename T>
struct Workspace {
  std::vector<LayerCache<T>> caches;
};

/// Sequential stack of layers over a flat parameter vector.
///
/// The network holds only the architecture; parameters and gradients live
/// in caller-owned spans laid out layer by layer, so forward passes are
/// const and a model can be shared across threads for inference.
template <typename T>
class Network {
 public:
  Network() = default;
  explicit Network(std::vector<LayerSpec> layers);

  const std::vector<LayerSpec>& layers() const noexcept { return layers_; }
  Index param_count() const noexcept { return param_count_; }
  Index param_offset(std::size_t layer) const { return offsets_.at(layer); }

  /// Fan-in scaled uniform weights (bound sqrt(6 / fan_in)), zero biases.
  void init(std::span<T> params, Rng& rng) const;

  /// When `ws` is non-null, stores what backward() needs.
  Tensor<T> forward(std::span<const T> params, const Tensor<T>& x, Workspace<T>* ws = nullptr) const;

  /// Accumulates parameter gradients into `grads` and returns the input
  /// gradient. `ws` must come from the matching forward() call.
  Tensor<T> backward(std::span<const T> params, const Workspace<T>& ws, const Tensor<T>& grad_out,
                     std::span<T> grads) const;

 private:
  std::vector<LayerSpec> layers_;
  std::vector<Index> offsets_;
  Index param_count_ = 0;
};

/// Single-layer entry points, used by gradient checks and the conv
/// equivalence tests.
template <typename T>
Tensor<T> layer_forward(const LayerSpec& spec, std::span<const T> params, const Tensor<T>& x,
                        LayerCache<T>* cache);
template <typename T>
Tensor<T> layer_backward(const LayerSpec& spec, std::span<const T> params, const LayerCache<T>& cache,
                         const Tensor<T>& grad_out, std::span<T> grads);

extern template class Network<float>;
extern template class Network<double>;

}  // namespace envmorph::nn
