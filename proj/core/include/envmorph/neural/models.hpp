#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "envmorph/envelope.hpp"
#include "envmorph/neural/network.hpp"

namespace envmorph {

inline constexpr std::size_t kLatentDim = 64;
inline constexpr std::size_t kMapperInput = 3 * kLatentDim;
inline constexpr int kMapperHidden = 128;

/// 64-dimensional bottleneck embedding of one envelope.
struct LatentVec {
  std::array<float, kLatentDim> values{};

  bool finite() const noexcept;
  float operator[](std::size_t i) const noexcept { return values[i]; }
  friend bool operator==(const LatentVec&, const LatentVec&) = default;
};

double latent_distance(const LatentVec& a, const LatentVec& b) noexcept;

/// Strided 1-D conv encoder (strides 8,4,4,4,4; channels 16,32,64,128,64)
/// mirrored by a nearest-upsample + conv decoder ending in a sigmoid.
class Autoencoder {
 public:
  static const std::vector<nn::LayerSpec>& encoder_layers();
  static const std::vector<nn::LayerSpec>& decoder_layers();

  /// Initial bias of the output channel, roughly logit(0.05). Envelopes are
  /// mostly near zero; starting the sigmoid at 0.5 lets Adam drive it into
  /// saturation before any structure is learned.
  static constexpr float kOutputBiasInit = -3.0f;

  /// All parameters zero.
  Autoencoder();
  static Autoencoder initialized(std::uint64_t seed);

  const nn::Network<float>& encoder() const noexcept { return encoder_; }
  const nn::Network<float>& decoder() const noexcept { return decoder_; }
  std::vector<float>& encoder_params() noexcept { return encoder_params_; }
  std::vector<float>& decoder_params() noexcept { return decoder_params_; }
  const std::vector<float>& encoder_params() const noexcept { return encoder_params_; }
  const std::vector<float>& decoder_params() const noexcept { return decoder_params_; }

  /// [N, 1, 2048] -> [N, 64, 1].
  nn::Tensor<float> encode_batch(const nn::Tensor<float>& envelopes,
                                 nn::Workspace<float>* ws = nullptr) const;
  /// [N, 64, 1] -> [N, 1, 2048], values in (0, 1).
  nn::Tensor<float> decode_batch(const nn::Tensor<float>& latents,
                                 nn::Workspace<float>* ws = nullptr) const;

  friend bool operator==(const Autoencoder& a, const Autoencoder& b) {
    return a.encoder_params_ == b.encoder_params_ && a.decoder_params_ == b.decoder_params_;
  }

 private:
  nn::Network<float> encoder_;
  nn::Network<float> decoder_;
  std::vector<float> encoder_params_;
  std::vector<float> decoder_params_;
};

/// Three dense layers 192 -> 128 -> 128 -> 64 with ReLU hidden units.
class Mapper {
 public:
  static const std::vector<nn::LayerSpec>& layers();

  Mapper();
  static Mapper initialized(std::uint64_t seed);

  const nn::Network<float>& network() const noexcept { return net_; }
  std::vector<float>& params() noexcept { return params_; }
  const std::vector<float>& params() const noexcept { return params_; }

  /// [N, 192, 1] features -> [N, 64, 1] latents.
  nn::Tensor<float> forward_batch(const nn::Tensor<float>& features,
                                  nn::Workspace<float>* ws = nullptr) const;

  friend bool operator==(const Mapper& a, const Mapper& b) { return a.params_ == b.params_; }

 private:
  nn::Network<float> net_;
  std::vector<float> params_;
};

/// Pair of interpolation weights (first input, second input) for alpha.
///
/// Computed so that weights(fl(1 - alpha)) is exactly the swap of
/// weights(alpha); alpha = 0 gives (1, 0) and alpha = 1 gives (0, 1).
struct MixWeights {
  double first;
  double second;
};
MixWeights mix_weights(double alpha) noexcept;

/// Packs envelopes into a [N, 1, 2048] batch.
nn::Tensor<float> envelope_batch(std::span<const Envelope> envelopes);
nn::Tensor<float> latent_batch(std::span<const LatentVec> latents);
LatentVec latent_column(const nn::Tensor<float>& batch, nn::Index n);
Envelope envelope_column(const nn::Tensor<float>& batch, nn::Index n);

/// Throws NumericFailure on non-finite activations.
LatentVec encode(const Envelope& e, const Autoencoder& m);
std::vector<LatentVec> encode_all(std::span<const Envelope> envelopes, const Autoencoder& m);
Envelope decode(const LatentVec& z, const Autoencoder& m);
std::vector<Envelope> decode_all(std::span<const LatentVec> latents, const Autoencoder& m);

/// [z_a + z_b, |z_a - z_b|, alpha*z_a + (1-alpha)*z_b]; swapping the inputs
/// and replacing alpha by 1-alpha gives a bitwise-identical vector.
std::array<float, kMapperInput> mapper_features(const LatentVec& z_a, const LatentVec& z_b, double alpha);
nn::Tensor<float> mapper_feature_batch(std::span<const LatentVec> z_a, std::span<const LatentVec> z_b,
                                       std::span<const double> alpha);

LatentVec mapper_forward(const LatentVec& z_a, const LatentVec& z_b, double alpha, const Mapper& m);

}  // namespace envmorph
