#include <cmath>

#include "envmorph/errors.hpp"
#include "envmorph/neural/models.hpp"

namespace envmorph {

using nn::LayerSpec;
using nn::Tensor;

bool LatentVec::finite() const noexcept {
  for (float v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

double latent_distance(const LatentVec& a, const LatentVec& b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < kLatentDim; ++i) {
    const double d = static_cast<double>(a[i]) - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

const std::vector<LayerSpec>& Autoencoder::encoder_layers() {
  static const std::vector<LayerSpec> layers = {
      LayerSpec::conv(1, 16, 8),    LayerSpec::relu(), LayerSpec::conv(16, 32, 4),  LayerSpec::relu(),
      LayerSpec::conv(32, 64, 4),   LayerSpec::relu(), LayerSpec::conv(64, 128, 4), LayerSpec::relu(),
      LayerSpec::conv(128, 64, 4),
  };
  return layers;
}

const std::vector<LayerSpec>& Autoencoder::decoder_layers() {
  static const std::vector<LayerSpec> layers = {
      LayerSpec::upsample_conv(64, 128, 4), LayerSpec::relu(),
      LayerSpec::upsample_conv(128, 64, 4), LayerSpec::relu(),
      LayerSpec::upsample_conv(64, 32, 4),  LayerSpec::relu(),
      LayerSpec::upsample_conv(32, 16, 4),  LayerSpec::relu(),
      LayerSpec::upsample_conv(16, 1, 8),   LayerSpec::sigmoid(),
  };
  return layers;
}

Autoencoder::Autoencoder()
    : encoder_(encoder_layers()),
      decoder_(decoder_layers()),
      encoder_params_(static_cast<std::size_t>(encoder_.param_count()), 0.0f),
      decoder_params_(static_cast<std::size_t>(decoder_.param_count()), 0.0f) {}

Autoencoder Autoencoder::initialized(std::uint64_t seed) {
  Autoencoder m;
  Rng rng(derive_seed(seed, SeedStream::AutoencoderInit, 0));
  m.encoder_.init(std::span<float>(m.encoder_params_), rng);
  m.decoder_.init(std::span<float>(m.decoder_params_), rng);
  // The last parameter is the single output channel's bias.
  m.decoder_params_.back() = kOutputBiasInit;
  return m;
}

Tensor<float> Autoencoder::encode_batch(const Tensor<float>& envelopes, nn::Workspace<float>* ws) const {
  if (envelopes.channels() != 1 || envelopes.length != static_cast<nn::Index>(kFrames)) {
    throw InvalidArgument("encode: expected [N, 1, 2048] input");
  }
  return encoder_.forward(std::span<const float>(encoder_params_), envelopes, ws);
}

Tensor<float> Autoencoder::decode_batch(const Tensor<float>& latents, nn::Workspace<float>* ws) const {
  if (latents.channels() != static_cast<nn::Index>(kLatentDim) || latents.length != 1) {
    throw InvalidArgument("decode: expected [N, 64, 1] input");
  }
  return decoder_.forward(std::span<const float>(decoder_params_), latents, ws);
}

MixWeights mix_weights(double alpha) noexcept {
  if (alpha >= 0.5) return {1.0 - alpha, alpha};
  const double first = 1.0 - alpha;
  return {first, 1.0 - first};
}

Tensor<float> envelope_batch(std::span<const Envelope> envelopes) {
  const auto n = static_cast<nn::Index>(envelopes.size());
  Tensor<float> t(n, 1, static_cast<nn::Index>(kFrames));
  for (nn::Index i = 0; i < n; ++i) {
    const auto f = envelopes[static_cast<std::size_t>(i)].frames();
    for (std::size_t k = 0; k < kFrames; ++k) t.data(0, i * static_cast<nn::Index>(kFrames) + k) = f[k];
  }
  return t;
}

Tensor<float> latent_batch(std::span<const LatentVec> latents) {
  const auto n = static_cast<nn::Index>(latents.size());
  Tensor<float> t(n, static_cast<nn::Index>(kLatentDim), 1);
  for (nn::Index i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < kLatentDim; ++k) {
      t.data(static_cast<nn::Index>(k), i) = latents[static_cast<std::size_t>(i)][k];
    }
  }
  return t;
}

LatentVec latent_column(const Tensor<float>& batch, nn::Index n) {
  LatentVec z;
  for (std::size_t k = 0; k < kLatentDim; ++k) z.values[k] = batch.data(static_cast<nn::Index>(k), n);
  return z;
}

Envelope envelope_column(const Tensor<float>& batch, nn::Index n) {
  Envelope::Frames f;
  for (std::size_t k = 0; k < kFrames; ++k) f[k] = batch.data(0, n * static_cast<nn::Index>(kFrames) + k);
  return Envelope::clamped(std::span<const float>(f));
}

std::vector<LatentVec> encode_all(std::span<const Envelope> envelopes, const Autoencoder& m) {
  const auto out = m.encode_batch(envelope_batch(envelopes));
  if (!out.all_finite()) throw NumericFailure("encoder produced non-finite activations");
  std::vector<LatentVec> z(envelopes.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = latent_column(out, static_cast<nn::Index>(i));
  return z;
}

LatentVec encode(const Envelope& e, const Autoencoder& m) { return encode_all(std::span(&e, 1), m).front(); }

std::vector<Envelope> decode_all(std::span<const LatentVec> latents, const Autoencoder& m) {
  for (const auto& z : latents) {
    if (!z.finite()) throw NumericFailure("decode: latent is not finite");
  }
  const auto out = m.decode_batch(latent_batch(latents));
  if (!out.all_finite()) throw NumericFailure("decoder produced non-finite activations");
  std::vector<Envelope> e;
  e.reserve(latents.size());
  for (std::size_t i = 0; i < latents.size(); ++i) e.push_back(envelope_column(out, static_cast<nn::Index>(i)));
  return e;
}

Envelope decode(const LatentVec& z, const Autoencoder& m) { return decode_all(std::span(&z, 1), m).front(); }

}  // namespace envmorph
