#include "envmorph/engines.hpp"

#include <array>

#include "envmorph/dtw.hpp"
#include "envmorph/errors.hpp"

namespace envmorph {
namespace {

void check_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in [0, 1]");
}

LatentVec learned_latent(const LatentVec& z_a, const LatentVec& z_b, double alpha, const LatentVec& predicted) {
  if (alpha == 0.0) return z_a;
  if (alpha == 1.0) return z_b;
  return predicted;
}

}  // namespace

std::string engine_name(MorphEngineKind kind) {
  switch (kind) {
    case MorphEngineKind::AudioMix:
      return "audio-mix";
    case MorphEngineKind::EmbedMix:
      return "embed-mix";
    case MorphEngineKind::Dtw:
      return "dtw";
    case MorphEngineKind::Learned:
      return "learned";
  }
  return "unknown";
}

MorphEngineKind parse_engine_kind(const std::string& name) {
  for (auto k : {MorphEngineKind::AudioMix, MorphEngineKind::EmbedMix, MorphEngineKind::Dtw,
                 MorphEngineKind::Learned}) {
    if (engine_name(k) == name) return k;
  }
  throw InvalidArgument("unknown engine '" + name + "' (expected audio-mix, embed-mix, dtw or learned)");
}

bool engine_needs_autoencoder(MorphEngineKind kind) noexcept {
  return kind == MorphEngineKind::EmbedMix || kind == MorphEngineKind::Learned;
}

bool engine_needs_mapper(MorphEngineKind kind) noexcept { return kind == MorphEngineKind::Learned; }

Envelope audio_mix(const Envelope& a, const Envelope& b, double alpha) {
  check_alpha(alpha);
  const auto w = mix_weights(alpha);
  std::array<double, kFrames> out;
  for (std::size_t i = 0; i < kFrames; ++i) {
    out[i] = w.first * static_cast<double>(a[i]) + w.second * static_cast<double>(b[i]);
  }
  return Envelope::clamped(std::span<const double>(out));
}

LatentVec mix_latents(const LatentVec& z_a, const LatentVec& z_b, double alpha) {
  check_alpha(alpha);
  const auto w = mix_weights(alpha);
  LatentVec z;
  for (std::size_t i = 0; i < kLatentDim; ++i) {
    z.values[i] = static_cast<float>(w.first * static_cast<double>(z_a[i]) + w.second * static_cast<double>(z_b[i]));
  }
  return z;
}

Envelope embed_mix(const Envelope& a, const Envelope& b, double alpha, const Autoencoder& ae) {
  check_alpha(alpha);
  return decode(mix_latents(encode(a, ae), encode(b, ae), alpha), ae);
}

Envelope learned_morph(const Envelope& a, const Envelope& b, double alpha, const Autoencoder& ae,
                       const Mapper& mapper) {
  check_alpha(alpha);
  const auto z_a = encode(a, ae);
  const auto z_b = encode(b, ae);
  const auto z = (alpha == 0.0 || alpha == 1.0) ? LatentVec{} : mapper_forward(z_a, z_b, alpha, mapper);
  return decode(learned_latent(z_a, z_b, alpha, z), ae);
}

MorphEngine::MorphEngine(MorphEngineKind kind, EngineModels models, AlphaMap map)
    : kind_(kind), models_(std::move(models)), map_(std::move(map)) {
  if (engine_needs_autoencoder(kind_) && !models_.autoencoder) {
    throw InvalidArgument("engine " + engine_name(kind_) + " requires an autoencoder checkpoint");
  }
  if (engine_needs_mapper(kind_) && !models_.mapper) {
    throw InvalidArgument("engine " + engine_name(kind_) + " requires a mapper checkpoint");
  }
}

Envelope MorphEngine::operator()(const Envelope& a, const Envelope& b, double alpha) const {
  const double x = apply_alpha_map(map_, alpha);
  switch (kind_) {
    case MorphEngineKind::AudioMix:
      return audio_mix(a, b, x);
    case MorphEngineKind::EmbedMix:
      return embed_mix(a, b, x, *models_.autoencoder);
    case MorphEngineKind::Dtw:
      return dtw_morph(a, b, x);
    case MorphEngineKind::Learned:
      return learned_morph(a, b, x, *models_.autoencoder, *models_.mapper);
  }
  throw InvalidArgument("unknown engine kind");
}

std::vector<Envelope> MorphEngine::morph_batch(std::span<const Envelope> a, std::span<const Envelope> b,
                                               std::span<const double> alpha) const {
  if (a.size() != b.size() || a.size() != alpha.size()) throw InvalidArgument("morph_batch: size mismatch");
  std::vector<double> x(alpha.size());
  for (std::size_t i = 0; i < alpha.size(); ++i) x[i] = apply_alpha_map(map_, alpha[i]);

  std::vector<Envelope> out;
  out.reserve(a.size());
  if (kind_ == MorphEngineKind::AudioMix || kind_ == MorphEngineKind::Dtw) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      out.push_back(kind_ == MorphEngineKind::AudioMix ? audio_mix(a[i], b[i], x[i]) : dtw_morph(a[i], b[i], x[i]));
    }
    return out;
  }

  const auto& ae = *models_.autoencoder;
  const auto z_a = encode_all(a, ae);
  const auto z_b = encode_all(b, ae);
  std::vector<LatentVec> z(a.size());
  if (kind_ == MorphEngineKind::EmbedMix) {
    for (std::size_t i = 0; i < a.size(); ++i) z[i] = mix_latents(z_a[i], z_b[i], x[i]);
  } else {
    const auto pred = models_.mapper->forward_batch(mapper_feature_batch(z_a, z_b, x));
    if (!pred.all_finite()) throw NumericFailure("mapper produced non-finite activations");
    for (std::size_t i = 0; i < a.size(); ++i) {
      z[i] = learned_latent(z_a[i], z_b[i], x[i], latent_column(pred, static_cast<nn::Index>(i)));
    }
  }
  return decode_all(z, ae);
}

}  // namespace envmorph
