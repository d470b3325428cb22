#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "envmorph/alpha_map.hpp"
#include "envmorph/envelope.hpp"
#include "envmorph/neural/models.hpp"

namespace envmorph {

enum class MorphEngineKind { AudioMix, EmbedMix, Dtw, Learned };

/// "audio-mix", "embed-mix", "dtw", "learned".
std::string engine_name(MorphEngineKind kind);
/// Throws InvalidArgument for unknown names.
MorphEngineKind parse_engine_kind(const std::string& name);
bool engine_needs_autoencoder(MorphEngineKind kind) noexcept;
bool engine_needs_mapper(MorphEngineKind kind) noexcept;

/// (1 - alpha) * a + alpha * b per frame.
Envelope audio_mix(const Envelope& a, const Envelope& b, double alpha);

/// Decodes the alpha-weighted mix of the two latents.
Envelope embed_mix(const Envelope& a, const Envelope& b, double alpha, const Autoencoder& ae);
LatentVec mix_latents(const LatentVec& z_a, const LatentVec& z_b, double alpha);

/// Decodes the mapper's prediction. At alpha 0 and 1 the prediction is
/// replaced by the corresponding input latent, so the endpoints are the
/// autoencoder reconstructions of the inputs.
Envelope learned_morph(const Envelope& a, const Envelope& b, double alpha, const Autoencoder& ae,
                       const Mapper& mapper);

struct EngineModels {
  std::shared_ptr<const Autoencoder> autoencoder;
  std::shared_ptr<const Mapper> mapper;
};

/// One morphing method behind a common call signature, with an optional
/// alpha map composed in front.
class MorphEngine {
 public:
  /// Throws InvalidArgument when a required model is missing.
  explicit MorphEngine(MorphEngineKind kind, EngineModels models = {}, AlphaMap map = {});

  MorphEngineKind kind() const noexcept { return kind_; }
  std::string name() const { return engine_name(kind_); }
  const AlphaMap& alpha_map() const noexcept { return map_; }

  Envelope operator()(const Envelope& a, const Envelope& b, double alpha) const;

  /// Per-item morphs; the neural engines run the networks in batches, so
  /// results can differ from operator() in the last float bit.
  std::vector<Envelope> morph_batch(std::span<const Envelope> a, std::span<const Envelope> b,
                                    std::span<const double> alpha) const;

 private:
  MorphEngineKind kind_;
  EngineModels models_;
  AlphaMap map_;
};

}  // namespace envmorph
