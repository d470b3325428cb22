#include <doctest.h>

#include <cmath>

#include "envmorph/alpha_map.hpp"
#include "envmorph/dtw.hpp"
#include "envmorph/engines.hpp"
#include "envmorph/errors.hpp"
#include "envmorph/synthgen.hpp"
#include "helpers.hpp"

using namespace envmorph;

namespace {

EngineModels random_models() {
  return {std::make_shared<Autoencoder>(Autoencoder::initialized(1)),
          std::make_shared<Mapper>(Mapper::initialized(2))};
}

Envelope reconstruction(const Envelope& e, const Autoencoder& ae) { return decode(encode(e, ae), ae); }

}  // namespace

TEST_CASE("engine names") {
  for (auto k : {MorphEngineKind::AudioMix, MorphEngineKind::EmbedMix, MorphEngineKind::Dtw, MorphEngineKind::Learned}) {
    CHECK(parse_engine_kind(engine_name(k)) == k);
  }
  CHECK(engine_name(MorphEngineKind::AudioMix) == "audio-mix");
  CHECK_THROWS_AS(parse_engine_kind("spectral"), InvalidArgument);
  CHECK(engine_needs_autoencoder(MorphEngineKind::EmbedMix));
  CHECK_FALSE(engine_needs_mapper(MorphEngineKind::EmbedMix));
  CHECK(engine_needs_mapper(MorphEngineKind::Learned));
  CHECK_FALSE(engine_needs_autoencoder(MorphEngineKind::Dtw));
}

TEST_CASE("audio_mix") {
  Rng rng(1);
  const auto a = testutil::random_envelope(rng), b = testutil::random_envelope(rng);
  CHECK(audio_mix(a, b, 0.0) == a);
  CHECK(audio_mix(a, b, 1.0) == b);
  const Envelope zeros;
  const Envelope ones(std::vector<float>(kFrames, 1.0f));
  const auto half = audio_mix(zeros, ones, 0.5);
  for (float v : half.frames()) CHECK(v == 0.5f);
  for (int trial = 0; trial < 20; ++trial) {
    const double alpha = uniform01(rng);
    CHECK(audio_mix(a, b, alpha) == audio_mix(b, a, 1.0 - alpha));
  }
  CHECK_THROWS_AS(audio_mix(a, b, -0.1), InvalidArgument);
}

TEST_CASE("embed_mix") {
  const auto models = random_models();
  const auto& ae = *models.autoencoder;
  Rng rng(2);
  const auto a = testutil::random_envelope(rng), b = testutil::random_envelope(rng);
  CHECK(embed_mix(a, b, 0.0, ae) == reconstruction(a, ae));
  CHECK(embed_mix(a, b, 1.0, ae) == reconstruction(b, ae));
  for (double alpha : {0.2, 0.5, 0.9}) {
    CHECK(embed_mix(a, a, alpha, ae) == reconstruction(a, ae));
    CHECK(embed_mix(a, b, alpha, ae) == embed_mix(b, a, 1.0 - alpha, ae));
  }
  const auto za = encode(a, ae), zb = encode(b, ae);
  const auto mid = mix_latents(za, zb, 0.5);
  for (std::size_t i = 0; i < kLatentDim; ++i) {
    CHECK(mid[i] == static_cast<float>(0.5 * za[i] + 0.5 * static_cast<double>(zb[i])));
  }
  CHECK(embed_mix(a, b, 0.5, ae) == decode(mid, ae));
}

TEST_CASE("learned_morph") {
  const auto models = random_models();
  const auto& ae = *models.autoencoder;
  const auto& mp = *models.mapper;
  Rng rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const auto a = testutil::random_envelope(rng), b = testutil::random_envelope(rng);
    const double alpha = uniform01(rng);
    const auto m = learned_morph(a, b, alpha, ae, mp);
    CHECK(m == learned_morph(b, a, 1.0 - alpha, ae, mp));
    for (float v : m.frames()) {
      CHECK(v >= 0.0f);
      CHECK(v <= 1.0f);
    }
    CHECK(learned_morph(a, b, 0.0, ae, mp) == reconstruction(a, ae));
    CHECK(learned_morph(a, b, 1.0, ae, mp) == reconstruction(b, ae));
  }
  const auto a = testutil::random_envelope(rng), b = testutil::random_envelope(rng);
  CHECK(learned_morph(a, b, 0.4, ae, mp) == decode(mapper_forward(encode(a, ae), encode(b, ae), 0.4, mp), ae));
}

TEST_CASE("MorphEngine") {
  CHECK_THROWS_AS(MorphEngine(MorphEngineKind::EmbedMix), InvalidArgument);
  EngineModels only_ae{std::make_shared<Autoencoder>(Autoencoder::initialized(1)), nullptr};
  CHECK_NOTHROW(MorphEngine(MorphEngineKind::EmbedMix, only_ae));
  CHECK_THROWS_AS(MorphEngine(MorphEngineKind::Learned, only_ae), InvalidArgument);
  CHECK_NOTHROW(MorphEngine(MorphEngineKind::Dtw));

  Rng rng(4);
  const auto a = testutil::random_envelope(rng), b = testutil::random_envelope(rng);
  const MorphEngine squared(MorphEngineKind::AudioMix, {}, AlphaMap::parse("gamma:2"));
  CHECK(squared(a, b, 0.5) == audio_mix(a, b, 0.25));
  CHECK(squared(a, b, 0.0) == a);
  CHECK(squared(a, b, 1.0) == b);

  const auto models = random_models();
  for (auto k : {MorphEngineKind::AudioMix, MorphEngineKind::EmbedMix, MorphEngineKind::Dtw, MorphEngineKind::Learned}) {
    const MorphEngine engine(k, models);
    std::vector<Envelope> as, bs;
    std::vector<double> alphas;
    for (int i = 0; i < 3; ++i) {
      as.push_back(testutil::random_envelope(rng));
      bs.push_back(testutil::random_envelope(rng));
      alphas.push_back(i / 2.0);
    }
    const auto batch = engine.morph_batch(as, bs, alphas);
    REQUIRE(batch.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      const auto single = engine(as[i], bs[i], alphas[i]);
      if (k == MorphEngineKind::AudioMix || k == MorphEngineKind::Dtw) {
        CHECK(batch[i] == single);
      } else {
        CHECK(rmse(batch[i], single) < 1e-5);
      }
    }
  }
}

TEST_CASE("alpha maps") {
  const AlphaMap id;
  CHECK(id.is_identity());
  for (double a : {0.0, 0.3, 1.0}) CHECK(apply_alpha_map(id, a) == a);
  const auto g = AlphaMap::parse("gamma:2");
  CHECK(apply_alpha_map(g, 0.5) == 0.25);
  CHECK(apply_alpha_map(g, 0.0) == 0.0);
  CHECK(apply_alpha_map(g, 1.0) == 1.0);
  const auto p = AlphaMap::parse("pwl:0:0,0.5:0.8,1:1");
  CHECK(apply_alpha_map(p, 0.25) == doctest::Approx(0.4));
  CHECK(apply_alpha_map(p, 0.75) == doctest::Approx(0.9));
  CHECK(AlphaMap::parse("identity").is_identity());

  CHECK_THROWS_AS(AlphaMap([](double a) { return 1.0 - a; }, "reverse"), InvalidMap);
  CHECK_THROWS_AS(AlphaMap([](double a) { return 0.5 * a; }, "short"), InvalidMap);
  CHECK_THROWS_AS(AlphaMap([](double a) { return a < 0.5 ? a : 1.5 - a * 0.5 - 0.25 * (a - 0.5); }, "bump"),
                  InvalidMap);
  CHECK_THROWS_AS(AlphaMap::parse("pwl:0:0,0.5:0.9,0.7:0.4,1:1"), InvalidMap);
  CHECK_THROWS_AS(AlphaMap::parse("gamma:0"), InvalidArgument);
  CHECK_THROWS_AS(AlphaMap::parse("sqrt"), InvalidArgument);
  CHECK_THROWS_AS(apply_alpha_map(g, 1.2), InvalidArgument);
}
