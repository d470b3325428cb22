#include <doctest.h>

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "envmorph/dataset.hpp"
#include "envmorph/errors.hpp"
#include "envmorph/stimuli.hpp"
#include "envmorph/synthgen.hpp"
#include "helpers.hpp"

using namespace envmorph;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Bursts are runs of samples above `threshold`; gaps shorter than 50 ms
// (the tone's own zero crossings) do not split a run.
int count_bursts(const AudioClip& clip, double threshold = 0.3) {
  const auto& x = clip.samples();
  const auto gap = static_cast<std::size_t>(0.05 * clip.sample_rate());
  int bursts = 0;
  std::size_t last = 0;
  bool seen = false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (std::abs(x[i]) < threshold) continue;
    if (!seen || i - last > gap) ++bursts;
    seen = true;
    last = i;
  }
  return bursts;
}

double window_energy(const AudioClip& clip, double from, double to) {
  double e = 0.0;
  const auto rate = clip.sample_rate();
  for (auto i = static_cast<std::size_t>(from * rate); i < static_cast<std::size_t>(to * rate); ++i) {
    e += clip.samples()[i] * clip.samples()[i];
  }
  return e;
}

ToneSequenceSpec tones(int q, double onset, double ioi) {
  ToneSequenceSpec s;
  s.quantity = q;
  s.onset = onset;
  s.ioi = ioi;
  return s;
}

}  // namespace

TEST_CASE("alpha sampling") {
  CHECK(parse_alpha_sampling("grid") == AlphaSampling::Grid);
  CHECK(parse_alpha_sampling("continuous") == AlphaSampling::Continuous);
  CHECK_THROWS_AS(parse_alpha_sampling("beta"), InvalidArgument);
  for (std::uint64_t s = 0; s < 200; ++s) {
    const double g = draw_alpha(s, AlphaSampling::Grid);
    const double tenth = g * 10.0;
    CHECK(std::abs(tenth - std::round(tenth)) < 1e-12);
    CHECK(g >= 0.1 - 1e-12);
    CHECK(g <= 0.9 + 1e-12);
    const double c = draw_alpha(s, AlphaSampling::Continuous);
    CHECK(c >= 0.0);
    CHECK(c <= 1.0);
  }
}

TEST_CASE("dataset tuples are pure functions of config and index") {
  DatasetConfig cfg;
  cfg.count = 12;
  cfg.base_seed = 7;
  const auto all = generate_tuples(cfg);
  REQUIRE(all.size() == 12);
  for (std::size_t i = 0; i < all.size(); ++i) {
    const auto t = dataset_tuple(cfg, i);
    CHECK(t.morph == all[i].morph);
    CHECK(t.alpha == all[i].alpha);
    CHECK(t.axes.flags().count() == 1);
    CHECK(t.axes.flags() == cfg.combos[i % cfg.combos.size()]);
    CHECK(t.a == dimension_envelope(t.axes, 0.0));
    CHECK(t.b == dimension_envelope(t.axes, 1.0));
  }
  cfg.count = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
}

TEST_CASE("dataset files are byte identical across runs") {
  DatasetConfig cfg;
  cfg.count = 100;
  cfg.base_seed = 7;
  const auto d1 = testutil::temp_dir("ds1"), d2 = testutil::temp_dir("ds2");
  const auto l1 = generate_dataset(cfg, d1);
  const auto l2 = generate_dataset(cfg, d2);
  CHECK(l1 == l2);
  CHECK(slurp(d1 / "manifest.jsonl") == slurp(d2 / "manifest.jsonl"));
  for (const char* name : {"000000_a.env1", "000042_morph.env1", "000099_b.env1"}) {
    CHECK(slurp(d1 / "envelopes" / name) == slurp(d2 / "envelopes" / name));
  }
  const auto first = nlohmann::json::parse(l1.front());
  CHECK(first["index"] == 0);
  int varied = 0;
  for (const auto& [axis, rec] : first["axes"].items()) varied += rec["varied"].get<bool>() ? 1 : 0;
  CHECK(varied == 1);
  const auto e = load_envelope(d1 / first["paths"]["morph"].get<std::string>());
  CHECK(e == dataset_tuple(cfg, 0).morph);
}

TEST_CASE("compositional dataset flags") {
  DatasetConfig cfg;
  cfg.count = 8;
  cfg.combos = {AxisFlags::parse("all")};
  cfg.alpha = AlphaSampling::Grid;
  const auto dir = testutil::temp_dir("ds_all");
  for (const auto& line : generate_dataset(cfg, dir)) {
    const auto j = nlohmann::json::parse(line);
    int varied = 0;
    for (const auto& [axis, rec] : j["axes"].items()) varied += rec["varied"].get<bool>() ? 1 : 0;
    CHECK(varied == 4);
  }
}

TEST_CASE("tone sequence rendering") {
  const auto four = render_tone_sequence(tones(4, 0.01, 0.75));
  CHECK(four.sample_rate() == kStimulusRate);
  CHECK(four.samples().size() == 6 * kStimulusRate);
  CHECK(count_bursts(four) == 4);
  CHECK(window_energy(four, 0.01, 0.16) > 100.0 * window_energy(four, 0.2, 0.3));
  double peak = 0.0;
  for (double v : four.samples()) peak = std::max(peak, std::abs(v));
  CHECK(peak <= 0.9 + 1e-12);

  auto silent = tones(0, 0.0, 0.0);
  silent.noise_level = 0.0;
  const auto silence = render_tone_sequence(silent);
  for (double v : silence.samples()) CHECK(v == 0.0);

  CHECK(render_tone_sequence(tones(4, 0.01, 0.75), kStimulusRate, 3).samples() ==
        render_tone_sequence(tones(4, 0.01, 0.75), kStimulusRate, 3).samples());
  CHECK(render_tone_sequence(tones(4, 0.01, 0.75), kStimulusRate, 3).samples() !=
        render_tone_sequence(tones(4, 0.01, 0.75), kStimulusRate, 4).samples());

  CHECK_THROWS_AS(render_tone_sequence(tones(16, 0.5, 0.5)), InvalidArgument);
  auto high = tones(1, 0.1, 0.0);
  high.tone_freq = 30000.0;
  CHECK_THROWS_AS(render_tone_sequence(high), InvalidArgument);
}

TEST_CASE("sequence morph and midpoint stimuli") {
  const auto a = tones(4, 0.01, 0.75), b = tones(8, 0.01, 0.75);
  const auto seq = render_sequence_morph(a, b);
  CHECK(seq.samples().size() == 12 * kStimulusRate);
  CHECK(count_bursts(seq) == 12);
  const AudioClip first_half(std::vector<double>(seq.samples().begin(), seq.samples().begin() + 6 * kStimulusRate),
                             kStimulusRate);
  CHECK(count_bursts(first_half) == a.quantity);

  auto quiet_a = tones(0, 0.0, 0.0), quiet_b = tones(0, 0.0, 0.0);
  quiet_a.noise_level = quiet_b.noise_level = 0.0;
  const auto quiet = render_sequence_morph(quiet_a, quiet_b);
  for (double v : quiet.samples()) CHECK(v == 0.0);

  const auto mid = midpoint_tone_spec(a, b);
  CHECK(mid.quantity == 6);
  CHECK(count_bursts(render_tone_sequence(mid)) == 6);
  CHECK(midpoint_tone_spec(tones(4, 0.01, 0.75), tones(4, 0.01, 0.35)).ioi == 0.55);
  CHECK(midpoint_tone_spec(tones(4, 0.0, 0.5), tones(4, 3.6, 0.5)).onset == 1.8);
}
