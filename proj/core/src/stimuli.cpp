#include "envmorph/stimuli.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "envmorph/errors.hpp"
#include "envmorph/rng.hpp"
#include "envmorph/synthgen.hpp"

namespace envmorph {
namespace {

constexpr double kPeakCeiling = 0.9;

// Box-Muller on the portable uniform source; std::normal_distribution is
// not reproducible across standard libraries.
double gaussian(Rng& rng) {
  const double u1 = 1.0 - uniform01(rng);  // (0, 1]
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void add_sequence(std::vector<double>& out, const ToneSequenceSpec& spec, double offset, std::uint32_t rate) {
  const auto burst = static_cast<std::size_t>(std::llround(spec.tone_dur * rate));
  const double ramp = std::min(kToneRamp, spec.tone_dur / 2.0) * rate;
  for (int k = 0; k < spec.quantity; ++k) {
    const auto start = static_cast<std::size_t>(std::llround((offset + spec.onset + k * spec.ioi) * rate));
    for (std::size_t n = 0; n < burst && start + n < out.size(); ++n) {
      const double pos = static_cast<double>(n);
      double gain = 1.0;
      if (pos < ramp) {
        gain = 0.5 * (1.0 - std::cos(std::numbers::pi * pos / ramp));
      } else if (pos > static_cast<double>(burst) - ramp) {
        gain = 0.5 * (1.0 - std::cos(std::numbers::pi * (static_cast<double>(burst) - pos) / ramp));
      }
      out[start + n] += gain * std::sin(2.0 * std::numbers::pi * spec.tone_freq * pos / rate);
    }
  }
}

void add_noise(std::vector<double>& out, std::size_t begin, std::size_t end, double level, std::uint64_t seed) {
  if (level == 0.0) return;
  Rng rng(seed);
  for (std::size_t n = begin; n < end; ++n) out[n] += level * gaussian(rng);
}

AudioClip finish(std::vector<double> samples, std::uint32_t rate) {
  double peak = 0.0;
  for (double v : samples) peak = std::max(peak, std::abs(v));
  if (peak > kPeakCeiling) {
    const double g = kPeakCeiling / peak;
    for (double& v : samples) v *= g;
  }
  return AudioClip(std::move(samples), rate);
}

std::size_t sample_count(double seconds, std::uint32_t rate) {
  return static_cast<std::size_t>(std::llround(seconds * rate));
}

}  // namespace

void ToneSequenceSpec::validate(std::uint32_t sample_rate) const {
  if (quantity < 0) throw InvalidArgument("tone sequence: quantity must be >= 0");
  if (!(onset >= 0.0) || !(ioi >= 0.0)) throw InvalidArgument("tone sequence: onset and ioi must be >= 0");
  if (!(tone_dur > 0.0) || !(total_dur > 0.0)) throw InvalidArgument("tone sequence: durations must be > 0");
  if (!(noise_level >= 0.0)) throw InvalidArgument("tone sequence: noise level must be >= 0");
  if (sample_rate == 0 || !(tone_freq > 0.0 && tone_freq < sample_rate / 2.0)) {
    throw InvalidArgument("tone sequence: tone frequency must lie below Nyquist");
  }
  if (quantity >= 2 && ioi < tone_dur) throw InvalidArgument("tone sequence: tones overlap");
  if (quantity >= 1 && onset + (quantity - 1) * ioi + tone_dur > total_dur + 1e-9) {
    throw InvalidArgument("tone sequence: last tone ends after total_dur");
  }
}

AudioClip render_tone_sequence(const ToneSequenceSpec& spec, std::uint32_t sample_rate, std::uint64_t seed) {
  spec.validate(sample_rate);
  std::vector<double> out(sample_count(spec.total_dur, sample_rate), 0.0);
  add_sequence(out, spec, 0.0, sample_rate);
  add_noise(out, 0, out.size(), spec.noise_level, seed);
  return finish(std::move(out), sample_rate);
}

AudioClip render_sequence_morph(const ToneSequenceSpec& a, const ToneSequenceSpec& b, std::uint32_t sample_rate,
                                std::uint64_t seed) {
  a.validate(sample_rate);
  b.validate(sample_rate);
  const std::size_t split = sample_count(a.total_dur, sample_rate);
  std::vector<double> out(split + sample_count(b.total_dur, sample_rate), 0.0);
  add_sequence(out, a, 0.0, sample_rate);
  add_sequence(out, b, a.total_dur, sample_rate);
  add_noise(out, 0, split, a.noise_level, seed);
  add_noise(out, split, out.size(), b.noise_level, mix64(seed));
  return finish(std::move(out), sample_rate);
}

ToneSequenceSpec midpoint_tone_spec(const ToneSequenceSpec& a, const ToneSequenceSpec& b) {
  ToneSequenceSpec m = a;
  m.quantity = interpolate_quantity(a.quantity, b.quantity, 0.5);
  m.onset = (a.onset + b.onset) / 2.0;
  m.ioi = (a.ioi + b.ioi) / 2.0;
  m.validate(kStimulusRate);
  return m;
}

}  // namespace envmorph
