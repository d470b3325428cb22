#pragma once

#include <cstdint>

#include "envmorph/audio.hpp"

namespace envmorph {

inline constexpr std::uint32_t kStimulusRate = 44100;

/// Listening-test stimulus: pure-tone bursts over low-level noise.
struct ToneSequenceSpec {
  int quantity = 0;
  double onset = 0.0;  // seconds
  double ioi = 0.0;    // seconds
  double tone_freq = 440.0;
  double tone_dur = 0.15;
  double total_dur = 6.0;
  double noise_level = 0.01;

  /// Throws InvalidArgument when a tone ends after total_dur, the tone is
  /// above Nyquist, or a field is out of range.
  void validate(std::uint32_t sample_rate) const;

  friend bool operator==(const ToneSequenceSpec&, const ToneSequenceSpec&) = default;
};

inline constexpr double kToneRamp = 0.010;  // raised-cosine on/off ramp, seconds

/// Bursts at onset + k*ioi plus seeded Gaussian noise, scaled down to a
/// peak of at most 0.9.
AudioClip render_tone_sequence(const ToneSequenceSpec& spec, std::uint32_t sample_rate = kStimulusRate,
                               std::uint64_t seed = 0);

/// `a` followed by `b`; b's onsets are offset by a.total_dur.
AudioClip render_sequence_morph(const ToneSequenceSpec& a, const ToneSequenceSpec& b,
                                std::uint32_t sample_rate = kStimulusRate, std::uint64_t seed = 0);

/// Field-wise mean of quantity (rounded half away from zero), onset and ioi;
/// the remaining fields come from `a`. Throws InvalidArgument if the result
/// does not fit.
ToneSequenceSpec midpoint_tone_spec(const ToneSequenceSpec& a, const ToneSequenceSpec& b);

}  // namespace envmorph
