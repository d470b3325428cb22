#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "envmorph/audio.hpp"
#include "envmorph/envelope.hpp"

namespace envmorph {

struct ExtractionConfig {
  double lowpass_cutoff = 30.0;  // Hz
  std::size_t target_frames = kFrames;
  int filter_order = 4;
  double clip_duration = kDuration;  // seconds; shorter clips are zero-padded

  /// Throws InvalidArgument when the cutoff is not below the envelope
  /// Nyquist rate or fewer than two frames are requested.
  void validate() const;
};

/// |x + iH(x)| per sample, with H computed by the FFT analytic-signal method
/// at the next power-of-two transform size.
std::vector<double> analytic_magnitude(std::span<const double> signal);
std::vector<double> analytic_magnitude(const AudioClip& clip);

/// Zero-phase Butterworth lowpass (forward-backward, odd-extension padding).
std::vector<double> lowpass(std::span<const double> signal, double sample_rate,
                            const ExtractionConfig& cfg);

/// Non-overlapping block means onto `target_frames` uniform frames.
std::vector<double> resample_frames(std::span<const double> signal, double source_rate,
                                    std::size_t target_frames);

/// Pad/truncate, analytic magnitude, lowpass, block-mean resample, then peak
/// normalization (only when the peak exceeds 1) and clamping to [0, 1].
std::vector<double> extract_frames(const AudioClip& clip, const ExtractionConfig& cfg);

/// extract_frames for the fixed 2048-frame envelope layout.
Envelope extract_envelope(const AudioClip& clip, const ExtractionConfig& cfg = {});

}  // namespace envmorph
