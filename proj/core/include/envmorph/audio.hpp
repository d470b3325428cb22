#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace envmorph {

/// Mono PCM audio with samples nominally in [-1, 1].
class AudioClip {
 public:
  /// Throws InvalidArgument on an empty buffer, non-finite samples or a
  /// zero sample rate.
  AudioClip(std::vector<double> samples, std::uint32_t sample_rate);

  const std::vector<double>& samples() const noexcept { return samples_; }
  std::uint32_t sample_rate() const noexcept { return sample_rate_; }
  double duration() const noexcept {
    return static_cast<double>(samples_.size()) / sample_rate_;
  }

 private:
  std::vector<double> samples_;
  std::uint32_t sample_rate_;
};

struct WavReadResult {
  AudioClip clip;
  std::uint16_t source_channels = 1;
  bool downmixed() const noexcept { return source_channels > 1; }
};

/// Reads RIFF/WAVE, PCM 16-bit or IEEE float 32-bit. Multi-channel input is
/// averaged to mono.
WavReadResult read_wav(const std::filesystem::path& path);

/// Writes 16-bit PCM mono; samples are clipped to [-1, 1].
void write_wav(const AudioClip& clip, const std::filesystem::path& path);

}  // namespace envmorph
