#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>

namespace envmorph {

inline constexpr std::size_t kFrames = 2048;
inline constexpr double kFrameRate = 204.8;
inline constexpr double kDuration = 10.0;
inline constexpr float kEnvelopeHeadroom = 1e-6f;

/// Fixed-length nonnegative amplitude profile, 2048 frames at 204.8 Hz.
///
/// Construction validates the invariants (finite, within [0, 1 + 1e-6]);
/// after that the frames are immutable.
class Envelope {
 public:
  using Frames = std::array<float, kFrames>;

  /// All-zero envelope.
  Envelope() { frames_.fill(0.0f); }

  /// Throws InvalidArgument unless `frames` has 2048 valid values.
  explicit Envelope(std::span<const float> frames);

  /// Clamps every value into [0, 1] (NaN becomes 0) before construction.
  static Envelope clamped(std::span<const float> frames);
  static Envelope clamped(std::span<const double> frames);

  std::span<const float, kFrames> frames() const noexcept { return frames_; }
  float operator[](std::size_t i) const noexcept { return frames_[i]; }
  static constexpr std::size_t size() noexcept { return kFrames; }

  float peak() const noexcept;
  double mean() const noexcept;

  friend bool operator==(const Envelope&, const Envelope&) = default;

 private:
  Frames frames_;
};

/// Seconds of the center of frame `index`.
constexpr double frame_time(std::size_t index) noexcept {
  return static_cast<double>(index) / kFrameRate;
}

/// Root-mean-square difference over the 2048 frames.
double rmse(const Envelope& a, const Envelope& b) noexcept;

void save_envelope(const Envelope& e, const std::filesystem::path& path);
Envelope load_envelope(const std::filesystem::path& path);

}  // namespace envmorph
