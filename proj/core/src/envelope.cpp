#include "envmorph/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "envmorph/errors.hpp"
#include "envmorph/io.hpp"

namespace envmorph {
namespace {

constexpr char kMagic[] = "ENV1";
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kFileSize = 4 + 4 + 4 + 8 + 4 * kFrames;

bool valid_frame(float v) {
  return std::isfinite(v) && v >= 0.0f && v <= 1.0f + kEnvelopeHeadroom;
}

template <typename T>
Envelope clamp_into(std::span<const T> frames) {
  if (frames.size() != kFrames) {
    throw InvalidArgument("envelope needs " + std::to_string(kFrames) + " frames, got " +
                          std::to_string(frames.size()));
  }
  Envelope::Frames out;
  for (std::size_t i = 0; i < kFrames; ++i) {
    const T v = frames[i];
    out[i] = std::isnan(v) ? 0.0f : static_cast<float>(std::clamp<T>(v, T(0), T(1)));
  }
  return Envelope(out);
}

}  // namespace

Envelope::Envelope(std::span<const float> frames) {
  if (frames.size() != kFrames) {
    throw InvalidArgument("envelope needs " + std::to_string(kFrames) + " frames, got " +
                          std::to_string(frames.size()));
  }
  for (std::size_t i = 0; i < kFrames; ++i) {
    if (!valid_frame(frames[i])) {
      throw InvalidArgument("envelope frame " + std::to_string(i) + " out of range: " +
                            std::to_string(frames[i]));
    }
    frames_[i] = frames[i];
  }
}

Envelope Envelope::clamped(std::span<const float> frames) { return clamp_into(frames); }
Envelope Envelope::clamped(std::span<const double> frames) { return clamp_into(frames); }

float Envelope::peak() const noexcept { return *std::max_element(frames_.begin(), frames_.end()); }

double Envelope::mean() const noexcept {
  double s = 0.0;
  for (float v : frames_) s += v;
  return s / static_cast<double>(kFrames);
}

double rmse(const Envelope& a, const Envelope& b) noexcept {
  // (a-b)^2 and (b-a)^2 are bitwise equal, and the index-ordered sum is the
  // same in both argument orders, so rmse is exactly symmetric.
  double sum = 0.0;
  for (std::size_t i = 0; i < kFrames; ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(kFrames));
}

void save_envelope(const Envelope& e, const std::filesystem::path& path) {
  io::ByteWriter w;
  w.put_bytes(kMagic);
  w.put_u32(kVersion);
  w.put_u32(static_cast<std::uint32_t>(kFrames));
  w.put_f64(kFrameRate);
  for (float v : e.frames()) w.put_f32(v);
  io::write_file_atomic(path, w.bytes());
}

Envelope load_envelope(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  const auto where = " in " + path.string();
  io::ByteReader r(bytes);
  std::string magic;
  std::uint32_t version = 0, count = 0;
  double rate = 0.0;
  if (!r.get_bytes(4, magic) || magic != kMagic) throw CorruptFile("bad magic" + where);
  if (!r.get_u32(version) || version != kVersion) throw CorruptFile("unsupported version" + where);
  if (!r.get_u32(count) || count != kFrames) throw CorruptFile("frame count is not 2048" + where);
  if (!r.get_f64(rate) || rate != kFrameRate) throw CorruptFile("unexpected frame rate" + where);
  if (bytes.size() != kFileSize) throw CorruptFile("payload size mismatch" + where);
  Envelope::Frames frames;
  for (auto& v : frames) {
    r.get_f32(v);
    if (!valid_frame(v)) throw CorruptFile("frame value out of range" + where);
  }
  return Envelope(frames);
}

}  // namespace envmorph
