#include <algorithm>
#include <cmath>
#include <string>

#include "envmorph/audio.hpp"
#include "envmorph/errors.hpp"
#include "envmorph/io.hpp"

namespace envmorph {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

}  // namespace

AudioClip::AudioClip(std::vector<double> samples, std::uint32_t sample_rate)
    : samples_(std::move(samples)), sample_rate_(sample_rate) {
  if (sample_rate_ == 0) throw InvalidArgument("sample rate must be positive");
  if (samples_.empty()) throw InvalidArgument("audio clip is empty");
  for (double s : samples_) {
    if (!std::isfinite(s)) throw InvalidArgument("audio clip contains non-finite samples");
  }
}

WavReadResult read_wav(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  const auto where = " in " + path.string();
  io::ByteReader r(bytes);

  std::string tag;
  std::uint32_t riff_size = 0;
  if (!r.get_bytes(4, tag) || tag != "RIFF") throw CorruptFile("not a RIFF file" + where);
  if (!r.get_u32(riff_size) || !r.get_bytes(4, tag) || tag != "WAVE") {
    throw CorruptFile("not a WAVE file" + where);
  }

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::size_t data_pos = 0, data_size = 0;
  bool have_data = false;

  while (r.remaining() >= 8 && !have_data) {
    std::string id;
    std::uint32_t size = 0;
    r.get_bytes(4, id);
    r.get_u32(size);
    if (id == "fmt ") {
      if (size < 16 || r.remaining() < size) throw CorruptFile("truncated fmt chunk" + where);
      std::uint32_t byte_rate = 0;
      std::uint16_t align = 0;
      r.get_u16(format);
      r.get_u16(channels);
      r.get_u32(rate);
      r.get_u32(byte_rate);
      r.get_u16(align);
      r.get_u16(bits);
      std::size_t consumed = 16;
      if (format == kFormatExtensible && size >= 26) {
        std::uint16_t ext_size = 0, valid_bits = 0;
        std::uint32_t mask = 0;
        r.get_u16(ext_size);
        r.get_u16(valid_bits);
        r.get_u32(mask);
        r.get_u16(format);  // first two bytes of the sub-format GUID
        consumed = 26;
      }
      r.skip(size - consumed + (size & 1));
      have_fmt = true;
    } else if (id == "data") {
      data_pos = r.position();
      data_size = std::min<std::size_t>(size, r.remaining());
      have_data = true;
    } else {
      if (!r.skip(size + (size & 1))) break;
    }
  }
  if (!have_fmt) throw CorruptFile("missing fmt chunk" + where);
  if (!have_data) throw CorruptFile("missing data chunk" + where);
  if (channels == 0) throw CorruptFile("zero channels" + where);

  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool float32 = format == kFormatFloat && bits == 32;
  if (!pcm16 && !float32) {
    throw InvalidArgument("unsupported WAV encoding (need PCM16 or float32)" + where);
  }

  const std::size_t frame_bytes = static_cast<std::size_t>(channels) * (bits / 8);
  const std::size_t n = data_size / frame_bytes;
  if (n == 0) throw InvalidArgument("WAV has no samples" + where);

  io::ByteReader d(std::span<const std::uint8_t>(bytes).subspan(data_pos, data_size));
  std::vector<double> mono(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::uint16_t c = 0; c < channels; ++c) {
      if (pcm16) {
        std::uint16_t raw = 0;
        d.get_u16(raw);
        acc += static_cast<std::int16_t>(raw) / 32768.0;
      } else {
        float v = 0.0f;
        d.get_f32(v);
        acc += v;
      }
    }
    mono[i] = acc / channels;
  }
  return WavReadResult{AudioClip(std::move(mono), rate), channels};
}

void write_wav(const AudioClip& clip, const std::filesystem::path& path) {
  const auto& s = clip.samples();
  const auto data_bytes = static_cast<std::uint32_t>(s.size() * 2);
  io::ByteWriter w;
  w.put_bytes("RIFF");
  w.put_u32(36 + data_bytes);
  w.put_bytes("WAVE");
  w.put_bytes("fmt ");
  w.put_u32(16);
  w.put_u32(kFormatPcm | (1u << 16));  // format tag, channel count
  w.put_u32(clip.sample_rate());
  w.put_u32(clip.sample_rate() * 2);
  w.put_u32(2u | (16u << 16));  // block align, bits per sample
  w.put_bytes("data");
  w.put_u32(data_bytes);
  auto bytes = w.bytes();
  bytes.reserve(bytes.size() + data_bytes);
  for (double v : s) {
    const auto q = static_cast<std::int16_t>(std::lround(std::clamp(v, -1.0, 1.0) * 32767.0));
    const auto u = static_cast<std::uint16_t>(q);
    bytes.push_back(static_cast<std::uint8_t>(u & 0xFF));
    bytes.push_back(static_cast<std::uint8_t>(u >> 8));
  }
  io::write_file_atomic(path, bytes);
}

}  // namespace envmorph
