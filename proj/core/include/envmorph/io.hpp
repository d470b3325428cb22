#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace envmorph::io {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`, so a
/// reader never observes a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, std::string_view text);

/// Little-endian byte packing used by the binary formats.
class ByteWriter {
 public:
  void put_bytes(std::string_view s);
  void put_u32(std::uint32_t v);
  void put_f32(float v);
  void put_f64(double v);
  const std::vector<std::uint8_t>& bytes() const noexcept { return buf_; }

 private:
  std::vector<std::uint8_t> buf_;
};

/// Bounds-checked little-endian reader. Reads past the end return false.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

  bool get_bytes(std::size_t n, std::string& out);
  bool get_u32(std::uint32_t& out);
  bool get_u16(std::uint16_t& out);
  bool get_f32(float& out);
  bool get_f64(double& out);
  bool skip(std::size_t n);

  std::size_t remaining() const noexcept { return data_.size() - pos_; }
  std::size_t position() const noexcept { return pos_; }

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

}  // namespace envmorph::io
