#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nfd/errors.hpp"

namespace nfd {

/// Append-only little-endian encoder.
class ByteWriter {
 public:
  void bytes(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u16(std::uint16_t v) { put_le(v); }
  void u32(std::uint32_t v) { put_le(v); }
  void f32(float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_le(bits);
  }
  const std::string& data() const { return buf_; }
  std::string take() { return std::move(buf_); }

 private:
  template <typename T>
  void put_le(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  std::string buf_;
};

/// Bounds-checked decoder; every failure reports the byte offset.
class ByteReader {
 public:
  explicit ByteReader(std::string_view data, std::size_t base = 0) : data_(data), base_(base) {}

  std::size_t offset() const { return base_ + pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }
  bool at_end() const { return pos_ == data_.size(); }

  void expect_magic(std::string_view magic) {
    const std::size_t at = offset();
    if (remaining() < magic.size() || data_.substr(pos_, magic.size()) != magic)
      throw FormatError("bad magic, expected '" + std::string(magic) + "'", at);
    pos_ += magic.size();
  }
  bool peek_magic(std::string_view magic) const {
    return remaining() >= magic.size() && data_.substr(pos_, magic.size()) == magic;
  }
  std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)[0]); }
  std::uint16_t u16() { return get_le<std::uint16_t>(); }
  std::uint32_t u32() { return get_le<std::uint32_t>(); }
  std::uint32_t u32_be() {
    auto s = take(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | static_cast<unsigned char>(s[i]);
    return v;
  }
  float f32() {
    std::uint32_t bits = get_le<std::uint32_t>();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }
  std::string_view take(std::size_t n) {
    if (remaining() < n)
      throw FormatError("truncated payload: need " + std::to_string(n) + " bytes, have " +
                            std::to_string(remaining()),
                        offset());
    auto s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  /// Throws unless `count * unit` bytes remain (guards against dim overflow).
  void require(std::size_t count, std::size_t unit, const char* what) {
    if (unit != 0 && count > remaining() / unit)
      throw FormatError(std::string(what) + " exceeds remaining payload", offset());
  }

 private:
  template <typename T>
  T get_le() {
    auto s = take(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<unsigned char>(s[i])) << (8 * i);
    return v;
  }
  std::string_view data_;
  std::size_t base_;
  std::size_t pos_ = 0;
};

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view bytes);

}  // namespace nfd
