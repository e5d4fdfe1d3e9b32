#pragma once

// Little-endian readers/writers shared by the .nnw and .imt containers.

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include <zlib.h>

#include "proa/errors.hpp"

namespace proa::detail {

static_assert(std::endian::native == std::endian::little, "big-endian hosts are not supported");

class ByteWriter {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    buf_.insert(buf_.end(), p, p + n);
  }
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u32(std::uint32_t v) { bytes(&v, sizeof v); }
  void f32(float v) { bytes(&v, sizeof v); }

  /// Appends the CRC-32 of everything written so far.
  void checksum() { u32(crc(buf_)); }

  std::vector<unsigned char> take() { return std::move(buf_); }

  static std::uint32_t crc(std::span<const unsigned char> data) {
    return static_cast<std::uint32_t>(
        ::crc32(0L, data.data(), static_cast<uInt>(data.size())));
  }

 private:
  std::vector<unsigned char> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const unsigned char> data) : data_(data) {}

  std::size_t offset() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return data_.size() - pos_; }

  void need(std::size_t n, const std::string& section) const {
    if (remaining() < n) {
      throw ParseError("truncated file: missing " + section, pos_);
    }
  }
  std::uint8_t u8(const std::string& section) {
    need(1, section);
    return data_[pos_++];
  }
  std::uint32_t u32(const std::string& section) {
    std::uint32_t v;
    read(&v, sizeof v, section);
    return v;
  }
  float f32(const std::string& section) {
    float v;
    read(&v, sizeof v, section);
    return v;
  }
  void read(void* out, std::size_t n, const std::string& section) {
    need(n, section);
    std::memcpy(out, data_.data() + pos_, n);
    pos_ += n;
  }
  void expect_magic(const char (&magic)[5], const std::string& what) {
    need(4, what + " magic");
    if (std::memcmp(data_.data(), magic, 4) != 0) {
      throw ParseError("not a " + what + " file: bad magic", 0);
    }
    pos_ = 4;
  }
  /// Reads the trailing CRC-32 and compares it with the bytes before it.
  void verify_checksum(const std::string& what) {
    const std::size_t body = pos_;
    const std::uint32_t stored = u32("checksum");
    const std::uint32_t actual = ByteWriter::crc(data_.first(body));
    if (stored != actual) {
      throw ChecksumError(what + " checksum mismatch: stored " + std::to_string(stored) +
                          ", computed " + std::to_string(actual));
    }
    if (remaining() != 0) {
      throw ParseError("trailing bytes after checksum", pos_);
    }
  }

 private:
  std::span<const unsigned char> data_;
  std::size_t pos_ = 0;
};

std::vector<unsigned char> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const unsigned char> bytes);

}  // namespace proa::detail
