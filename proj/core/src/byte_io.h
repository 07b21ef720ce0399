#ifndef MELOTOK_SRC_BYTE_IO_H_
#define MELOTOK_SRC_BYTE_IO_H_

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "melotok/error.h"

namespace melotok::internal {

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian platforms are not supported");

// Little-endian serializer over a growable byte buffer.
class ByteWriter {
 public:
  void U8(std::uint8_t v) { bytes_.push_back(v); }
  void U16(std::uint16_t v) { PutLe(v); }
  void U32(std::uint32_t v) { PutLe(v); }
  void U64(std::uint64_t v) { PutLe(v); }
  void I16(std::int16_t v) { PutLe(static_cast<std::uint16_t>(v)); }
  void F32(float v) { PutLe(std::bit_cast<std::uint32_t>(v)); }
  void Tag(std::string_view tag) { bytes_.insert(bytes_.end(), tag.begin(), tag.end()); }
  void Raw(const unsigned char* data, std::size_t n) {
    bytes_.insert(bytes_.end(), data, data + n);
  }

  std::vector<unsigned char>& bytes() { return bytes_; }
  std::vector<unsigned char> Take() { return std::move(bytes_); }

 private:
  template <typename T>
  void PutLe(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      bytes_.push_back(static_cast<unsigned char>(v >> (8 * i)));
    }
  }

  std::vector<unsigned char> bytes_;
};

// Bounds-checked little-endian reader. Running off the end throws
// kCorruption naming `what`.
class ByteReader {
 public:
  ByteReader(const unsigned char* data, std::size_t size, std::string what)
      : data_(data), size_(size), what_(std::move(what)) {}

  std::uint8_t U8() { return GetLe<std::uint8_t>(); }
  std::uint16_t U16() { return GetLe<std::uint16_t>(); }
  std::uint32_t U32() { return GetLe<std::uint32_t>(); }
  std::uint64_t U64() { return GetLe<std::uint64_t>(); }
  std::int16_t I16() { return static_cast<std::int16_t>(GetLe<std::uint16_t>()); }
  float F32() { return std::bit_cast<float>(GetLe<std::uint32_t>()); }

  bool TagMatches(std::string_view tag) const {
    return remaining() >= tag.size() &&
           std::memcmp(data_ + pos_, tag.data(), tag.size()) == 0;
  }

  const unsigned char* Take(std::size_t n) {
    Need(n);
    const unsigned char* p = data_ + pos_;
    pos_ += n;
    return p;
  }

  std::size_t remaining() const { return size_ - pos_; }
  std::size_t position() const { return pos_; }

  void Need(std::size_t n) const {
    if (n > remaining()) {
      throw Error(ErrorCode::kCorruption,
                  what_ + ": truncated at byte " + std::to_string(pos_) +
                      " (need " + std::to_string(n) + ", have " +
                      std::to_string(remaining()) + ")");
    }
  }

 private:
  template <typename T>
  T GetLe() {
    Need(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v = static_cast<T>(v | (static_cast<T>(data_[pos_ + i]) << (8 * i)));
    }
    pos_ += sizeof(T);
    return v;
  }

  const unsigned char* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
  std::string what_;
};

std::vector<unsigned char> ReadFileBytes(const std::filesystem::path& path);
void WriteFileBytes(const std::filesystem::path& path,
                    const std::vector<unsigned char>& bytes);

}  // namespace melotok::internal

#endif  // MELOTOK_SRC_BYTE_IO_H_
