#ifndef MELOTOK_STREAM_H_
#define MELOTOK_STREAM_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "melotok/melody.h"
#include "melotok/quantize.h"

namespace melotok {

// S parallel token streams over the same N frames. `num_frames` is explicit
// so a zero-stream container still knows its length.
struct TokenStream {
  std::vector<TokenSequence> streams;
  std::vector<std::uint32_t> ks;
  std::size_t num_frames = 0;
  float fps = static_cast<float>(kDefaultFps);

  std::size_t size() const { return streams.size(); }

  // Throws kEncode when a stream length differs from num_frames or an id is
  // out of its codebook range.
  void Validate() const;

  bool operator==(const TokenStream&) const = default;
};

// Builds a validated TokenStream with num_frames taken from the streams.
TokenStream MakeTokenStream(std::vector<TokenSequence> streams,
                            std::vector<std::uint32_t> ks,
                            float fps = static_cast<float>(kDefaultFps));

// The vocoder-facing intermediate: tokens plus optional melody.
struct Bundle {
  TokenStream tokens;
  std::optional<MelodyTrack> melody;

  void Validate() const;

  bool operator==(const Bundle&) const = default;
};

// Bits needed for one id of a K-entry codebook: ceil(log2 K), at least 1.
unsigned TokenBitWidth(std::uint32_t k);

// TOKS container. Little-endian header
//   "TOKS" | version u16 = 1 | fps f32 | S u8 | S x K u32 | N u64 | melody u8
// then each stream's ids packed MSB-first at TokenBitWidth(K) bits, padded to
// a byte boundary per stream; then, with melody, N f32 lf0 values and a
// ceil(N/8)-byte voicing mask (frame i at bit 7 - i%8 of byte i/8).
// Melody values are stored as f32.
std::vector<unsigned char> Pack(const Bundle& bundle);
Bundle Unpack(std::span<const unsigned char> bytes);

// Header + payload byte count for a bundle of this shape.
std::size_t PackedSize(std::span<const std::uint32_t> ks, std::size_t frames,
                       bool with_melody);

void WriteBundle(const Bundle& bundle, const std::filesystem::path& path);
Bundle ReadBundle(const std::filesystem::path& path);

inline constexpr unsigned kMelodyBitsPerFrame = 32;

// fps * (sum_j TokenBitWidth(K_j) + melody_bits_per_frame).
double Bitrate(std::span<const std::uint32_t> ks, double fps,
               unsigned melody_bits_per_frame);
double Bitrate(const Bundle& bundle);

// FMAT feature files. Little-endian:
//   "FMAT" | version u16 = 1 | D u32 | N u64 | fps f32 |
//   name_len u16 | name bytes (UTF-8) | layer u16 | N x D f32 row-major
std::vector<unsigned char> SerializeFeatures(const FeatureMatrix& features);
FeatureMatrix ParseFeatures(std::span<const unsigned char> bytes);
void WriteFeatures(const FeatureMatrix& features,
                   const std::filesystem::path& path);
FeatureMatrix ReadFeatures(const std::filesystem::path& path);

}  // namespace melotok

#endif  // MELOTOK_STREAM_H_
