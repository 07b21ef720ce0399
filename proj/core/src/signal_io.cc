#include "melotok/signal_io.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <string>

#include "byte_io.h"
#include "melotok/error.h"

namespace melotok {
namespace internal {

std::vector<unsigned char> ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open " + path.string());
  }
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (in.bad()) {
    throw Error(ErrorCode::kIo, "read failed: " + path.string());
  }
  return bytes;
}

void WriteFileBytes(const std::filesystem::path& path,
                    const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::kIo, "cannot open for writing " + path.string());
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw Error(ErrorCode::kIo, "write failed: " + path.string());
  }
}

}  // namespace internal

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

}  // namespace

AudioClip DecodeWav(const std::vector<unsigned char>& bytes) {
  internal::ByteReader r(bytes.data(), bytes.size(), "wav");
  if (!r.TagMatches("RIFF")) {
    throw Error(ErrorCode::kFormat, "wav: missing RIFF tag");
  }
  r.Take(4);
  r.U32();  // RIFF size; often wrong in the wild, chunk walk is authoritative
  if (!r.TagMatches("WAVE")) {
    throw Error(ErrorCode::kFormat, "wav: missing WAVE tag");
  }
  r.Take(4);

  bool have_fmt = false;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits = 0;
  while (r.remaining() >= 8) {
    const unsigned char* id = r.Take(4);
    const std::uint32_t chunk_size = r.U32();
    const std::string tag(reinterpret_cast<const char*>(id), 4);
    if (tag == "fmt ") {
      if (chunk_size < 16) {
        throw Error(ErrorCode::kFormat, "wav: fmt chunk too small");
      }
      internal::ByteReader f(r.Take(chunk_size), chunk_size, "wav fmt");
      std::uint16_t format = f.U16();
      channels = f.U16();
      sample_rate = f.U32();
      f.U32();  // byte rate
      f.U16();  // block align
      bits = f.U16();
      if (format == kFormatExtensible && chunk_size >= 40) {
        f.U16();  // cbSize
        f.U16();  // valid bits
        f.U32();  // channel mask
        format = f.U16();  // first two bytes of the subformat GUID
      }
      if (format != kFormatPcm || bits != 16) {
        throw Error(ErrorCode::kUnsupportedFormat,
                    "wav: only PCM 16-bit is supported (format " +
                        std::to_string(format) + ", " + std::to_string(bits) +
                        " bits)");
      }
      if (channels == 0 || sample_rate == 0) {
        throw Error(ErrorCode::kFormat, "wav: zero channels or sample rate");
      }
      have_fmt = true;
      if (chunk_size % 2 == 1 && r.remaining() > 0) r.Take(1);
    } else if (tag == "data") {
      if (!have_fmt) {
        throw Error(ErrorCode::kFormat, "wav: data chunk before fmt chunk");
      }
      const std::size_t frame_bytes = 2u * channels;
      const std::size_t n = std::min<std::size_t>(chunk_size, r.remaining()) /
                            frame_bytes;
      if (static_cast<std::size_t>(chunk_size) / frame_bytes > n) {
        throw Error(ErrorCode::kCorruption, "wav: data chunk truncated");
      }
      AudioClip clip;
      clip.sample_rate = static_cast<int>(sample_rate);
      clip.samples.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::uint16_t c = 0; c < channels; ++c) {
          sum += static_cast<double>(r.I16()) / 32768.0;
        }
        clip.samples[i] = sum / channels;
      }
      return clip;
    } else {
      r.Take(chunk_size + (chunk_size % 2));
    }
  }
  throw Error(ErrorCode::kFormat,
              have_fmt ? "wav: no data chunk" : "wav: no fmt chunk");
}

AudioClip ReadWav(const std::filesystem::path& path) {
  return DecodeWav(internal::ReadFileBytes(path));
}

std::vector<unsigned char> EncodeWav(const AudioClip& clip) {
  if (clip.sample_rate <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "wav: sample rate must be positive");
  }
  const std::size_t data_bytes = clip.samples.size() * 2;
  internal::ByteWriter w;
  w.Tag("RIFF");
  w.U32(static_cast<std::uint32_t>(36 + data_bytes));
  w.Tag("WAVE");
  w.Tag("fmt ");
  w.U32(16);
  w.U16(kFormatPcm);
  w.U16(1);
  w.U32(static_cast<std::uint32_t>(clip.sample_rate));
  w.U32(static_cast<std::uint32_t>(clip.sample_rate) * 2);
  w.U16(2);
  w.U16(16);
  w.Tag("data");
  w.U32(static_cast<std::uint32_t>(data_bytes));
  for (double s : clip.samples) {
    double scaled = std::nearbyint(std::clamp(s, -1.0, 1.0) * 32768.0);
    scaled = std::clamp(scaled, -32768.0, 32767.0);
    w.I16(static_cast<std::int16_t>(scaled));
  }
  return w.Take();
}

void WriteWav(const AudioClip& clip, const std::filesystem::path& path) {
  internal::WriteFileBytes(path, EncodeWav(clip));
}

std::size_t HopSize(int sample_rate, double fps) {
  if (sample_rate <= 0 || !(fps > 0.0) || !std::isfinite(fps)) {
    throw Error(ErrorCode::kAlignment,
                "sample rate and fps must be positive");
  }
  const double hop = sample_rate / fps;
  const double rounded = std::round(hop);
  if (rounded < 1.0 || std::abs(hop - rounded) > 1e-9 * hop) {
    throw Error(ErrorCode::kAlignment,
                "hop " + std::to_string(sample_rate) + "/" +
                    std::to_string(fps) + " is not an integral sample count");
  }
  return static_cast<std::size_t>(rounded);
}

std::size_t FrameCount(std::size_t num_samples, int sample_rate, double fps) {
  return num_samples / HopSize(sample_rate, fps);
}

}  // namespace melotok
