#ifndef MELOTOK_SIGNAL_IO_H_
#define MELOTOK_SIGNAL_IO_H_

#include <cstddef>
#include <filesystem>
#include <vector>

namespace melotok {

inline constexpr int kDefaultSampleRate = 16000;
inline constexpr double kDefaultFps = 50.0;

// Mono audio with samples in [-1, 1].
struct AudioClip {
  std::vector<double> samples;
  int sample_rate = kDefaultSampleRate;

  double duration_seconds() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

// Reads a RIFF/WAVE PCM16 file. Multichannel input is averaged to mono and
// integer samples are scaled by 1/32768.
AudioClip ReadWav(const std::filesystem::path& path);
AudioClip DecodeWav(const std::vector<unsigned char>& bytes);

// Writes PCM16 mono little-endian. Samples are clipped to [-1, 1] and
// rounded to the nearest step; +1.0 saturates to 32767.
void WriteWav(const AudioClip& clip, const std::filesystem::path& path);
std::vector<unsigned char> EncodeWav(const AudioClip& clip);

// Samples per frame; throws kAlignment unless sample_rate / fps is an
// integer.
std::size_t HopSize(int sample_rate, double fps);

// floor(num_samples / hop).
std::size_t FrameCount(std::size_t num_samples, int sample_rate, double fps);

}  // namespace melotok

#endif  // MELOTOK_SIGNAL_IO_H_
