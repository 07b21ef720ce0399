#ifndef MELOTOK_MELODY_H_
#define MELOTOK_MELODY_H_

#include <cstddef>
#include <vector>

#include "melotok/signal_io.h"

namespace melotok {

// Per-frame natural-log F0 with an explicit voicing mask. Unvoiced frames hold
// the sentinel 0.0; the mask is authoritative.
struct MelodyTrack {
  std::vector<double> lf0;
  std::vector<bool> voiced;
  double fps = kDefaultFps;

  std::size_t size() const { return lf0.size(); }
  std::size_t VoicedCount() const;
  double VoicedRate() const;

  // Throws kInvalidArgument if lengths differ, a voiced value is not finite,
  // or an unvoiced frame is not 0.0.
  void Validate() const;

  bool operator==(const MelodyTrack&) const = default;
};

struct F0Options {
  double fps = kDefaultFps;
  double f_min = 50.0;
  double f_max = 1100.0;
  // Analysis window at 16 kHz; scaled proportionally for other rates.
  std::size_t window = 1024;
  double voicing_threshold = 0.15;
  int threads = 1;
};

// Difference-function (YIN-style) F0 tracker. Frame i analyses a window
// centred on sample i*hop + hop/2 (zero-padded at the clip edges); the
// cumulative-mean-normalised difference is searched for the first dip below
// the voicing threshold, refined by parabolic interpolation. Frames with no
// dip below threshold are unvoiced.
MelodyTrack EstimateF0(const AudioClip& clip, const F0Options& options = {});

// ln(f0); throws kDomain for f0 <= 0.
double Lf0Of(double f0_hz);

// round(69 + 12*log2(f0/440)), ties away from zero; throws kDomain for
// f0 <= 0.
int SemitoneIndex(double f0_hz);

// 440 * 2^((midi - 69)/12).
double MidiToHz(double midi);

}  // namespace melotok

#endif  // MELOTOK_MELODY_H_
