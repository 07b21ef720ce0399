#ifndef MELOTOK_METRICS_H_
#define MELOTOK_METRICS_H_

#include <cstddef>
#include <optional>
#include <vector>

#include "melotok/melody.h"
#include "melotok/signal_io.h"

namespace melotok {

// N x order mel-cepstral coefficients c_1..c_order (c_0 dropped).
struct CepstralTrack {
  std::vector<double> coefficients;  // row-major
  std::size_t order = 13;
  double fps = kDefaultFps;

  std::size_t frames() const { return order == 0 ? 0 : coefficients.size() / order; }
  double at(std::size_t frame, std::size_t c) const {
    return coefficients[frame * order + c];
  }
};

struct MelCepstrumOptions {
  double fps = kDefaultFps;
  std::size_t order = 13;
  std::size_t fft_size = 1024;
  std::size_t mel_bands = 80;
  double f_low = 20.0;
  double log_floor = 1e-10;
};

// Per frame: 1024-sample Hann window centred like EstimateF0's frames,
// magnitude spectrum, 80 triangular area-normalised mel bands from 20 Hz to
// Nyquist, natural log floored at 1e-10, orthonormal DCT-II.
CepstralTrack MelCepstrum(const AudioClip& clip, const MelCepstrumOptions& options = {});

// (10 / ln 10) * sqrt(2); the dB scale factor of MCD.
double MelCepstralConstant();

// Mean over frames of (10/ln 10) * sqrt(2) * ||c_i - ĉ_i||_2, no time
// alignment.
double MelCepstralDistortion(const CepstralTrack& a, const CepstralTrack& b);

struct F0Error {
  double rmse = 0.0;  // natural-log domain; 0 when co_voiced == 0
  std::size_t co_voiced = 0;
};

F0Error F0Rmse(const MelodyTrack& a, const MelodyTrack& b);

struct SemitoneAccuracyResult {
  std::optional<double> accuracy;  // empty when no frame is voiced in both
  std::size_t co_voiced = 0;
};

SemitoneAccuracyResult SemitoneAccuracy(const MelodyTrack& a, const MelodyTrack& b);

}  // namespace melotok

#endif  // MELOTOK_METRICS_H_
