#include "melotok/metrics.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "fft.h"
#include "melotok/error.h"

namespace melotok {

namespace {

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// bands x bins weights; every band sums to 1.
std::vector<std::vector<double>> MelFilterbank(std::size_t bands, std::size_t fft_size,
                                               int sample_rate, double f_low) {
  const std::size_t bins = fft_size / 2 + 1;
  const double nyquist = sample_rate / 2.0;
  const double mel_lo = HzToMel(f_low);
  const double mel_hi = HzToMel(nyquist);
  std::vector<double> edges(bands + 2);
  for (std::size_t b = 0; b < edges.size(); ++b) {
    edges[b] = MelToHz(mel_lo + (mel_hi - mel_lo) * b / (bands + 1));
  }
  const double bin_hz = static_cast<double>(sample_rate) / fft_size;
  std::vector<std::vector<double>> fb(bands, std::vector<double>(bins, 0.0));
  for (std::size_t b = 0; b < bands; ++b) {
    const double lo = edges[b], mid = edges[b + 1], hi = edges[b + 2];
    double sum = 0.0;
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = k * bin_hz;
      const double w = std::max(0.0, std::min((f - lo) / (mid - lo), (hi - f) / (hi - mid)));
      fb[b][k] = w;
      sum += w;
    }
    if (sum <= 0.0) {
      // Narrower than a bin: take the bin nearest the centre.
      const auto k = std::min(bins - 1, static_cast<std::size_t>(std::lround(mid / bin_hz)));
      fb[b][k] = 1.0;
      sum = 1.0;
    }
    for (double& w : fb[b]) w /= sum;
  }
  return fb;
}

}  // namespace

CepstralTrack MelCepstrum(const AudioClip& clip, const MelCepstrumOptions& options) {
  if (options.order == 0 || options.order >= options.mel_bands) {
    throw Error(ErrorCode::kInvalidArgument,
                "mel_cepstrum: order must be in [1, mel_bands)");
  }
  const std::size_t n_fft = options.fft_size;
  if (n_fft < 4 || (n_fft & (n_fft - 1)) != 0) {
    throw Error(ErrorCode::kInvalidArgument, "mel_cepstrum: fft size must be a power of two");
  }
  const std::size_t hop = HopSize(clip.sample_rate, options.fps);
  const std::size_t frames = clip.samples.size() / hop;
  const std::size_t bands = options.mel_bands;

  CepstralTrack track;
  track.order = options.order;
  track.fps = options.fps;
  track.coefficients.resize(frames * options.order);
  if (frames == 0) return track;

  const auto fb = MelFilterbank(bands, n_fft, clip.sample_rate, options.f_low);
  std::vector<double> window(n_fft);
  for (std::size_t j = 0; j < n_fft; ++j) {
    window[j] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * j / n_fft);
  }
  // Orthonormal DCT-II rows 1..order.
  std::vector<double> dct(options.order * bands);
  for (std::size_t c = 0; c < options.order; ++c) {
    for (std::size_t m = 0; m < bands; ++m) {
      dct[c * bands + m] = std::sqrt(2.0 / bands) *
                           std::cos(std::numbers::pi * (c + 1) * (m + 0.5) / bands);
    }
  }

  const long long n = static_cast<long long>(clip.samples.size());
  std::vector<std::complex<double>> spec(n_fft);
  std::vector<double> mag(n_fft / 2 + 1);
  std::vector<double> log_mel(bands);
  for (std::size_t i = 0; i < frames; ++i) {
    const long long start = static_cast<long long>(i * hop + hop / 2) -
                            static_cast<long long>(n_fft / 2);
    for (std::size_t j = 0; j < n_fft; ++j) {
      const long long idx = start + static_cast<long long>(j);
      const double s = (idx >= 0 && idx < n) ? clip.samples[static_cast<std::size_t>(idx)] : 0.0;
      spec[j] = {s * window[j], 0.0};
    }
    internal::Fft(spec);
    for (std::size_t k = 0; k < mag.size(); ++k) mag[k] = std::abs(spec[k]);
    for (std::size_t b = 0; b < bands; ++b) {
      double e = 0.0;
      for (std::size_t k = 0; k < mag.size(); ++k) e += fb[b][k] * mag[k];
      log_mel[b] = std::log(std::max(e, options.log_floor));
    }
    for (std::size_t c = 0; c < options.order; ++c) {
      double acc = 0.0;
      for (std::size_t m = 0; m < bands; ++m) acc += dct[c * bands + m] * log_mel[m];
      track.coefficients[i * options.order + c] = acc;
    }
  }
  return track;
}

double MelCepstralConstant() { return 10.0 / std::numbers::ln10 * std::numbers::sqrt2; }

double MelCepstralDistortion(const CepstralTrack& a, const CepstralTrack& b) {
  if (a.order != b.order || a.frames() != b.frames() || a.fps != b.fps) {
    throw Error(ErrorCode::kInvalidArgument,
                "mcd: tracks differ in frame count, order or fps");
  }
  const std::size_t n = a.frames();
  if (n == 0) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double sq = 0.0;
    for (std::size_t c = 0; c < a.order; ++c) {
      const double d = a.at(i, c) - b.at(i, c);
      sq += d * d;
    }
    total += std::sqrt(sq);
  }
  return MelCepstralConstant() * total / static_cast<double>(n);
}

namespace {

void CheckComparable(const MelodyTrack& a, const MelodyTrack& b, const char* what) {
  if (a.size() != b.size() || a.voiced.size() != a.size() ||
      b.voiced.size() != b.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(what) + ": tracks differ in length (" +
                    std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
  }
  if (a.fps != b.fps) {
    throw Error(ErrorCode::kInvalidArgument, std::string(what) + ": fps differ");
  }
}

}  // namespace

F0Error F0Rmse(const MelodyTrack& a, const MelodyTrack& b) {
  CheckComparable(a, b, "f0_rmse");
  F0Error out;
  double sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a.voiced[i] || !b.voiced[i]) continue;
    const double d = a.lf0[i] - b.lf0[i];
    sq += d * d;
    ++out.co_voiced;
  }
  if (out.co_voiced > 0) out.rmse = std::sqrt(sq / static_cast<double>(out.co_voiced));
  return out;
}

SemitoneAccuracyResult SemitoneAccuracy(const MelodyTrack& a, const MelodyTrack& b) {
  CheckComparable(a, b, "semitone_accuracy");
  SemitoneAccuracyResult out;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a.voiced[i] || !b.voiced[i]) continue;
    ++out.co_voiced;
    if (SemitoneIndex(std::exp(a.lf0[i])) == SemitoneIndex(std::exp(b.lf0[i]))) ++hits;
  }
  if (out.co_voiced > 0) {
    out.accuracy = static_cast<double>(hits) / static_cast<double>(out.co_voiced);
  }
  return out;
}

}  // namespace melotok
