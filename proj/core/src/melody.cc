#include "melotok/melody.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "melotok/error.h"
#include "parallel.h"

namespace melotok {

std::size_t MelodyTrack::VoicedCount() const {
  return static_cast<std::size_t>(std::count(voiced.begin(), voiced.end(), true));
}

double MelodyTrack::VoicedRate() const {
  return voiced.empty() ? 0.0
                        : static_cast<double>(VoicedCount()) / voiced.size();
}

void MelodyTrack::Validate() const {
  if (lf0.size() != voiced.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "melody: lf0 and voicing mask lengths differ");
  }
  for (std::size_t i = 0; i < lf0.size(); ++i) {
    if (voiced[i] ? !std::isfinite(lf0[i]) : lf0[i] != 0.0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "melody: frame " + std::to_string(i) +
                      (voiced[i] ? " has non-finite lf0"
                                 : " is unvoiced but lf0 != 0"));
    }
  }
}

double Lf0Of(double f0_hz) {
  if (!(f0_hz > 0.0)) {
    throw Error(ErrorCode::kDomain, "lf0: f0 must be positive");
  }
  return std::log(f0_hz);
}

int SemitoneIndex(double f0_hz) {
  if (!(f0_hz > 0.0)) {
    throw Error(ErrorCode::kDomain, "semitone: f0 must be positive");
  }
  return static_cast<int>(std::round(69.0 + 12.0 * std::log2(f0_hz / 440.0)));
}

double MidiToHz(double midi) { return 440.0 * std::exp2((midi - 69.0) / 12.0); }

namespace {

// Returns the refined period in samples, or 0 if the frame is unvoiced.
double AnalyseFrame(const std::vector<double>& x, std::size_t tau_min,
                    std::size_t tau_max, double threshold,
                    std::vector<double>& diff) {
  const std::size_t integration = x.size() / 2;
  diff.assign(tau_max + 2, 0.0);
  for (std::size_t tau = 1; tau <= tau_max + 1; ++tau) {
    double acc = 0.0;
    for (std::size_t j = 0; j < integration; ++j) {
      const double d = x[j] - x[j + tau];
      acc += d * d;
    }
    diff[tau] = acc;
  }
  // Cumulative-mean normalisation; a flat-zero prefix normalises to 1.
  diff[0] = 1.0;
  double running = 0.0;
  for (std::size_t tau = 1; tau <= tau_max + 1; ++tau) {
    running += diff[tau];
    diff[tau] = running > 0.0 ? diff[tau] * tau / running : 1.0;
  }

  std::size_t tau = tau_min;
  for (; tau <= tau_max; ++tau) {
    if (diff[tau] < threshold) {
      while (tau + 1 <= tau_max && diff[tau + 1] < diff[tau]) ++tau;
      break;
    }
  }
  if (tau > tau_max) return 0.0;

  const double prev = diff[tau - 1];
  const double cur = diff[tau];
  const double next = diff[tau + 1];
  const double denom = prev - 2.0 * cur + next;
  double shift = 0.0;
  if (std::abs(denom) > 1e-12) {
    shift = std::clamp(0.5 * (prev - next) / denom, -0.5, 0.5);
  }
  return static_cast<double>(tau) + shift;
}

}  // namespace

MelodyTrack EstimateF0(const AudioClip& clip, const F0Options& options) {
  if (options.f_min < 20.0 || options.f_min >= options.f_max ||
      options.f_max > clip.sample_rate / 4.0) {
    throw Error(ErrorCode::kInvalidArgument,
                "f0: need 20 <= f_min < f_max <= sample_rate/4");
  }
  const std::size_t hop = HopSize(clip.sample_rate, options.fps);
  const std::size_t window = std::max<std::size_t>(
      4, options.window * static_cast<std::size_t>(clip.sample_rate) / 16000);

  MelodyTrack track;
  track.fps = options.fps;
  if (clip.samples.size() < window) return track;

  const std::size_t tau_min = std::max<std::size_t>(
      2, static_cast<std::size_t>(std::floor(clip.sample_rate / options.f_max)));
  const std::size_t tau_max = std::min<std::size_t>(
      window / 2 - 2,
      static_cast<std::size_t>(std::ceil(clip.sample_rate / options.f_min)));
  if (tau_min >= tau_max) {
    throw Error(ErrorCode::kInvalidArgument,
                "f0: search range does not fit the analysis window");
  }

  const std::size_t frames = clip.samples.size() / hop;
  std::vector<double> f0(frames, 0.0);
  const auto& s = clip.samples;
  const long long n = static_cast<long long>(s.size());

  internal::ParallelFor(frames, options.threads, [&](std::size_t b, std::size_t e) {
    std::vector<double> x(window);
    std::vector<double> diff;
    for (std::size_t i = b; i < e; ++i) {
      const long long start = static_cast<long long>(i * hop + hop / 2) -
                              static_cast<long long>(window / 2);
      for (std::size_t j = 0; j < window; ++j) {
        const long long idx = start + static_cast<long long>(j);
        x[j] = (idx >= 0 && idx < n) ? s[static_cast<std::size_t>(idx)] : 0.0;
      }
      const double period =
          AnalyseFrame(x, tau_min, tau_max, options.voicing_threshold, diff);
      if (period > 0.0) {
        const double hz = clip.sample_rate / period;
        if (hz >= options.f_min && hz <= options.f_max) f0[i] = hz;
      }
    }
  });

  track.lf0.resize(frames, 0.0);
  track.voiced.resize(frames, false);
  for (std::size_t i = 0; i < frames; ++i) {
    if (f0[i] > 0.0) {
      track.voiced[i] = true;
      track.lf0[i] = std::log(f0[i]);
    }
  }
  return track;
}

}  // namespace melotok
