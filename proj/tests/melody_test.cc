#include "melotok/melody.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "melotok/error.h"
#include "test_util.h"

namespace melotok {
namespace {

double MedianVoicedHz(const MelodyTrack& t) {
  std::vector<double> hz;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t.voiced[i]) hz.push_back(std::exp(t.lf0[i]));
  }
  if (hz.empty()) return 0.0;
  std::nth_element(hz.begin(), hz.begin() + hz.size() / 2, hz.end());
  return hz[hz.size() / 2];
}

TEST(EstimateF0, Sine440) {
  const MelodyTrack t = EstimateF0(testing::Sine(440.0, 1.0));
  ASSERT_EQ(t.size(), 50u);
  EXPECT_GE(t.VoicedRate(), 0.9);
  EXPECT_NEAR(MedianVoicedHz(t), 440.0, 1.0);
  t.Validate();
}

TEST(EstimateF0, SilenceIsUnvoiced) {
  AudioClip silence;
  silence.samples.assign(16000, 0.0);
  const MelodyTrack t = EstimateF0(silence);
  ASSERT_EQ(t.size(), 50u);
  EXPECT_EQ(t.VoicedCount(), 0u);
  for (double v : t.lf0) EXPECT_EQ(v, 0.0);
}

TEST(EstimateF0, WhiteNoiseRarelyVoiced) {
  const MelodyTrack t = EstimateF0(testing::WhiteNoise(1.0, 1234));
  EXPECT_LT(t.VoicedRate(), 0.2);
}

TEST(EstimateF0, SineSweepWithinOnePercent) {
  const F0Options opts;
  for (double hz = opts.f_min * 1.2; hz <= opts.f_max * 0.8; hz *= 1.13) {
    const MelodyTrack t = EstimateF0(testing::Sine(hz, 0.5, 16000, 0.4, 0.3), opts);
    ASSERT_GT(t.VoicedCount(), 0u) << hz;
    EXPECT_LE(std::abs(MedianVoicedHz(t) - hz), 0.01 * hz) << hz;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (!t.voiced[i]) continue;
      EXPECT_GT(t.lf0[i], std::log(20.0));
      EXPECT_LT(t.lf0[i], std::log(4000.0));
    }
  }
}

TEST(EstimateF0, ShiftCovariantByOneHop) {
  // Two notes separated by silence so voicing changes mid-clip.
  AudioClip clip = testing::Sine(220.0, 0.4);
  clip.samples.resize(clip.samples.size() + 3200, 0.0);
  const AudioClip tail = testing::Sine(330.0, 0.4);
  clip.samples.insert(clip.samples.end(), tail.samples.begin(), tail.samples.end());

  AudioClip delayed = clip;
  delayed.samples.insert(delayed.samples.begin(), 320, 0.0);

  const MelodyTrack a = EstimateF0(clip);
  const MelodyTrack b = EstimateF0(delayed);
  ASSERT_EQ(b.size(), a.size() + 1);
  for (std::size_t i = 2; i + 2 < a.size(); ++i) {
    EXPECT_EQ(a.voiced[i], b.voiced[i + 1]) << i;
    EXPECT_EQ(a.lf0[i], b.lf0[i + 1]) << i;
  }
}

TEST(EstimateF0, ThreadCountDoesNotChangeOutput) {
  const AudioClip clip = testing::Sine(300.0, 0.7);
  F0Options one, four;
  four.threads = 4;
  EXPECT_EQ(EstimateF0(clip, one), EstimateF0(clip, four));
}

TEST(EstimateF0, ShortClipGivesEmptyTrack) {
  const MelodyTrack t = EstimateF0(testing::Sine(440.0, 0.01));
  EXPECT_EQ(t.size(), 0u);
}

TEST(EstimateF0, InvalidRange) {
  const AudioClip clip = testing::Sine(440.0, 0.2);
  for (auto [lo, hi] : {std::pair{10.0, 500.0}, std::pair{500.0, 400.0},
                        std::pair{50.0, 5000.0}}) {
    F0Options o;
    o.f_min = lo;
    o.f_max = hi;
    try {
      EstimateF0(clip, o);
      FAIL() << lo << " " << hi;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
    }
  }
  F0Options bad_fps;
  bad_fps.fps = 60.0;
  EXPECT_THROW(EstimateF0(clip, bad_fps), Error);
}

TEST(Lf0Of, Examples) {
  EXPECT_NEAR(Lf0Of(std::exp(1.0)), 1.0, 1e-15);
  EXPECT_NEAR(Lf0Of(440.0), 6.08677, 1e-5);
  EXPECT_EQ(Lf0Of(1.0), 0.0);
  EXPECT_THROW(Lf0Of(0.0), Error);
  EXPECT_THROW(Lf0Of(-3.0), Error);
}

TEST(SemitoneIndex, Examples) {
  EXPECT_EQ(SemitoneIndex(440.0), 69);
  EXPECT_EQ(SemitoneIndex(220.0), 57);
  EXPECT_EQ(SemitoneIndex(466.16), 70);
  try {
    SemitoneIndex(0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDomain);
  }
}

TEST(SemitoneIndex, MonotoneAndLf0StrictlyIncreasing) {
  int prev_idx = SemitoneIndex(20.0);
  double prev_lf0 = Lf0Of(20.0);
  for (double f = 20.5; f < 4000.0; f *= 1.003) {
    const int idx = SemitoneIndex(f);
    const double l = Lf0Of(f);
    EXPECT_GE(idx, prev_idx);
    EXPECT_GT(l, prev_lf0);
    prev_idx = idx;
    prev_lf0 = l;
  }
}

TEST(MelodyTrack, ValidateRejectsBadSentinel) {
  MelodyTrack t;
  t.lf0 = {0.0, 5.0};
  t.voiced = {false, false};
  EXPECT_THROW(t.Validate(), Error);
  t.voiced = {false, true};
  EXPECT_NO_THROW(t.Validate());
  t.voiced = {false};
  EXPECT_THROW(t.Validate(), Error);
}

}  // namespace
}  // namespace melotok
