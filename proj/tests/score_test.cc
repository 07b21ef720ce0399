#include "melotok/score.h"

#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "melotok/error.h"
#include "melotok/rng.h"
#include "test_util.h"

namespace melotok {
namespace {

using testing::RandomScore;

std::string ToText(const MusicScore& s) {
  std::string out = "# generated\n";
  for (const Note& n : s.notes) {
    std::string phones;
    for (const auto& p : n.phonemes) phones += (phones.empty() ? "" : " ") + p;
    char buf[64];
    std::snprintf(buf, sizeof buf, "\t%d\t%.2f\t%.2f\n", n.is_rest() ? 0 : n.midi,
                  n.onset_sec, n.offset_sec);
    out += n.lyric + "\t" + phones + buf;
  }
  return out;
}

TEST(ParseScore, EmptyText) { EXPECT_TRUE(ParseScore("").notes.empty()); }

TEST(ParseScore, SingleNote) {
  const MusicScore s = ParseScore("la\tl a\t69\t0.0\t0.5");
  ASSERT_EQ(s.notes.size(), 1u);
  const Note& n = s.notes[0];
  EXPECT_EQ(n.lyric, "la");
  EXPECT_EQ(n.phonemes, (std::vector<std::string>{"l", "a"}));
  EXPECT_EQ(n.midi, 69);
  EXPECT_DOUBLE_EQ(n.duration(), 0.5);
}

TEST(ParseScore, CommentsBlankLinesAndRests) {
  const MusicScore s = ParseScore("# title\n\nla\tl a\t69\t0\t0.5\r\nAP\tAP\t0\t0.5\t0.7\n");
  ASSERT_EQ(s.notes.size(), 2u);
  EXPECT_TRUE(s.notes[1].is_rest());
}

TEST(ParseScore, OverlapNamesLine) {
  try {
    ParseScore("la\tl a\t69\t0.0\t0.5\nli\tl i\t71\t0.4\t0.9\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.code(), ErrorCode::kParse);
  }
}

TEST(ParseScore, RejectsBadLines) {
  const char* bad[] = {
      "la\tl a\t69\t0.5\t0.5",      // zero duration
      "la\tl a\t69\t0.6\t0.5",      // negative duration
      "la\tl a\t128\t0\t0.5",       // midi range
      "la\tl a\t-1\t0\t0.5",        // midi range
      "la\tl a\tC4\t0\t0.5",        // midi syntax
      "la\tl a\t69\t0",             // field count
      "la\t\t69\t0\t0.5",           // no phonemes
      "la\tl a\t69\tzero\t0.5",     // onset syntax
      "la\tl a\t69\t-0.1\t0.5",     // negative onset
  };
  for (const char* text : bad) {
    try {
      ParseScore(std::string("# ok\n") + text);
      ADD_FAILURE() << text;
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line(), 2u) << text;
    }
  }
}

TEST(Regulate, SingleNoteFrames) {
  const FramePlan p = Regulate(ParseScore("la\tl\t69\t0\t0.1"), 50.0);
  EXPECT_EQ(p.size(), 5u);
}

TEST(Regulate, CumulativeRoundingFixture) {
  const FramePlan p = Regulate(ParseScore("a\ta\t60\t0\t0.03\nb\tb\t62\t0.03\t0.06"), 50.0);
  ASSERT_EQ(p.size(), 3u);
  EXPECT_EQ(p.note_index, (std::vector<std::uint32_t>{0, 0, 1}));
  EXPECT_EQ(p.midi, (std::vector<int>{60, 60, 62}));
}

TEST(Regulate, PhonemesSplitEvenly) {
  // 7 frames over 3 phonemes: boundaries round(7/3)=2, round(14/3)=5, 7.
  const FramePlan p = Regulate(ParseScore("shang\tsh a ng\t64\t0\t0.14"), 50.0);
  ASSERT_EQ(p.size(), 7u);
  EXPECT_EQ(p.phone_table, (std::vector<std::string>{"sh", "a", "ng"}));
  EXPECT_EQ(p.phone_ids, (std::vector<std::uint32_t>{0, 0, 1, 1, 1, 2, 2}));
}

TEST(Regulate, TotalFramesIdentityOnRandomScores) {
  SplitMix64 rng(31337);
  for (int trial = 0; trial < 100; ++trial) {
    const MusicScore s = RandomScore(rng, 1 + rng.NextBelow(30));
    for (double fps : {50.0, 62.5, 100.0}) {
      const FramePlan p = Regulate(s, fps);
      EXPECT_EQ(p.size(), FrameBoundary(s.total_duration(), fps));
      EXPECT_EQ(p.midi.size(), p.size());
      for (std::size_t i = 1; i < p.size(); ++i) {
        EXPECT_GE(p.note_index[i], p.note_index[i - 1]);
      }
    }
  }
}

TEST(Regulate, ConcatenationCommutes) {
  SplitMix64 rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const MusicScore a = RandomScore(rng, 1 + rng.NextBelow(8));
    const MusicScore b = RandomScore(rng, 1 + rng.NextBelow(8));
    // Shift on the same 10 ms grid (frame-aligned at 100 fps).
    MusicScore joined = a;
    const double shift = a.total_duration();
    for (Note n : b.notes) {
      n.onset_sec += shift;
      n.offset_sec += shift;
      joined.notes.push_back(n);
    }
    const FramePlan pa = Regulate(a, 100.0);
    const FramePlan pb = Regulate(b, 100.0);
    const FramePlan pj = Regulate(joined, 100.0);
    ASSERT_EQ(pj.size(), pa.size() + pb.size());
    for (std::size_t i = 0; i < pj.size(); ++i) {
      const bool first = i < pa.size();
      const FramePlan& src = first ? pa : pb;
      const std::size_t j = first ? i : i - pa.size();
      EXPECT_EQ(pj.midi[i], src.midi[j]);
      EXPECT_EQ(pj.phone_table[pj.phone_ids[i]], src.phone_table[src.phone_ids[j]]);
      EXPECT_EQ(pj.note_index[i], src.note_index[j] + (first ? 0 : a.notes.size()));
    }
  }
}

TEST(ScoreMelody, PitchedAndRestFrames) {
  const FramePlan p = Regulate(
      ParseScore("a\ta\t69\t0\t0.04\nSP\tSP\t0\t0.04\t0.08\nb\tb\t81\t0.08\t0.1"), 50.0);
  const MelodyTrack m = ScoreMelody(p);
  ASSERT_EQ(m.size(), 5u);
  EXPECT_NEAR(m.lf0[0], 6.08677, 1e-5);
  EXPECT_TRUE(m.voiced[0]);
  EXPECT_FALSE(m.voiced[2]);
  EXPECT_EQ(m.lf0[2], 0.0);
  EXPECT_NEAR(m.lf0[4], std::log(440.0) + std::log(2.0), 1e-12);
  m.Validate();
}

TEST(ScoreMelody, PiecewiseConstantPerNote) {
  SplitMix64 rng(4);
  const MusicScore s = RandomScore(rng, 20);
  const FramePlan p = Regulate(s, 50.0);
  const MelodyTrack m = ScoreMelody(p);
  for (std::size_t i = 1; i < p.size(); ++i) {
    if (p.note_index[i] == p.note_index[i - 1]) {
      EXPECT_EQ(m.lf0[i], m.lf0[i - 1]);
      EXPECT_EQ(m.voiced[i], m.voiced[i - 1]);
    }
  }
}

TEST(ParseScore, TextRoundTripOfGeneratedScores) {
  SplitMix64 rng(77);
  const MusicScore s = RandomScore(rng, 12);
  const MusicScore back = ParseScore(ToText(s));
  ASSERT_EQ(back.notes.size(), s.notes.size());
  EXPECT_EQ(Regulate(back, 50.0), Regulate(s, 50.0));
}

TEST(PlanFile, RoundTripAndErrors) {
  SplitMix64 rng(12);
  const FramePlan p = Regulate(RandomScore(rng, 15), 50.0);
  const auto bytes = SerializePlan(p);
  EXPECT_EQ(ParsePlan(bytes), p);
  auto truncated = bytes;
  truncated.pop_back();
  EXPECT_THROW(ParsePlan(truncated), Error);
  auto magic = bytes;
  magic[0] = 'Q';
  EXPECT_THROW(ParsePlan(magic), Error);
}

}  // namespace
}  // namespace melotok
