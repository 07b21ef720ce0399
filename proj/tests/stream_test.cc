#include "melotok/stream.h"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "melotok/error.h"
#include "test_util.h"

namespace melotok {
namespace {

Bundle RandomBundle(SplitMix64& rng) {
  Bundle b;
  const std::size_t s = rng.NextBelow(5);
  const std::size_t n = rng.NextBelow(300);
  b.tokens.num_frames = n;
  b.tokens.fps = rng.NextBelow(2) ? 50.0f : 75.0f;
  static constexpr std::uint32_t kChoices[] = {1, 2, 3, 7, 128, 129, 1000, 1024, 65536, 4000000000u};
  for (std::size_t j = 0; j < s; ++j) {
    const std::uint32_t k = kChoices[rng.NextBelow(std::size(kChoices))];
    b.tokens.ks.push_back(k);
    TokenSequence ids(n);
    for (auto& id : ids) id = static_cast<TokenId>(rng.NextBelow(k));
    b.tokens.streams.push_back(std::move(ids));
  }
  if (rng.NextBelow(2)) {
    MelodyTrack m;
    m.fps = b.tokens.fps;
    for (std::size_t i = 0; i < n; ++i) {
      const bool v = rng.NextBelow(3) != 0;
      m.voiced.push_back(v);
      // f32-representable so the f32 payload round-trips exactly.
      m.lf0.push_back(v ? static_cast<float>(std::log(60.0 + 900.0 * rng.NextDouble())) : 0.0);
    }
    b.melody = std::move(m);
  }
  return b;
}

TEST(Pack, EmptyHeaderIs24Bytes) {
  Bundle b;
  b.tokens.ks = {128};
  b.tokens.streams = {{}};
  const auto bytes = Pack(b);
  EXPECT_EQ(bytes.size(), 24u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "TOKS");
  EXPECT_EQ(Unpack(bytes), b);
}

TEST(Pack, EightZeroIdsAtSevenBits) {
  Bundle b = {MakeTokenStream({TokenSequence(8, 0)}, {128}), std::nullopt};
  const auto bytes = Pack(b);
  ASSERT_EQ(bytes.size(), 24u + 7u);
  for (std::size_t i = 24; i < bytes.size(); ++i) EXPECT_EQ(bytes[i], 0);
}

TEST(Pack, MsbFirstLayout) {
  // K=4: ids 1,2,3 -> 01 10 11 (pad 00) = 0x6C.
  Bundle b = {MakeTokenStream({{1, 2, 3}}, {4}), std::nullopt};
  auto bytes = Pack(b);
  ASSERT_EQ(bytes.size(), 25u);
  EXPECT_EQ(bytes[24], 0x6C);

  // Two streams are byte-aligned independently; K=1 uses one bit per id.
  Bundle two = {MakeTokenStream({{0, 0, 0}, {1, 0, 1}}, {1, 2}), std::nullopt};
  bytes = Pack(two);
  ASSERT_EQ(bytes.size(), 28u + 2u);
  EXPECT_EQ(bytes[28], 0x00);
  EXPECT_EQ(bytes[29], 0xA0);
}

TEST(Pack, MelodySectionLayout) {
  Bundle b;
  b.tokens.num_frames = 9;
  MelodyTrack m;
  m.lf0 = {std::log(440.0f), 0, 0, 0, 0, 0, 0, 0, 1.5};
  m.voiced = {true, false, false, false, false, false, false, false, true};
  b.melody = m;
  const auto bytes = Pack(b);
  // Header without streams: 4+2+4+1+8+1 = 20, then 9 f32, then 2 mask bytes.
  ASSERT_EQ(bytes.size(), 20u + 36u + 2u);
  EXPECT_EQ(bytes[56], 0x80);
  EXPECT_EQ(bytes[57], 0x80);
  EXPECT_EQ(Unpack(bytes), b);
}

TEST(Pack, RandomBundlesRoundTripAndMatchSizeFormula) {
  SplitMix64 rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    const Bundle b = RandomBundle(rng);
    const auto bytes = Pack(b);
    EXPECT_EQ(bytes.size(), PackedSize(b.tokens.ks, b.tokens.num_frames, b.melody.has_value()));
    const Bundle back = Unpack(bytes);
    ASSERT_EQ(back, b) << "trial " << trial;
    EXPECT_EQ(Pack(back), bytes);
  }
}

TEST(Pack, RejectsInvariantViolations) {
  Bundle b;
  b.tokens.ks = {4};
  b.tokens.streams = {{0, 4}};
  b.tokens.num_frames = 2;
  try {
    Pack(b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEncode);
  }
  b.tokens.streams = {{0, 1}};
  MelodyTrack m;
  m.lf0 = {0.0};
  m.voiced = {false};
  b.melody = m;
  EXPECT_THROW(Pack(b), Error);
  m.lf0 = {0.0, 0.0};
  m.voiced = {false, false};
  m.fps = 100;
  b.melody = m;
  EXPECT_THROW(Pack(b), Error);
}

TEST(Unpack, Errors) {
  Bundle b = {MakeTokenStream({{0, 1, 2}}, {3}), std::nullopt};
  const auto good = Pack(b);
  auto expect_code = [](std::vector<unsigned char> bytes, ErrorCode code) {
    try {
      Unpack(bytes);
      ADD_FAILURE() << "no error";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), code) << e.what();
    }
  };
  auto magic = good;
  magic[0] = 'X';
  expect_code(magic, ErrorCode::kFormat);
  auto version = good;
  version[4] = 2;
  expect_code(version, ErrorCode::kFormat);
  auto truncated = good;
  truncated.pop_back();
  expect_code(truncated, ErrorCode::kCorruption);
  auto out_of_range = good;
  out_of_range.back() = 0xFF;  // ids 3,3,3 with K=3
  expect_code(out_of_range, ErrorCode::kCorruption);
  auto trailing = good;
  trailing.push_back(0);
  expect_code(trailing, ErrorCode::kCorruption);
  expect_code({}, ErrorCode::kFormat);
}

TEST(Bitrate, Examples) {
  const std::vector<std::uint32_t> one = {128};
  EXPECT_EQ(Bitrate(one, 50.0, 32), 1950.0);
  EXPECT_EQ(Bitrate(std::vector<std::uint32_t>{}, 50.0, 0), 0.0);
  const std::vector<std::uint32_t> two = {1024, 1024};
  EXPECT_EQ(Bitrate(two, 50.0, 32), 2600.0);
  const std::vector<std::uint32_t> bad = {0};
  EXPECT_THROW(Bitrate(bad, 50.0, 0), Error);
  EXPECT_THROW(Bitrate(one, 0.0, 0), Error);
}

TEST(Bitrate, MonotoneInKAndMelodyBits) {
  double prev = 0.0;
  for (std::uint32_t k = 1; k < 5000; k += 13) {
    const std::vector<std::uint32_t> ks = {k, 7};
    const double r = Bitrate(ks, 50.0, 32);
    EXPECT_GE(r, prev);
    prev = r;
  }
  const std::vector<std::uint32_t> ks = {128};
  EXPECT_LT(Bitrate(ks, 50.0, 16), Bitrate(ks, 50.0, 32));
}

TEST(TokenBitWidth, Values) {
  EXPECT_EQ(TokenBitWidth(1), 1u);
  EXPECT_EQ(TokenBitWidth(2), 1u);
  EXPECT_EQ(TokenBitWidth(3), 2u);
  EXPECT_EQ(TokenBitWidth(128), 7u);
  EXPECT_EQ(TokenBitWidth(129), 8u);
  EXPECT_EQ(TokenBitWidth(1024), 10u);
  EXPECT_EQ(TokenBitWidth(0xFFFFFFFFu), 32u);
}

TEST(FeatureFile, KnownBytes) {
  FeatureMatrix x({1, 2, 3, 4, 5, -0.5f}, 3, 50.0f, {"wavlm", 6});
  const std::vector<unsigned char> want = {
      0x46, 0x4D, 0x41, 0x54,                          // "FMAT"
      0x01, 0x00,                                      // version
      0x03, 0x00, 0x00, 0x00,                          // D
      0x02, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00,  // N
      0x00, 0x00, 0x48, 0x42,                          // 50.0f
      0x05, 0x00, 0x77, 0x61, 0x76, 0x6C, 0x6D,        // "wavlm"
      0x06, 0x00,                                      // layer
      0x00, 0x00, 0x80, 0x3F, 0x00, 0x00, 0x00, 0x40, 0x00, 0x00, 0x40, 0x40,
      0x00, 0x00, 0x80, 0x40, 0x00, 0x00, 0xA0, 0x40, 0x00, 0x00, 0x00, 0xBF,
  };
  EXPECT_EQ(SerializeFeatures(x), want);
  EXPECT_EQ(ParseFeatures(want), x);
}

TEST(FeatureFile, EmptyMatrixIsHeaderOnly) {
  FeatureMatrix x(0, 1024, 50.0f, {"hubert-large", 6});
  const auto bytes = SerializeFeatures(x);
  EXPECT_EQ(bytes.size(), 4u + 2 + 4 + 8 + 4 + 2 + 12 + 2);
  EXPECT_EQ(ParseFeatures(bytes), x);
}

TEST(FeatureFile, RandomMatricesRoundTripBitwise) {
  testing::TempDir dir;
  SplitMix64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t d = 1 + rng.NextBelow(40);
    FeatureMatrix x(rng.NextBelow(60), d, 50.0f, {"m" + std::to_string(trial), static_cast<std::uint16_t>(trial)});
    for (std::size_t i = 0; i < x.rows(); ++i) {
      for (std::size_t j = 0; j < d; ++j) x.at(i, j) = static_cast<float>(rng.NextGaussian() * 1e3);
    }
    WriteFeatures(x, dir / "x.fmat");
    EXPECT_EQ(ReadFeatures(dir / "x.fmat"), x);
  }
}

TEST(FeatureFile, Errors) {
  FeatureMatrix x({1, 2, 3, 4}, 2);
  auto bytes = SerializeFeatures(x);
  auto magic = bytes;
  magic[3] = 'X';
  try {
    ParseFeatures(magic);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFormat);
  }
  auto truncated = bytes;
  truncated.resize(truncated.size() - 2);
  try {
    ParseFeatures(truncated);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCorruption);
  }
  auto nan = bytes;
  nan[nan.size() - 1] = 0x7F;
  nan[nan.size() - 2] = 0xC0;
  try {
    ParseFeatures(nan);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCorruption);
  }
  x.at(0, 0) = INFINITY;
  EXPECT_THROW(SerializeFeatures(x), Error);
}

}  // namespace
}  // namespace melotok
