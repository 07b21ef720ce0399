#include "melotok/stream.h"

#include <bit>
#include <cmath>
#include <string>

#include "byte_io.h"
#include "melotok/error.h"

namespace melotok {

void TokenStream::Validate() const {
  if (streams.size() != ks.size()) {
    throw Error(ErrorCode::kEncode, "tokens: stream count != codebook size count");
  }
  if (streams.size() > 255) {
    throw Error(ErrorCode::kEncode, "tokens: at most 255 streams");
  }
  for (std::size_t j = 0; j < streams.size(); ++j) {
    if (ks[j] == 0) {
      throw Error(ErrorCode::kEncode, "tokens: K must be >= 1");
    }
    if (streams[j].size() != num_frames) {
      throw Error(ErrorCode::kEncode,
                  "tokens: stream " + std::to_string(j) + " has " +
                      std::to_string(streams[j].size()) + " frames, expected " +
                      std::to_string(num_frames));
    }
    for (std::size_t i = 0; i < num_frames; ++i) {
      if (streams[j][i] >= ks[j]) {
        throw Error(ErrorCode::kEncode,
                    "tokens: stream " + std::to_string(j) + " frame " +
                        std::to_string(i) + " id " +
                        std::to_string(streams[j][i]) + " >= K=" +
                        std::to_string(ks[j]));
      }
    }
  }
}

TokenStream MakeTokenStream(std::vector<TokenSequence> streams,
                            std::vector<std::uint32_t> ks, float fps) {
  TokenStream ts;
  ts.num_frames = streams.empty() ? 0 : streams.front().size();
  ts.streams = std::move(streams);
  ts.ks = std::move(ks);
  ts.fps = fps;
  ts.Validate();
  return ts;
}

void Bundle::Validate() const {
  tokens.Validate();
  if (!(tokens.fps > 0.0f) || !std::isfinite(tokens.fps)) {
    throw Error(ErrorCode::kEncode, "bundle: fps must be positive");
  }
  if (melody) {
    try {
      melody->Validate();
    } catch (const Error& e) {
      throw Error(ErrorCode::kEncode, e.what());
    }
    if (melody->size() != tokens.num_frames) {
      throw Error(ErrorCode::kEncode,
                  "bundle: melody has " + std::to_string(melody->size()) +
                      " frames, tokens have " +
                      std::to_string(tokens.num_frames));
    }
    if (static_cast<float>(melody->fps) != tokens.fps) {
      throw Error(ErrorCode::kEncode, "bundle: melody fps != token fps");
    }
  }
}

unsigned TokenBitWidth(std::uint32_t k) {
  return k <= 1 ? 1u : static_cast<unsigned>(std::bit_width(k - 1));
}

namespace {

constexpr char kBundleMagic[] = "TOKS";
constexpr std::uint16_t kBundleVersion = 1;

std::size_t StreamBytes(std::size_t frames, unsigned width) {
  return (frames * width + 7) / 8;
}

void PackStream(internal::ByteWriter& w, const TokenSequence& ids,
                unsigned width) {
  std::vector<unsigned char>& out = w.bytes();
  const std::size_t base = out.size();
  out.resize(base + StreamBytes(ids.size(), width), 0);
  std::size_t bit = 0;
  for (TokenId id : ids) {
    for (unsigned b = width; b-- > 0; ++bit) {
      if ((id >> b) & 1u) {
        out[base + bit / 8] |= static_cast<unsigned char>(0x80u >> (bit % 8));
      }
    }
  }
}

TokenSequence UnpackStream(const unsigned char* data, std::size_t frames,
                           unsigned width) {
  TokenSequence ids(frames);
  std::size_t bit = 0;
  for (std::size_t i = 0; i < frames; ++i) {
    std::uint32_t id = 0;
    for (unsigned b = 0; b < width; ++b, ++bit) {
      id = (id << 1) | ((data[bit / 8] >> (7 - bit % 8)) & 1u);
    }
    ids[i] = id;
  }
  return ids;
}

}  // namespace

std::size_t PackedSize(std::span<const std::uint32_t> ks, std::size_t frames,
                       bool with_melody) {
  std::size_t size = 4 + 2 + 4 + 1 + 4 * ks.size() + 8 + 1;
  for (std::uint32_t k : ks) size += StreamBytes(frames, TokenBitWidth(k));
  if (with_melody) size += 4 * frames + (frames + 7) / 8;
  return size;
}

std::vector<unsigned char> Pack(const Bundle& bundle) {
  bundle.Validate();
  const TokenStream& t = bundle.tokens;
  internal::ByteWriter w;
  w.Tag(kBundleMagic);
  w.U16(kBundleVersion);
  w.F32(t.fps);
  w.U8(static_cast<std::uint8_t>(t.size()));
  for (std::uint32_t k : t.ks) w.U32(k);
  w.U64(t.num_frames);
  w.U8(bundle.melody ? 1 : 0);
  for (std::size_t j = 0; j < t.size(); ++j) {
    PackStream(w, t.streams[j], TokenBitWidth(t.ks[j]));
  }
  if (bundle.melody) {
    const MelodyTrack& m = *bundle.melody;
    for (double v : m.lf0) w.F32(static_cast<float>(v));
    std::vector<unsigned char> mask((m.size() + 7) / 8, 0);
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (m.voiced[i]) mask[i / 8] |= static_cast<unsigned char>(0x80u >> (i % 8));
    }
    w.Raw(mask.data(), mask.size());
  }
  return w.Take();
}

Bundle Unpack(std::span<const unsigned char> bytes) {
  internal::ByteReader r(bytes.data(), bytes.size(), "tokens");
  if (!r.TagMatches(kBundleMagic)) {
    throw Error(ErrorCode::kFormat, "tokens: bad magic");
  }
  r.Take(4);
  const std::uint16_t version = r.U16();
  if (version != kBundleVersion) {
    throw Error(ErrorCode::kFormat,
                "tokens: unsupported version " + std::to_string(version));
  }
  Bundle bundle;
  TokenStream& t = bundle.tokens;
  t.fps = r.F32();
  if (!(t.fps > 0.0f) || !std::isfinite(t.fps)) {
    throw Error(ErrorCode::kCorruption, "tokens: fps must be positive");
  }
  const std::uint8_t s = r.U8();
  t.ks.resize(s);
  for (auto& k : t.ks) {
    k = r.U32();
    if (k == 0) throw Error(ErrorCode::kCorruption, "tokens: K = 0");
  }
  const std::uint64_t n = r.U64();
  const std::uint8_t melody_flag = r.U8();
  if (melody_flag > 1) {
    throw Error(ErrorCode::kCorruption, "tokens: melody flag must be 0 or 1");
  }
  // Size check up front so a hostile N cannot trigger a huge allocation.
  if (n > bytes.size() * 8 && (s > 0 || melody_flag)) {
    throw Error(ErrorCode::kCorruption, "tokens: truncated payload");
  }
  const std::size_t frames = static_cast<std::size_t>(n);
  if (PackedSize(t.ks, frames, melody_flag) > bytes.size()) {
    throw Error(ErrorCode::kCorruption, "tokens: truncated payload");
  }
  t.num_frames = frames;
  for (std::size_t j = 0; j < s; ++j) {
    const unsigned width = TokenBitWidth(t.ks[j]);
    const unsigned char* data = r.Take(StreamBytes(frames, width));
    t.streams.push_back(UnpackStream(data, frames, width));
    for (std::size_t i = 0; i < frames; ++i) {
      if (t.streams[j][i] >= t.ks[j]) {
        throw Error(ErrorCode::kCorruption,
                    "tokens: stream " + std::to_string(j) + " frame " +
                        std::to_string(i) + " id >= K");
      }
    }
  }
  if (melody_flag) {
    MelodyTrack m;
    m.fps = t.fps;
    m.lf0.resize(frames);
    m.voiced.resize(frames);
    for (auto& v : m.lf0) v = r.F32();
    const unsigned char* mask = r.Take((frames + 7) / 8);
    for (std::size_t i = 0; i < frames; ++i) {
      m.voiced[i] = (mask[i / 8] >> (7 - i % 8)) & 1u;
    }
    try {
      m.Validate();
    } catch (const Error& e) {
      throw Error(ErrorCode::kCorruption, std::string("tokens: ") + e.what());
    }
    bundle.melody = std::move(m);
  }
  if (r.remaining() != 0) {
    throw Error(ErrorCode::kCorruption, "tokens: trailing bytes");
  }
  return bundle;
}

void WriteBundle(const Bundle& bundle, const std::filesystem::path& path) {
  internal::WriteFileBytes(path, Pack(bundle));
}

Bundle ReadBundle(const std::filesystem::path& path) {
  return Unpack(internal::ReadFileBytes(path));
}

double Bitrate(std::span<const std::uint32_t> ks, double fps,
               unsigned melody_bits_per_frame) {
  if (!(fps > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "bitrate: fps must be positive");
  }
  unsigned long long bits = melody_bits_per_frame;
  for (std::uint32_t k : ks) {
    if (k < 1) throw Error(ErrorCode::kInvalidArgument, "bitrate: K must be >= 1");
    bits += TokenBitWidth(k);
  }
  return fps * static_cast<double>(bits);
}

double Bitrate(const Bundle& bundle) {
  return Bitrate(bundle.tokens.ks, bundle.tokens.fps,
                 bundle.melody ? kMelodyBitsPerFrame : 0);
}

// ---------------------------------------------------------------------------

namespace {

constexpr char kFeatureMagic[] = "FMAT";
constexpr std::uint16_t kFeatureVersion = 1;

}  // namespace

std::vector<unsigned char> SerializeFeatures(const FeatureMatrix& features) {
  features.CheckFinite();
  const std::string& name = features.source().model_name;
  if (name.size() > 0xFFFF) {
    throw Error(ErrorCode::kEncode, "features: model name too long");
  }
  internal::ByteWriter w;
  w.Tag(kFeatureMagic);
  w.U16(kFeatureVersion);
  w.U32(static_cast<std::uint32_t>(features.dim()));
  w.U64(features.rows());
  w.F32(features.fps());
  w.U16(static_cast<std::uint16_t>(name.size()));
  w.Raw(reinterpret_cast<const unsigned char*>(name.data()), name.size());
  w.U16(features.source().layer);
  for (float v : features.data()) w.F32(v);
  return w.Take();
}

FeatureMatrix ParseFeatures(std::span<const unsigned char> bytes) {
  internal::ByteReader r(bytes.data(), bytes.size(), "features");
  if (!r.TagMatches(kFeatureMagic)) {
    throw Error(ErrorCode::kFormat, "features: bad magic");
  }
  r.Take(4);
  const std::uint16_t version = r.U16();
  if (version != kFeatureVersion) {
    throw Error(ErrorCode::kFormat,
                "features: unsupported version " + std::to_string(version));
  }
  const std::uint32_t dim = r.U32();
  const std::uint64_t n = r.U64();
  const float fps = r.F32();
  const std::uint16_t name_len = r.U16();
  const unsigned char* name = r.Take(name_len);
  FeatureSource source;
  source.model_name.assign(reinterpret_cast<const char*>(name), name_len);
  source.layer = r.U16();
  if (dim == 0) throw Error(ErrorCode::kCorruption, "features: D = 0");
  if (n > r.remaining() || n * dim * 4 != r.remaining()) {
    throw Error(ErrorCode::kCorruption,
                "features: payload size does not match N x D");
  }
  std::vector<float> data(static_cast<std::size_t>(n) * dim);
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = r.F32();
    if (!std::isfinite(data[i])) {
      throw Error(ErrorCode::kCorruption,
                  "features: non-finite value at frame " + std::to_string(i / dim));
    }
  }
  return FeatureMatrix(std::move(data), dim, fps, std::move(source));
}

void WriteFeatures(const FeatureMatrix& features,
                   const std::filesystem::path& path) {
  internal::WriteFileBytes(path, SerializeFeatures(features));
}

FeatureMatrix ReadFeatures(const std::filesystem::path& path) {
  return ParseFeatures(internal::ReadFileBytes(path));
}

}  // namespace melotok
