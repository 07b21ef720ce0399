#include "melotok/quantize.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "byte_io.h"
#include "melotok/error.h"
#include "melotok/rng.h"
#include "parallel.h"

namespace melotok {

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t dim, float fps,
                             FeatureSource source)
    : data_(rows * dim, 0.0f), dim_(dim), fps_(fps), source_(std::move(source)) {
  if (dim == 0) {
    throw Error(ErrorCode::kInvalidArgument, "feature matrix: dim must be >= 1");
  }
}

FeatureMatrix::FeatureMatrix(std::vector<float> data, std::size_t dim,
                             float fps, FeatureSource source)
    : data_(std::move(data)), dim_(dim), fps_(fps), source_(std::move(source)) {
  if (dim == 0) {
    throw Error(ErrorCode::kInvalidArgument, "feature matrix: dim must be >= 1");
  }
  if (data_.size() % dim != 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "feature matrix: data length is not a multiple of dim");
  }
}

void FeatureMatrix::AppendRow(std::span<const float> values) {
  if (values.size() != dim_) {
    throw Error(ErrorCode::kInvalidArgument, "feature matrix: row width mismatch");
  }
  data_.insert(data_.end(), values.begin(), values.end());
}

void FeatureMatrix::CheckFinite() const {
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw Error(ErrorCode::kInvalidArgument,
                  "feature matrix: non-finite value at frame " +
                      std::to_string(i / dim_));
    }
  }
}

namespace {

template <typename A, typename B>
double SquaredDistance(std::span<const A> a, std::span<const B> b) {
  double acc = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    const double diff = static_cast<double>(a[d]) - static_cast<double>(b[d]);
    acc += diff * diff;
  }
  return acc;
}

// Index and squared distance of the nearest of k row-major centres.
template <typename T>
std::pair<std::size_t, double> Nearest(const std::vector<T>& centres,
                                       std::size_t k, std::size_t dim,
                                       std::span<const float> x) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < k; ++c) {
    const double d =
        SquaredDistance(x, std::span<const T>(centres.data() + c * dim, dim));
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return {best, best_d};
}

template <typename T>
double AssignAll(const FeatureMatrix& x, const std::vector<T>& centres,
                 std::size_t k, int threads, std::vector<std::size_t>& labels,
                 std::vector<double>& dist) {
  const std::size_t n = x.rows();
  labels.resize(n);
  dist.resize(n);
  internal::ParallelFor(n, threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const auto [c, d] = Nearest(centres, k, x.dim(), x.row(i));
      labels[i] = c;
      dist[i] = d;
    }
  });
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) sse += dist[i];
  return sse;
}

std::vector<double> SeedPlusPlus(const FeatureMatrix& x, std::size_t k,
                                 SplitMix64& rng) {
  const std::size_t n = x.rows();
  const std::size_t dim = x.dim();
  std::vector<double> centres(k * dim);
  auto set_centre = [&](std::size_t c, std::size_t i) {
    const auto row = x.row(i);
    std::copy(row.begin(), row.end(), centres.begin() + c * dim);
  };

  set_centre(0, rng.NextBelow(n));
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) {
    d2[i] = SquaredDistance(x.row(i), std::span<const double>(centres.data(), dim));
  }
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (double d : d2) total += d;
    std::size_t pick = n;
    if (total > 0.0) {
      const double target = rng.NextDouble() * total;
      double cumulative = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        cumulative += d2[i];
        if (d2[i] > 0.0 && cumulative > target) {
          pick = i;
          break;
        }
      }
      if (pick == n) {
        for (std::size_t i = n; i-- > 0;) {
          if (d2[i] > 0.0) {
            pick = i;
            break;
          }
        }
      }
    } else {
      pick = rng.NextBelow(n);
    }
    set_centre(c, pick);
    const std::span<const double> centre(centres.data() + c * dim, dim);
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], SquaredDistance(x.row(i), centre));
    }
  }
  return centres;
}

}  // namespace

Codebook TrainKMeans(const FeatureMatrix& features, std::size_t k,
                     const KMeansOptions& options) {
  if (k == 0) {
    throw Error(ErrorCode::kInvalidArgument, "kmeans: k must be >= 1");
  }
  const std::size_t n = features.rows();
  const std::size_t dim = features.dim();
  if (n < k) {
    throw Error(ErrorCode::kInsufficientData,
                "kmeans: " + std::to_string(n) + " frames for k=" +
                    std::to_string(k));
  }
  features.CheckFinite();

  SplitMix64 rng(options.seed);
  std::vector<double> centres = SeedPlusPlus(features, k, rng);

  Codebook book;
  book.k = k;
  book.dim = dim;
  book.seed = options.seed;

  std::vector<std::size_t> labels;
  std::vector<double> dist;
  std::vector<std::size_t> counts(k);
  std::vector<double> sums(k * dim);
  for (std::size_t iter = 0; iter < options.max_iters; ++iter) {
    book.inertia_trace.push_back(
        AssignAll(features, centres, k, options.threads, labels, dist));

    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t label : labels) ++counts[label];
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far = n;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[labels[i]] > 1 && dist[i] > far_d) {
          far_d = dist[i];
          far = i;
        }
      }
      --counts[labels[far]];
      labels[far] = c;
      dist[far] = 0.0;
      counts[c] = 1;
    }

    // Ascending frame order per cluster keeps the sums bit-reproducible.
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = features.row(i);
      double* s = sums.data() + labels[i] * dim;
      for (std::size_t d = 0; d < dim; ++d) s[d] += row[d];
    }
    double movement = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      double moved = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        const double updated = sums[c * dim + d] / static_cast<double>(counts[c]);
        const double delta = updated - centres[c * dim + d];
        moved += delta * delta;
        centres[c * dim + d] = updated;
      }
      movement = std::max(movement, std::sqrt(moved));
    }
    book.iterations = iter + 1;
    if (movement < options.tol) break;
  }

  book.centroids.assign(centres.begin(), centres.end());
  book.inertia =
      AssignAll(features, book.centroids, k, options.threads, labels, dist);
  return book;
}

TokenId Assign(const Codebook& codebook, std::span<const float> vector) {
  if (vector.size() != codebook.dim) {
    throw Error(ErrorCode::kInvalidArgument,
                "assign: vector dim " + std::to_string(vector.size()) +
                    " != codebook dim " + std::to_string(codebook.dim));
  }
  if (codebook.k == 0) {
    throw Error(ErrorCode::kInvalidArgument, "assign: empty codebook");
  }
  return static_cast<TokenId>(
      Nearest(codebook.centroids, codebook.k, codebook.dim, vector).first);
}

TokenSequence Encode(const Codebook& codebook, const FeatureMatrix& features,
                     int threads) {
  if (features.dim() != codebook.dim) {
    throw Error(ErrorCode::kInvalidArgument,
                "encode: feature dim " + std::to_string(features.dim()) +
                    " != codebook dim " + std::to_string(codebook.dim));
  }
  TokenSequence tokens(features.rows());
  internal::ParallelFor(tokens.size(), threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) tokens[i] = Assign(codebook, features.row(i));
  });
  return tokens;
}

FeatureMatrix Decode(const Codebook& codebook, std::span<const TokenId> tokens,
                     float fps) {
  FeatureMatrix out(tokens.size(), std::max<std::size_t>(codebook.dim, 1), fps);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] >= codebook.k) {
      throw Error(ErrorCode::kOutOfRange,
                  "decode: token " + std::to_string(tokens[i]) + " at frame " +
                      std::to_string(i) + " >= K=" + std::to_string(codebook.k));
    }
    const auto c = codebook.centroid(tokens[i]);
    std::copy(c.begin(), c.end(), out.row(i).begin());
  }
  return out;
}

RvqCodebook TrainRvq(const FeatureMatrix& features,
                     std::span<const std::size_t> k_per_stage,
                     const KMeansOptions& options) {
  if (k_per_stage.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "rvq: need at least one stage");
  }
  RvqCodebook rvq;
  FeatureMatrix residual = features;
  for (std::size_t s = 0; s < k_per_stage.size(); ++s) {
    KMeansOptions stage_options = options;
    stage_options.seed = s == 0 ? options.seed : DeriveSeed(options.seed, s);
    Codebook stage = TrainKMeans(residual, k_per_stage[s], stage_options);
    const TokenSequence codes = Encode(stage, residual, options.threads);
    for (std::size_t i = 0; i < residual.rows(); ++i) {
      const auto c = stage.centroid(codes[i]);
      auto row = residual.row(i);
      for (std::size_t d = 0; d < row.size(); ++d) {
        row[d] = static_cast<float>(static_cast<double>(row[d]) - c[d]);
      }
    }
    rvq.stages.push_back(std::move(stage));
  }
  return rvq;
}

RvqCodebook TrainRvq(const FeatureMatrix& features, std::size_t stages,
                     std::size_t k_per_stage, const KMeansOptions& options) {
  const std::vector<std::size_t> ks(stages, k_per_stage);
  return TrainRvq(features, ks, options);
}

std::vector<TokenSequence> EncodeRvq(const RvqCodebook& rvq,
                                     const FeatureMatrix& features,
                                     int threads) {
  if (features.dim() != rvq.dim()) {
    throw Error(ErrorCode::kInvalidArgument, "encode_rvq: dim mismatch");
  }
  std::vector<TokenSequence> out;
  FeatureMatrix residual = features;
  for (const Codebook& stage : rvq.stages) {
    TokenSequence codes = Encode(stage, residual, threads);
    for (std::size_t i = 0; i < residual.rows(); ++i) {
      const auto c = stage.centroid(codes[i]);
      auto row = residual.row(i);
      for (std::size_t d = 0; d < row.size(); ++d) {
        row[d] = static_cast<float>(static_cast<double>(row[d]) - c[d]);
      }
    }
    out.push_back(std::move(codes));
  }
  return out;
}

FeatureMatrix DecodeRvq(const RvqCodebook& rvq,
                        std::span<const TokenSequence> tokens, float fps) {
  if (tokens.size() > rvq.stages.size() || tokens.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "decode_rvq: got " + std::to_string(tokens.size()) +
                    " streams for " + std::to_string(rvq.stages.size()) +
                    " stages");
  }
  const std::size_t n = tokens.front().size();
  const std::size_t dim = rvq.dim();
  std::vector<double> acc(n * dim, 0.0);
  for (std::size_t s = 0; s < tokens.size(); ++s) {
    const Codebook& stage = rvq.stages[s];
    if (tokens[s].size() != n) {
      throw Error(ErrorCode::kAlignment, "decode_rvq: stream lengths differ");
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (tokens[s][i] >= stage.k) {
        throw Error(ErrorCode::kOutOfRange,
                    "decode_rvq: stage " + std::to_string(s) + " token " +
                        std::to_string(tokens[s][i]) + " >= K=" +
                        std::to_string(stage.k));
      }
      const auto c = stage.centroid(tokens[s][i]);
      for (std::size_t d = 0; d < dim; ++d) acc[i * dim + d] += c[d];
    }
  }
  return FeatureMatrix(std::vector<float>(acc.begin(), acc.end()), dim, fps);
}

std::vector<TokenSequence> BlendEncode(std::span<const BlendSource> sources,
                                       int threads) {
  std::vector<TokenSequence> streams;
  if (sources.empty()) return streams;
  const FeatureMatrix& first = *sources.front().features;
  for (const BlendSource& src : sources) {
    if (src.features->rows() != first.rows() ||
        src.features->fps() != first.fps()) {
      throw Error(ErrorCode::kAlignment,
                  "blend: sources disagree on frame count or fps (" +
                      std::to_string(src.features->rows()) + " vs " +
                      std::to_string(first.rows()) + " frames)");
    }
  }
  streams.reserve(sources.size());
  for (const BlendSource& src : sources) {
    streams.push_back(Encode(*src.codebook, *src.features, threads));
  }
  return streams;
}

namespace {

void CheckSameShape(const FeatureMatrix& a, const FeatureMatrix& b,
                    const char* what) {
  if (a.rows() != b.rows() || a.dim() != b.dim()) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(what) + ": shape mismatch " +
                    std::to_string(a.rows()) + "x" + std::to_string(a.dim()) +
                    " vs " + std::to_string(b.rows()) + "x" +
                    std::to_string(b.dim()));
  }
}

}  // namespace

double Distortion(const FeatureMatrix& features,
                  const FeatureMatrix& reconstruction) {
  CheckSameShape(features, reconstruction, "distortion");
  const std::size_t n = features.rows();
  if (n == 0) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total += std::sqrt(SquaredDistance(features.row(i), reconstruction.row(i)));
  }
  return total / static_cast<double>(n);
}

double SquaredError(const FeatureMatrix& a, const FeatureMatrix& b) {
  CheckSameShape(a, b, "squared_error");
  double total = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    total += SquaredDistance(a.row(i), b.row(i));
  }
  return total;
}

// ---------------------------------------------------------------------------
// TKCB: "TKCB" | version u16 | D u32 | K u32 | seed u64 | K*D f32

namespace {

constexpr char kCodebookMagic[] = "TKCB";
constexpr std::uint16_t kCodebookVersion = 1;

void PutCodebook(internal::ByteWriter& w, const Codebook& book) {
  if (book.k == 0 || book.dim == 0 ||
      book.centroids.size() != book.k * book.dim) {
    throw Error(ErrorCode::kEncode, "codebook: inconsistent shape");
  }
  w.Tag(kCodebookMagic);
  w.U16(kCodebookVersion);
  w.U32(static_cast<std::uint32_t>(book.dim));
  w.U32(static_cast<std::uint32_t>(book.k));
  w.U64(book.seed);
  for (float v : book.centroids) w.F32(v);
}

Codebook GetCodebook(internal::ByteReader& r) {
  if (!r.TagMatches(kCodebookMagic)) {
    throw Error(ErrorCode::kFormat, "codebook: bad magic");
  }
  r.Take(4);
  const std::uint16_t version = r.U16();
  if (version != kCodebookVersion) {
    throw Error(ErrorCode::kFormat,
                "codebook: unsupported version " + std::to_string(version));
  }
  Codebook book;
  book.dim = r.U32();
  book.k = r.U32();
  book.seed = r.U64();
  if (book.dim == 0 || book.k == 0) {
    throw Error(ErrorCode::kCorruption, "codebook: zero K or D");
  }
  r.Need(book.k * book.dim * 4);
  book.centroids.resize(book.k * book.dim);
  for (float& v : book.centroids) {
    v = r.F32();
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kCorruption, "codebook: non-finite centroid");
    }
  }
  return book;
}

}  // namespace

std::vector<unsigned char> SerializeCodebook(const Codebook& codebook) {
  internal::ByteWriter w;
  PutCodebook(w, codebook);
  return w.Take();
}

std::vector<unsigned char> SerializeRvq(const RvqCodebook& rvq) {
  if (rvq.stages.empty() || rvq.stages.size() > 255) {
    throw Error(ErrorCode::kEncode, "rvq: stage count must be in [1, 255]");
  }
  internal::ByteWriter w;
  w.U8(static_cast<std::uint8_t>(rvq.stages.size()));
  for (const Codebook& stage : rvq.stages) PutCodebook(w, stage);
  return w.Take();
}

RvqCodebook ParseCodebookFile(const std::vector<unsigned char>& bytes,
                              bool* is_rvq) {
  internal::ByteReader r(bytes.data(), bytes.size(), "codebook");
  RvqCodebook rvq;
  if (r.TagMatches(kCodebookMagic)) {
    rvq.stages.push_back(GetCodebook(r));
    if (is_rvq) *is_rvq = false;
  } else {
    const std::uint8_t count = r.U8();
    if (count == 0) {
      throw Error(ErrorCode::kFormat, "codebook: bad magic");
    }
    for (std::uint8_t s = 0; s < count; ++s) {
      rvq.stages.push_back(GetCodebook(r));
      if (rvq.stages.back().dim != rvq.stages.front().dim) {
        throw Error(ErrorCode::kCorruption, "rvq: stage dims differ");
      }
    }
    if (is_rvq) *is_rvq = true;
  }
  if (r.remaining() != 0) {
    throw Error(ErrorCode::kCorruption, "codebook: trailing bytes");
  }
  return rvq;
}

void WriteCodebook(const Codebook& codebook, const std::filesystem::path& path) {
  internal::WriteFileBytes(path, SerializeCodebook(codebook));
}

void WriteRvq(const RvqCodebook& rvq, const std::filesystem::path& path) {
  internal::WriteFileBytes(path, SerializeRvq(rvq));
}

RvqCodebook ReadCodebookFile(const std::filesystem::path& path, bool* is_rvq) {
  return ParseCodebookFile(internal::ReadFileBytes(path), is_rvq);
}

}  // namespace melotok
