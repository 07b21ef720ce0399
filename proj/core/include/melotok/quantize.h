#ifndef MELOTOK_QUANTIZE_H_
#define MELOTOK_QUANTIZE_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "melotok/signal_io.h"

namespace melotok {

using TokenId = std::uint32_t;
using TokenSequence = std::vector<TokenId>;

inline constexpr std::size_t kSingleSingerClusters = 128;
inline constexpr std::size_t kMultiSingerClusters = 1024;

// Where a feature matrix came from: an SSL model and one of its layers.
struct FeatureSource {
  std::string model_name;
  std::uint16_t layer = 0;

  bool operator==(const FeatureSource&) const = default;
};

// Row-major N x D matrix of frame embeddings.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t dim, float fps = kDefaultFps,
                FeatureSource source = {});
  FeatureMatrix(std::vector<float> data, std::size_t dim,
                float fps = kDefaultFps, FeatureSource source = {});

  std::size_t rows() const { return dim_ == 0 ? 0 : data_.size() / dim_; }
  std::size_t dim() const { return dim_; }
  float fps() const { return fps_; }
  void set_fps(float fps) { fps_ = fps; }
  const FeatureSource& source() const { return source_; }
  void set_source(FeatureSource source) { source_ = std::move(source); }

  std::span<const float> row(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }
  std::span<float> row(std::size_t i) { return {data_.data() + i * dim_, dim_}; }
  float at(std::size_t i, std::size_t d) const { return data_[i * dim_ + d]; }
  float& at(std::size_t i, std::size_t d) { return data_[i * dim_ + d]; }

  const std::vector<float>& data() const { return data_; }

  void AppendRow(std::span<const float> values);

  // Throws kInvalidArgument on a non-finite entry.
  void CheckFinite() const;

  bool operator==(const FeatureMatrix&) const = default;

 private:
  std::vector<float> data_;
  std::size_t dim_ = 1;
  float fps_ = static_cast<float>(kDefaultFps);
  FeatureSource source_;
};

struct Codebook {
  std::vector<float> centroids;  // k x dim, row-major
  std::size_t k = 0;
  std::size_t dim = 0;
  std::uint64_t seed = 0;
  double inertia = 0.0;
  std::size_t iterations = 0;
  // Sum of squared distances after each assignment step. Training-time only;
  // not serialized.
  std::vector<double> inertia_trace;

  std::span<const float> centroid(std::size_t c) const {
    return {centroids.data() + c * dim, dim};
  }
};

struct RvqCodebook {
  std::vector<Codebook> stages;

  std::size_t dim() const { return stages.empty() ? 0 : stages.front().dim; }
};

struct KMeansOptions {
  std::size_t max_iters = 300;
  double tol = 1e-4;  // max centroid movement (Euclidean)
  std::uint64_t seed = 0;
  int threads = 1;
};

// k-means++ seeding followed by Lloyd iterations. Empty clusters take the
// point farthest from its current centroid. Deterministic for fixed inputs,
// independent of `threads`.
Codebook TrainKMeans(const FeatureMatrix& features, std::size_t k,
                     const KMeansOptions& options = {});

// Nearest centroid; ties go to the lowest index.
TokenId Assign(const Codebook& codebook, std::span<const float> vector);

TokenSequence Encode(const Codebook& codebook, const FeatureMatrix& features,
                     int threads = 1);

FeatureMatrix Decode(const Codebook& codebook, std::span<const TokenId> tokens,
                     float fps = kDefaultFps);

// Stage s is trained on the residual left by stages 0..s-1. Stage s uses
// k_per_stage[s] clusters and a seed derived from options.seed and s.
RvqCodebook TrainRvq(const FeatureMatrix& features,
                     std::span<const std::size_t> k_per_stage,
                     const KMeansOptions& options = {});
RvqCodebook TrainRvq(const FeatureMatrix& features, std::size_t stages,
                     std::size_t k_per_stage, const KMeansOptions& options = {});

std::vector<TokenSequence> EncodeRvq(const RvqCodebook& rvq,
                                     const FeatureMatrix& features,
                                     int threads = 1);

// Sum of per-stage centroids. Decoding a prefix of the stages is allowed.
FeatureMatrix DecodeRvq(const RvqCodebook& rvq,
                        std::span<const TokenSequence> tokens,
                        float fps = kDefaultFps);

struct BlendSource {
  const FeatureMatrix* features;
  const Codebook* codebook;
};

// One independent stream per source; sources must share frame count and fps.
std::vector<TokenSequence> BlendEncode(std::span<const BlendSource> sources,
                                       int threads = 1);

// Mean per-frame Euclidean error; 0 for empty inputs.
double Distortion(const FeatureMatrix& features,
                  const FeatureMatrix& reconstruction);

// Sum of squared errors between two same-shaped matrices.
double SquaredError(const FeatureMatrix& a, const FeatureMatrix& b);

// TKCB codebook files. An RVQ file is a u8 stage count followed by one TKCB
// record per stage.
std::vector<unsigned char> SerializeCodebook(const Codebook& codebook);
std::vector<unsigned char> SerializeRvq(const RvqCodebook& rvq);
// Accepts either layout; a single codebook comes back as a one-stage RVQ.
// `is_rvq` reports which layout was found.
RvqCodebook ParseCodebookFile(const std::vector<unsigned char>& bytes,
                              bool* is_rvq = nullptr);

void WriteCodebook(const Codebook& codebook, const std::filesystem::path& path);
void WriteRvq(const RvqCodebook& rvq, const std::filesystem::path& path);
RvqCodebook ReadCodebookFile(const std::filesystem::path& path,
                             bool* is_rvq = nullptr);

}  // namespace melotok

#endif  // MELOTOK_QUANTIZE_H_
