#ifndef MELOTOK_MODEL_H_
#define MELOTOK_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "melotok/melody.h"
#include "melotok/score.h"
#include "melotok/stream.h"

namespace melotok {

// Row-major dense matrix of doubles.
struct DenseMatrix {
  std::vector<double> data;
  std::size_t rows = 0;
  std::size_t cols = 0;

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c) : data(r * c, 0.0), rows(r), cols(c) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  std::span<const double> row(std::size_t i) const {
    return {data.data() + i * cols, cols};
  }
  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
};

// One N x K_j probability matrix per token stream.
using Posteriors = std::vector<DenseMatrix>;

inline constexpr double kProbabilityFloor = 1e-12;

// Mean absolute error (1/N) sum |m_i - m̂_i| over all frames, unvoiced
// sentinels included. With voiced_only, the mean runs over voiced frames and
// is 0 when none are voiced.
double LossMelody(const MelodyTrack& truth, std::span<const double> predicted,
                  bool voiced_only = false);

// -(1/N) sum_i sum_j ln max(p_ij[d_ij], 1e-12).
double LossToken(const TokenStream& truth, const Posteriors& posteriors);

// Fraction of (frame, stream) slots whose argmax (lowest index on ties)
// matches the truth.
double Accuracy(const TokenStream& truth, const Posteriors& posteriors);

// Single-hidden-layer melody-enhanced token predictor.
//
//   h   = tanh(W_in x + b_in)
//   m̂   = w_m . h + b_m
//   h'  = tanh(W_f [h; m̂] + b_f)    if melody_enhanced, else h
//   p_j = softmax(W_j h' + b_j)      per stream j
//
// Parameters live in one flat vector, in this order (matrices row-major):
//   W_in[H x I], b_in[H], w_m[H], b_m[1], W_f[H x (H+1)], b_f[H],
//   then for each stream j: W_j[K_j x H], b_j[K_j].
// The fusion block is always allocated; it is inert when melody_enhanced is
// false.
class ToyPredictor {
 public:
  ToyPredictor(std::size_t input_dim, std::size_t hidden_dim,
               std::vector<std::uint32_t> ks, bool melody_enhanced);

  // Gaussian init with std 1/sqrt(fan_in), biases zero; W_f starts as [I | 0].
  void InitRandom(std::uint64_t seed);

  std::size_t input_dim() const { return input_dim_; }
  std::size_t hidden_dim() const { return hidden_dim_; }
  const std::vector<std::uint32_t>& ks() const { return ks_; }
  bool melody_enhanced() const { return melody_enhanced_; }
  void set_melody_enhanced(bool on) { melody_enhanced_ = on; }

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  struct Layout {
    std::size_t w_in, b_in, w_m, b_m, w_f, b_f;
    std::vector<std::size_t> w_out, b_out;
    std::size_t total;
  };
  const Layout& layout() const { return layout_; }

  bool operator==(const ToyPredictor& other) const {
    return input_dim_ == other.input_dim_ && hidden_dim_ == other.hidden_dim_ &&
           ks_ == other.ks_ && melody_enhanced_ == other.melody_enhanced_ &&
           params_ == other.params_;
  }

 private:
  std::size_t input_dim_;
  std::size_t hidden_dim_;
  std::vector<std::uint32_t> ks_;
  bool melody_enhanced_;
  Layout layout_;
  std::vector<double> params_;
};

struct ForwardResult {
  std::vector<double> melody;
  Posteriors posteriors;
};

ForwardResult Forward(const ToyPredictor& model, const DenseMatrix& features);

// Frames with aligned inputs and targets.
struct FrameBatch {
  DenseMatrix features;
  TokenStream tokens;
  MelodyTrack melody;

  std::size_t size() const { return features.rows; }
  void Validate(const ToyPredictor& model) const;
};

struct LossOptions {
  double melody_weight = 1.0;  // λ_m
  bool voiced_only_melody = false;
};

struct LossTerms {
  double token = 0.0;
  double melody = 0.0;
  double total = 0.0;
};

LossTerms EvaluateLoss(const ToyPredictor& model, const FrameBatch& batch,
                       const LossOptions& options = {});

struct GradientResult {
  std::vector<double> grad;  // same layout as ToyPredictor::params()
  LossTerms loss;
};

// Exact gradient of token + λ_m * melody loss. The sub-gradient of |·| at 0
// is taken as 0.
GradientResult Gradient(const ToyPredictor& model, const FrameBatch& batch,
                        const LossOptions& options = {});

struct GradientCheckReport {
  double max_relative_error = 0.0;
  std::size_t worst_parameter = 0;
  std::size_t parameters = 0;
};

// Central finite differences on every parameter. Relative error is
// |a - n| / max(|a|, |n|, abs_floor).
GradientCheckReport CheckGradient(const ToyPredictor& model,
                                  const FrameBatch& batch,
                                  const LossOptions& options = {},
                                  double step = 1e-4, double abs_floor = 1e-8);

struct TrainConfig {
  double learning_rate = 0.001;
  std::size_t epochs = 1;
  std::size_t batch_size = 16;  // 0 = full batch
  std::uint64_t seed = 0;
  LossOptions loss;
};

struct TrainResult {
  ToyPredictor model;
  std::vector<double> loss_history;  // full-data total loss after each epoch
};

// Minibatch gradient descent over frames shuffled per epoch by `seed`.
// Throws TrainingError on a non-finite loss.
TrainResult Train(ToyPredictor model, std::span<const FrameBatch> dataset,
                  const TrainConfig& config);

// Concatenates batches frame-wise.
FrameBatch Concatenate(std::span<const FrameBatch> batches);

// Per-frame score features: phoneme one-hot over the plan's table, a rest
// flag, and (midi - 60) / 12 for pitched frames.
DenseMatrix FeaturizePlan(const FramePlan& plan);

// TKMD checkpoint (little-endian):
//   "TKMD" | version u16 = 1 | I u32 | H u32 | S u8 | S x K u32 |
//   enhanced u8 | P u64 | P x f32 parameters in ToyPredictor order
std::vector<unsigned char> SerializeModel(const ToyPredictor& model);
ToyPredictor ParseModel(std::span<const unsigned char> bytes);
void WriteModel(const ToyPredictor& model, const std::filesystem::path& path);
ToyPredictor ReadModel(const std::filesystem::path& path);

}  // namespace melotok

#endif  // MELOTOK_MODEL_H_
