#include "melotok/model.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "byte_io.h"
#include "melotok/error.h"
#include "melotok/rng.h"

namespace melotok {

namespace {

void CheckPosteriorShape(const TokenStream& truth, const Posteriors& posteriors) {
  if (posteriors.size() != truth.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "posteriors: " + std::to_string(posteriors.size()) +
                    " streams, truth has " + std::to_string(truth.size()));
  }
  for (std::size_t j = 0; j < truth.size(); ++j) {
    if (posteriors[j].rows != truth.num_frames ||
        posteriors[j].cols != truth.ks[j] ||
        truth.streams[j].size() != truth.num_frames) {
      throw Error(ErrorCode::kInvalidArgument,
                  "posteriors: stream " + std::to_string(j) + " shape mismatch");
    }
  }
}

}  // namespace

double LossMelody(const MelodyTrack& truth, std::span<const double> predicted,
                  bool voiced_only) {
  if (truth.size() != predicted.size() || truth.voiced.size() != truth.size()) {
    throw Error(ErrorCode::kInvalidArgument, "loss_melody: length mismatch");
  }
  if (truth.size() == 0) {
    throw Error(ErrorCode::kInvalidArgument, "loss_melody: no frames");
  }
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (voiced_only && !truth.voiced[i]) continue;
    sum += std::abs(truth.lf0[i] - predicted[i]);
    ++count;
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

double LossToken(const TokenStream& truth, const Posteriors& posteriors) {
  CheckPosteriorShape(truth, posteriors);
  const std::size_t n = truth.num_frames;
  if (n == 0) return 0.0;
  double total = 0.0;
  for (std::size_t j = 0; j < truth.size(); ++j) {
    const DenseMatrix& p = posteriors[j];
    for (std::size_t i = 0; i < n; ++i) {
      double row_sum = 0.0;
      for (double v : p.row(i)) {
        if (v < 0.0 || !std::isfinite(v)) {
          throw Error(ErrorCode::kInvalidArgument,
                      "loss_token: invalid probability at frame " +
                          std::to_string(i));
        }
        row_sum += v;
      }
      if (std::abs(row_sum - 1.0) > 1e-6) {
        throw Error(ErrorCode::kInvalidArgument,
                    "loss_token: posterior row " + std::to_string(i) +
                        " sums to " + std::to_string(row_sum));
      }
      total -= std::log(std::max(p(i, truth.streams[j][i]), kProbabilityFloor));
    }
  }
  return total / static_cast<double>(n);
}

double Accuracy(const TokenStream& truth, const Posteriors& posteriors) {
  CheckPosteriorShape(truth, posteriors);
  const std::size_t slots = truth.num_frames * truth.size();
  if (slots == 0) return 0.0;
  std::size_t hits = 0;
  for (std::size_t j = 0; j < truth.size(); ++j) {
    for (std::size_t i = 0; i < truth.num_frames; ++i) {
      const auto row = posteriors[j].row(i);
      const auto best = static_cast<std::size_t>(
          std::max_element(row.begin(), row.end()) - row.begin());
      if (best == truth.streams[j][i]) ++hits;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(slots);
}

ToyPredictor::ToyPredictor(std::size_t input_dim, std::size_t hidden_dim,
                           std::vector<std::uint32_t> ks, bool melody_enhanced)
    : input_dim_(input_dim),
      hidden_dim_(hidden_dim),
      ks_(std::move(ks)),
      melody_enhanced_(melody_enhanced) {
  if (input_dim == 0 || hidden_dim == 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "toy predictor: input and hidden dims must be >= 1");
  }
  const std::size_t h = hidden_dim;
  std::size_t at = 0;
  layout_.w_in = at;
  at += h * input_dim;
  layout_.b_in = at;
  at += h;
  layout_.w_m = at;
  at += h;
  layout_.b_m = at;
  at += 1;
  layout_.w_f = at;
  at += h * (h + 1);
  layout_.b_f = at;
  at += h;
  for (std::uint32_t k : ks_) {
    if (k == 0) throw Error(ErrorCode::kInvalidArgument, "toy predictor: K = 0");
    layout_.w_out.push_back(at);
    at += static_cast<std::size_t>(k) * h;
    layout_.b_out.push_back(at);
    at += k;
  }
  layout_.total = at;
  params_.assign(at, 0.0);
}

void ToyPredictor::InitRandom(std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::fill(params_.begin(), params_.end(), 0.0);
  auto fill = [&](std::size_t offset, std::size_t count, std::size_t fan_in) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (std::size_t i = 0; i < count; ++i) {
      params_[offset + i] = scale * rng.NextGaussian();
    }
  };
  const std::size_t h = hidden_dim_;
  fill(layout_.w_in, h * input_dim_, input_dim_);
  fill(layout_.w_m, h, h);
  fill(layout_.w_f, h * (h + 1), h + 1);
  for (std::size_t j = 0; j < ks_.size(); ++j) {
    fill(layout_.w_out[j], static_cast<std::size_t>(ks_[j]) * h, h);
  }
  // Fusion starts as identity on h with the m̂ column at zero, so an enhanced
  // model begins from the same features as a plain one.
  for (std::size_t u = 0; u < h; ++u) {
    for (std::size_t v = 0; v <= h; ++v) {
      params_[layout_.w_f + u * (h + 1) + v] = u == v ? 1.0 : 0.0;
    }
  }
}

namespace {

struct FrameCache {
  std::vector<double> h;
  double melody = 0.0;
  std::vector<double> fused;  // h' (equals h when not enhanced)
  std::vector<std::vector<double>> probs;
};

void Softmax(std::vector<double>& z) {
  const double peak = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - peak);
    sum += v;
  }
  for (double& v : z) v /= sum;
}

void ForwardFrame(const ToyPredictor& model, std::span<const double> x,
                  FrameCache& c) {
  const auto& L = model.layout();
  const auto p = model.params();
  const std::size_t h = model.hidden_dim();
  const std::size_t in = model.input_dim();

  c.h.resize(h);
  for (std::size_t u = 0; u < h; ++u) {
    double a = p[L.b_in + u];
    const double* w = p.data() + L.w_in + u * in;
    for (std::size_t d = 0; d < in; ++d) a += w[d] * x[d];
    c.h[u] = std::tanh(a);
  }
  c.melody = p[L.b_m];
  for (std::size_t u = 0; u < h; ++u) c.melody += p[L.w_m + u] * c.h[u];

  if (model.melody_enhanced()) {
    c.fused.resize(h);
    for (std::size_t u = 0; u < h; ++u) {
      const double* w = p.data() + L.w_f + u * (h + 1);
      double a = p[L.b_f + u];
      for (std::size_t v = 0; v < h; ++v) a += w[v] * c.h[v];
      a += w[h] * c.melody;
      c.fused[u] = std::tanh(a);
    }
  } else {
    c.fused = c.h;
  }

  const auto& ks = model.ks();
  c.probs.resize(ks.size());
  for (std::size_t j = 0; j < ks.size(); ++j) {
    auto& z = c.probs[j];
    z.resize(ks[j]);
    for (std::size_t k = 0; k < ks[j]; ++k) {
      const double* w = p.data() + L.w_out[j] + k * h;
      double a = p[L.b_out[j] + k];
      for (std::size_t u = 0; u < h; ++u) a += w[u] * c.fused[u];
      z[k] = a;
    }
    Softmax(z);
  }
}

void CheckFeatures(const ToyPredictor& model, const DenseMatrix& features) {
  if (features.cols != model.input_dim()) {
    throw Error(ErrorCode::kInvalidArgument,
                "forward: feature dim " + std::to_string(features.cols) +
                    " != model input dim " + std::to_string(model.input_dim()));
  }
}

}  // namespace

ForwardResult Forward(const ToyPredictor& model, const DenseMatrix& features) {
  CheckFeatures(model, features);
  const std::size_t n = features.rows;
  ForwardResult out;
  out.melody.resize(n);
  for (std::uint32_t k : model.ks()) out.posteriors.emplace_back(n, k);
  FrameCache cache;
  for (std::size_t i = 0; i < n; ++i) {
    ForwardFrame(model, features.row(i), cache);
    out.melody[i] = cache.melody;
    for (std::size_t j = 0; j < model.ks().size(); ++j) {
      std::copy(cache.probs[j].begin(), cache.probs[j].end(),
                out.posteriors[j].row(i).begin());
    }
  }
  return out;
}

void FrameBatch::Validate(const ToyPredictor& model) const {
  CheckFeatures(model, features);
  tokens.Validate();
  if (tokens.num_frames != features.rows || melody.size() != features.rows ||
      melody.voiced.size() != features.rows) {
    throw Error(ErrorCode::kInvalidArgument,
                "batch: features, tokens and melody disagree on frame count");
  }
  if (tokens.ks != model.ks()) {
    throw Error(ErrorCode::kInvalidArgument,
                "batch: token codebook sizes do not match the model heads");
  }
}

namespace {

std::size_t MelodyFrames(const FrameBatch& batch, const LossOptions& options) {
  if (!options.voiced_only_melody) return batch.size();
  return batch.melody.VoicedCount();
}

}  // namespace

LossTerms EvaluateLoss(const ToyPredictor& model, const FrameBatch& batch,
                       const LossOptions& options) {
  batch.Validate(model);
  LossTerms loss;
  if (batch.size() == 0) return loss;
  const ForwardResult fwd = Forward(model, batch.features);
  loss.token = LossToken(batch.tokens, fwd.posteriors);
  loss.melody = LossMelody(batch.melody, fwd.melody, options.voiced_only_melody);
  loss.total = loss.token + options.melody_weight * loss.melody;
  return loss;
}

GradientResult Gradient(const ToyPredictor& model, const FrameBatch& batch,
                        const LossOptions& options) {
  batch.Validate(model);
  const auto& L = model.layout();
  const auto p = model.params();
  const std::size_t h = model.hidden_dim();
  const std::size_t in = model.input_dim();
  const auto& ks = model.ks();
  const std::size_t n = batch.size();

  GradientResult out;
  out.grad.assign(L.total, 0.0);
  if (n == 0) return out;
  auto& g = out.grad;

  const double inv_n = 1.0 / static_cast<double>(n);
  const std::size_t melody_frames = MelodyFrames(batch, options);
  const double inv_m =
      melody_frames == 0 ? 0.0 : 1.0 / static_cast<double>(melody_frames);

  FrameCache c;
  std::vector<double> d_fused(h), d_h(h);
  double token_sum = 0.0;
  double melody_sum = 0.0;
  // Frames are accumulated in ascending order.
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = batch.features.row(i);
    ForwardFrame(model, x, c);

    std::fill(d_fused.begin(), d_fused.end(), 0.0);
    for (std::size_t j = 0; j < ks.size(); ++j) {
      const TokenId target = batch.tokens.streams[j][i];
      const double pt = c.probs[j][target];
      token_sum -= std::log(std::max(pt, kProbabilityFloor));
      if (pt < kProbabilityFloor) continue;  // floored: flat in the logits
      for (std::size_t k = 0; k < ks[j]; ++k) {
        const double dz = (c.probs[j][k] - (k == target ? 1.0 : 0.0)) * inv_n;
        const double* w = p.data() + L.w_out[j] + k * h;
        double* gw = g.data() + L.w_out[j] + k * h;
        for (std::size_t u = 0; u < h; ++u) {
          gw[u] += dz * c.fused[u];
          d_fused[u] += dz * w[u];
        }
        g[L.b_out[j] + k] += dz;
      }
    }

    double d_melody = 0.0;
    const bool counts = !options.voiced_only_melody || batch.melody.voiced[i];
    if (counts) {
      const double diff = c.melody - batch.melody.lf0[i];
      melody_sum += std::abs(diff);
      const double sign = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
      d_melody += options.melody_weight * sign * inv_m;
    }

    if (model.melody_enhanced()) {
      std::fill(d_h.begin(), d_h.end(), 0.0);
      for (std::size_t u = 0; u < h; ++u) {
        const double da = d_fused[u] * (1.0 - c.fused[u] * c.fused[u]);
        const double* w = p.data() + L.w_f + u * (h + 1);
        double* gw = g.data() + L.w_f + u * (h + 1);
        for (std::size_t v = 0; v < h; ++v) {
          gw[v] += da * c.h[v];
          d_h[v] += da * w[v];
        }
        gw[h] += da * c.melody;
        d_melody += da * w[h];
        g[L.b_f + u] += da;
      }
    } else {
      d_h = d_fused;
    }

    for (std::size_t u = 0; u < h; ++u) {
      g[L.w_m + u] += d_melody * c.h[u];
      d_h[u] += d_melody * p[L.w_m + u];
    }
    g[L.b_m] += d_melody;

    for (std::size_t u = 0; u < h; ++u) {
      const double da = d_h[u] * (1.0 - c.h[u] * c.h[u]);
      double* gw = g.data() + L.w_in + u * in;
      for (std::size_t d = 0; d < in; ++d) gw[d] += da * x[d];
      g[L.b_in + u] += da;
    }
  }

  out.loss.token = token_sum * inv_n;
  out.loss.melody = melody_sum * inv_m;
  out.loss.total = out.loss.token + options.melody_weight * out.loss.melody;
  return out;
}

GradientCheckReport CheckGradient(const ToyPredictor& model,
                                  const FrameBatch& batch,
                                  const LossOptions& options, double step,
                                  double abs_floor) {
  const GradientResult analytic = Gradient(model, batch, options);
  ToyPredictor probe = model;
  GradientCheckReport report;
  report.parameters = analytic.grad.size();
  for (std::size_t q = 0; q < analytic.grad.size(); ++q) {
    const double saved = probe.params()[q];
    probe.params()[q] = saved + step;
    const double up = EvaluateLoss(probe, batch, options).total;
    probe.params()[q] = saved - step;
    const double down = EvaluateLoss(probe, batch, options).total;
    probe.params()[q] = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double a = analytic.grad[q];
    const double rel = std::abs(a - numeric) /
                       std::max({std::abs(a), std::abs(numeric), abs_floor});
    if (rel > report.max_relative_error) {
      report.max_relative_error = rel;
      report.worst_parameter = q;
    }
  }
  return report;
}

FrameBatch Concatenate(std::span<const FrameBatch> batches) {
  FrameBatch out;
  if (batches.empty()) return out;
  const FrameBatch& first = batches.front();
  out.features = DenseMatrix(0, first.features.cols);
  out.tokens.ks = first.tokens.ks;
  out.tokens.fps = first.tokens.fps;
  out.tokens.streams.resize(first.tokens.size());
  out.melody.fps = first.melody.fps;
  for (const FrameBatch& b : batches) {
    if (b.features.cols != out.features.cols || b.tokens.ks != out.tokens.ks) {
      throw Error(ErrorCode::kInvalidArgument,
                  "concatenate: batches have different shapes");
    }
    out.features.data.insert(out.features.data.end(), b.features.data.begin(),
                              b.features.data.end());
    out.features.rows += b.features.rows;
    for (std::size_t j = 0; j < b.tokens.size(); ++j) {
      out.tokens.streams[j].insert(out.tokens.streams[j].end(),
                                   b.tokens.streams[j].begin(),
                                   b.tokens.streams[j].end());
    }
    out.tokens.num_frames += b.tokens.num_frames;
    out.melody.lf0.insert(out.melody.lf0.end(), b.melody.lf0.begin(),
                          b.melody.lf0.end());
    out.melody.voiced.insert(out.melody.voiced.end(), b.melody.voiced.begin(),
                             b.melody.voiced.end());
  }
  return out;
}

namespace {

FrameBatch Select(const FrameBatch& all, std::span<const std::size_t> idx) {
  FrameBatch b;
  b.features = DenseMatrix(idx.size(), all.features.cols);
  b.tokens.ks = all.tokens.ks;
  b.tokens.fps = all.tokens.fps;
  b.tokens.num_frames = idx.size();
  b.tokens.streams.assign(all.tokens.size(), TokenSequence(idx.size()));
  b.melody.fps = all.melody.fps;
  b.melody.lf0.resize(idx.size());
  b.melody.voiced.resize(idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const std::size_t i = idx[r];
    const auto src = all.features.row(i);
    std::copy(src.begin(), src.end(), b.features.row(r).begin());
    for (std::size_t j = 0; j < all.tokens.size(); ++j) {
      b.tokens.streams[j][r] = all.tokens.streams[j][i];
    }
    b.melody.lf0[r] = all.melody.lf0[i];
    b.melody.voiced[r] = all.melody.voiced[i];
  }
  return b;
}

}  // namespace

TrainResult Train(ToyPredictor model, std::span<const FrameBatch> dataset,
                  const TrainConfig& config) {
  if (!(config.learning_rate > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "train: learning rate must be > 0");
  }
  if (dataset.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "train: empty dataset");
  }
  const FrameBatch all = Concatenate(dataset);
  all.Validate(model);
  if (all.size() == 0) {
    throw Error(ErrorCode::kInvalidArgument, "train: dataset has no frames");
  }

  const std::size_t n = all.size();
  const std::size_t batch =
      config.batch_size == 0 ? n : std::min(config.batch_size, n);
  SplitMix64 rng(config.seed);
  std::vector<std::size_t> order(n);

  TrainResult result{std::move(model), {}};
  ToyPredictor& m = result.model;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) {
      std::swap(order[i - 1], order[rng.NextBelow(i)]);
    }
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t end = std::min(n, start + batch);
      const FrameBatch mb = Select(
          all, std::span<const std::size_t>(order.data() + start, end - start));
      const GradientResult g = Gradient(m, mb, config.loss);
      auto params = m.params();
      for (std::size_t q = 0; q < params.size(); ++q) {
        params[q] -= config.learning_rate * g.grad[q];
      }
    }
    const double loss = EvaluateLoss(m, all, config.loss).total;
    if (!std::isfinite(loss)) {
      throw TrainingError(epoch, "loss became non-finite");
    }
    result.loss_history.push_back(loss);
  }
  return result;
}

DenseMatrix FeaturizePlan(const FramePlan& plan) {
  const std::size_t phones = plan.phone_table.size();
  DenseMatrix x(plan.size(), phones + 2);
  for (std::size_t i = 0; i < plan.size(); ++i) {
    x(i, plan.phone_ids[i]) = 1.0;
    if (plan.midi[i] == kRest) {
      x(i, phones) = 1.0;
    } else {
      x(i, phones + 1) = (plan.midi[i] - 60.0) / 12.0;
    }
  }
  return x;
}

namespace {

constexpr char kModelMagic[] = "TKMD";
constexpr std::uint16_t kModelVersion = 1;

}  // namespace

std::vector<unsigned char> SerializeModel(const ToyPredictor& model) {
  if (model.ks().size() > 255) {
    throw Error(ErrorCode::kEncode, "model: at most 255 token heads");
  }
  internal::ByteWriter w;
  w.Tag(kModelMagic);
  w.U16(kModelVersion);
  w.U32(static_cast<std::uint32_t>(model.input_dim()));
  w.U32(static_cast<std::uint32_t>(model.hidden_dim()));
  w.U8(static_cast<std::uint8_t>(model.ks().size()));
  for (std::uint32_t k : model.ks()) w.U32(k);
  w.U8(model.melody_enhanced() ? 1 : 0);
  w.U64(model.params().size());
  for (double v : model.params()) w.F32(static_cast<float>(v));
  return w.Take();
}

ToyPredictor ParseModel(std::span<const unsigned char> bytes) {
  internal::ByteReader r(bytes.data(), bytes.size(), "model");
  if (!r.TagMatches(kModelMagic)) throw Error(ErrorCode::kFormat, "model: bad magic");
  r.Take(4);
  if (r.U16() != kModelVersion) {
    throw Error(ErrorCode::kFormat, "model: unsupported version");
  }
  const std::uint32_t in = r.U32();
  const std::uint32_t hidden = r.U32();
  std::vector<std::uint32_t> ks(r.U8());
  for (auto& k : ks) k = r.U32();
  const bool enhanced = r.U8() != 0;
  ToyPredictor model(in, hidden, std::move(ks), enhanced);
  const std::uint64_t count = r.U64();
  if (count != model.params().size() || r.remaining() != count * 4) {
    throw Error(ErrorCode::kCorruption, "model: parameter count mismatch");
  }
  for (double& v : model.params()) {
    v = r.F32();
    if (!std::isfinite(v)) throw Error(ErrorCode::kCorruption, "model: non-finite parameter");
  }
  return model;
}

void WriteModel(const ToyPredictor& model, const std::filesystem::path& path) {
  internal::WriteFileBytes(path, SerializeModel(model));
}

ToyPredictor ReadModel(const std::filesystem::path& path) {
  return ParseModel(internal::ReadFileBytes(path));
}

}  // namespace melotok
