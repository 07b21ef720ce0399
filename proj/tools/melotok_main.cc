#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "melotok/error.h"
#include "melotok/melody.h"
#include "melotok/metrics.h"
#include "melotok/model.h"
#include "melotok/quantize.h"
#include "melotok/rng.h"
#include "melotok/score.h"
#include "melotok/signal_io.h"
#include "melotok/stream.h"

namespace fs = std::filesystem;

namespace melotok {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

// Reported on stderr as one line: "melotok: error=<name> message=<text>".
void ReportError(std::string_view name, std::string message) {
  for (char& c : message) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  std::fprintf(stderr, "melotok: error=%.*s message=%s\n", static_cast<int>(name.size()),
               name.data(), message.c_str());
}

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return kExitUsage;
    case ErrorCode::kTraining:
      return kExitNumeric;
    default:
      return kExitData;
  }
}

enum class FileKind { kWav, kFeatures, kTokens, kUnknown };

FileKind DetectKind(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  char magic[4] = {};
  in.read(magic, 4);
  const std::string tag(magic, static_cast<std::size_t>(in.gcount()));
  if (tag == "RIFF") return FileKind::kWav;
  if (tag == "FMAT") return FileKind::kFeatures;
  if (tag == "TOKS") return FileKind::kTokens;
  return FileKind::kUnknown;
}

std::string FormatNumber(double v) {
  if (v == std::floor(v) && std::abs(v) < 1e15) {
    return std::to_string(static_cast<long long>(v));
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

MelodyTrack MelodyFromBundleFile(const fs::path& path) {
  Bundle b = ReadBundle(path);
  if (!b.melody) {
    throw Error(ErrorCode::kFormat, path.string() + ": container has no melody section");
  }
  return *b.melody;
}

MelodyTrack MelodyFromWav(const fs::path& path, double fps, int threads) {
  F0Options o;
  o.fps = fps;
  o.threads = threads;
  return EstimateF0(ReadWav(path), o);
}

// extract-f0

struct ExtractF0Args {
  fs::path in, out;
  double fps = kDefaultFps;
  int threads = 1;
};

int RunExtractF0(const ExtractF0Args& a) {
  Bundle b;
  b.melody = MelodyFromWav(a.in, a.fps, a.threads);
  b.tokens.num_frames = b.melody->size();
  b.tokens.fps = static_cast<float>(a.fps);
  WriteBundle(b, a.out);
  std::printf("frames=%zu\nvoiced=%zu\n", b.melody->size(), b.melody->VoicedCount());
  return kExitOk;
}

// train-codebook

struct TrainCodebookArgs {
  std::vector<fs::path> features;
  std::size_t k = kSingleSingerClusters;
  std::uint64_t seed = 0;
  std::size_t rvq_stages = 0;
  std::size_t max_iters = 300;
  double tol = 1e-4;
  int threads = 1;
  fs::path out;
};

FeatureMatrix StackFeatures(const std::vector<fs::path>& paths) {
  FeatureMatrix all;
  bool first = true;
  for (const fs::path& p : paths) {
    const FeatureMatrix m = ReadFeatures(p);
    if (first) {
      all = FeatureMatrix(0, m.dim(), m.fps(), m.source());
      first = false;
    } else if (m.dim() != all.dim()) {
      throw Error(ErrorCode::kInvalidArgument,
                  p.string() + ": dimension " + std::to_string(m.dim()) + " differs from " +
                      std::to_string(all.dim()));
    }
    for (std::size_t i = 0; i < m.rows(); ++i) all.AppendRow(m.row(i));
  }
  return all;
}

int RunTrainCodebook(const TrainCodebookArgs& a) {
  const FeatureMatrix x = StackFeatures(a.features);
  KMeansOptions o;
  o.seed = a.seed;
  o.threads = a.threads;
  o.max_iters = a.max_iters;
  o.tol = a.tol;
  if (a.rvq_stages > 0) {
    const RvqCodebook rvq = TrainRvq(x, a.rvq_stages, a.k, o);
    WriteRvq(rvq, a.out);
    for (std::size_t s = 0; s < rvq.stages.size(); ++s) {
      std::printf("stage%zu_inertia=%.9g\n", s, rvq.stages[s].inertia);
    }
  } else {
    const Codebook cb = TrainKMeans(x, a.k, o);
    WriteCodebook(cb, a.out);
    std::printf("inertia=%.9g\niterations=%zu\n", cb.inertia, cb.iterations);
  }
  std::printf("frames=%zu\ndim=%zu\n", x.rows(), x.dim());
  return kExitOk;
}

// encode

struct EncodeArgs {
  std::vector<fs::path> features;
  std::vector<fs::path> codebooks;
  std::optional<fs::path> melody;
  fs::path out;
  int threads = 1;
};

int RunEncode(const EncodeArgs& a) {
  if (a.features.size() != 1 && a.features.size() != a.codebooks.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "give one --features file, or one per --codebooks file");
  }
  std::vector<FeatureMatrix> inputs;
  for (const fs::path& p : a.features) inputs.push_back(ReadFeatures(p));
  const std::size_t n = inputs.front().rows();
  const float fps = inputs.front().fps();
  for (std::size_t i = 1; i < inputs.size(); ++i) {
    if (inputs[i].rows() != n || inputs[i].fps() != fps) {
      throw Error(ErrorCode::kAlignment, a.features[i].string() +
                                             ": frame count or fps differs from " +
                                             a.features[0].string());
    }
  }

  std::vector<TokenSequence> streams;
  std::vector<std::uint32_t> ks;
  for (std::size_t c = 0; c < a.codebooks.size(); ++c) {
    bool is_rvq = false;
    const RvqCodebook book = ReadCodebookFile(a.codebooks[c], &is_rvq);
    const FeatureMatrix& x = inputs[inputs.size() == 1 ? 0 : c];
    if (is_rvq) {
      for (TokenSequence& s : EncodeRvq(book, x, a.threads)) streams.push_back(std::move(s));
      for (const Codebook& stage : book.stages) ks.push_back(static_cast<std::uint32_t>(stage.k));
    } else {
      streams.push_back(Encode(book.stages.front(), x, a.threads));
      ks.push_back(static_cast<std::uint32_t>(book.stages.front().k));
    }
  }

  Bundle b;
  b.tokens = MakeTokenStream(std::move(streams), std::move(ks), fps);
  if (a.melody) {
    MelodyTrack m = DetectKind(*a.melody) == FileKind::kWav
                        ? MelodyFromWav(*a.melody, fps, a.threads)
                        : MelodyFromBundleFile(*a.melody);
    if (m.size() != n) {
      throw Error(ErrorCode::kAlignment, "melody has " + std::to_string(m.size()) +
                                             " frames, features have " + std::to_string(n));
    }
    m.fps = fps;
    b.melody = std::move(m);
  }
  WriteBundle(b, a.out);
  std::printf("frames=%zu\nstreams=%zu\nbitrate_bps=%s\n", n, b.tokens.size(),
              FormatNumber(Bitrate(b)).c_str());
  return kExitOk;
}

// decode

struct DecodeArgs {
  fs::path tokens;
  std::vector<fs::path> codebooks;
  std::vector<fs::path> out;
};

int RunDecode(const DecodeArgs& a) {
  if (a.out.size() != a.codebooks.size()) {
    throw Error(ErrorCode::kInvalidArgument, "give one --out per --codebooks file");
  }
  const Bundle b = ReadBundle(a.tokens);
  std::size_t next = 0;
  for (std::size_t c = 0; c < a.codebooks.size(); ++c) {
    bool is_rvq = false;
    const RvqCodebook book = ReadCodebookFile(a.codebooks[c], &is_rvq);
    const std::size_t used = is_rvq ? book.stages.size() : 1;
    if (next + used > b.tokens.size()) {
      throw Error(ErrorCode::kInvalidArgument, "codebooks need more streams than the container has");
    }
    for (std::size_t s = 0; s < used; ++s) {
      if (b.tokens.ks[next + s] != book.stages[s].k) {
        throw Error(ErrorCode::kInvalidArgument,
                    a.codebooks[c].string() + ": codebook size does not match stream " +
                        std::to_string(next + s));
      }
    }
    const std::span<const TokenSequence> mine(b.tokens.streams.data() + next, used);
    const FeatureMatrix x = is_rvq ? DecodeRvq(book, mine, b.tokens.fps)
                                   : Decode(book.stages.front(), mine.front(), b.tokens.fps);
    WriteFeatures(x, a.out[c]);
    next += used;
  }
  if (next != b.tokens.size()) {
    throw Error(ErrorCode::kInvalidArgument, "container has streams no codebook consumed");
  }
  std::printf("frames=%zu\n", b.tokens.num_frames);
  return kExitOk;
}

// bitrate

int RunBitrate(const fs::path& tokens) {
  std::printf("%s\n", FormatNumber(Bitrate(ReadBundle(tokens))).c_str());
  return kExitOk;
}

// regulate

struct RegulateArgs {
  fs::path score, out;
  std::optional<fs::path> melody_out;
  double fps = kDefaultFps;
};

int RunRegulate(const RegulateArgs& a) {
  const FramePlan plan = Regulate(ReadScore(a.score), a.fps);
  WritePlan(plan, a.out);
  if (a.melody_out) {
    Bundle b;
    b.melody = ScoreMelody(plan);
    b.tokens.num_frames = plan.size();
    b.tokens.fps = static_cast<float>(a.fps);
    WriteBundle(b, *a.melody_out);
  }
  std::printf("frames=%zu\nphonemes=%zu\n", plan.size(), plan.phone_table.size());
  return kExitOk;
}

// train-toy

struct TrainToyArgs {
  fs::path plan, tokens, out;
  bool no_melody_enhance = false;
  std::size_t epochs = 1;
  std::uint64_t seed = 0;
  std::size_t hidden = 16;
  double lr = 0.001;
  std::size_t batch = 16;
  double melody_weight = 1.0;
  bool voiced_only = false;
};

int RunTrainToy(const TrainToyArgs& a) {
  const FramePlan plan = ReadPlan(a.plan);
  const Bundle bundle = ReadBundle(a.tokens);
  if (bundle.tokens.num_frames != plan.size()) {
    throw Error(ErrorCode::kAlignment, "plan has " + std::to_string(plan.size()) +
                                           " frames, tokens have " +
                                           std::to_string(bundle.tokens.num_frames));
  }
  if (bundle.tokens.size() == 0) {
    throw Error(ErrorCode::kInvalidArgument, "token container has no streams");
  }
  FrameBatch batch;
  batch.features = FeaturizePlan(plan);
  batch.tokens = bundle.tokens;
  batch.melody = bundle.melody ? *bundle.melody : ScoreMelody(plan);

  ToyPredictor model(batch.features.cols, a.hidden, bundle.tokens.ks, !a.no_melody_enhance);
  model.InitRandom(a.seed);
  TrainConfig c;
  c.epochs = a.epochs;
  c.learning_rate = a.lr;
  c.batch_size = a.batch;
  c.seed = DeriveSeed(a.seed, 1);
  c.loss.melody_weight = a.melody_weight;
  c.loss.voiced_only_melody = a.voiced_only;
  const std::vector<FrameBatch> data = {batch};
  const TrainResult r = Train(model, data, c);
  WriteModel(r.model, a.out);
  for (std::size_t e = 0; e < r.loss_history.size(); ++e) {
    std::printf("epoch=%zu loss=%.9g\n", e + 1, r.loss_history[e]);
  }
  const ForwardResult f = Forward(r.model, batch.features);
  std::printf("token_accuracy=%.6f\n", Accuracy(batch.tokens, f.posteriors));
  return kExitOk;
}

// grad-check

int RunGradCheck(std::uint64_t seed) {
  constexpr double kThreshold = 1e-4;
  struct Shape {
    std::size_t input, hidden;
    std::vector<std::uint32_t> ks;
  };
  const std::vector<Shape> shapes = {{3, 4, {5}}, {6, 5, {8, 3}}, {2, 2, {2, 2, 2}}};
  bool ok = true;
  std::size_t index = 0;
  for (const Shape& shape : shapes) {
    for (bool enhanced : {false, true}) {
      SplitMix64 rng(DeriveSeed(seed, index++));
      ToyPredictor model(shape.input, shape.hidden, shape.ks, enhanced);
      for (double& p : model.params()) p = 0.5 * rng.NextGaussian();
      FrameBatch b;
      const std::size_t n = 24;
      b.features = DenseMatrix(n, shape.input);
      for (double& v : b.features.data) v = rng.NextGaussian();
      std::vector<TokenSequence> streams;
      for (std::uint32_t k : shape.ks) {
        TokenSequence s(n);
        for (auto& id : s) id = static_cast<TokenId>(rng.NextBelow(k));
        streams.push_back(std::move(s));
      }
      b.tokens = MakeTokenStream(std::move(streams), shape.ks);
      for (std::size_t i = 0; i < n; ++i) {
        const bool v = rng.NextBelow(4) != 0;
        b.melody.voiced.push_back(v);
        b.melody.lf0.push_back(v ? 4.5 + 2.0 * rng.NextDouble() : 0.0);
      }
      const GradientCheckReport r = CheckGradient(model, b);
      const bool pass = r.max_relative_error < kThreshold;
      ok = ok && pass;
      std::printf("check=%zu enhanced=%d params=%zu max_rel_error=%.3g worst_param=%zu pass=%d\n",
                  index - 1, enhanced ? 1 : 0, r.parameters, r.max_relative_error,
                  r.worst_parameter, pass ? 1 : 0);
    }
  }
  std::printf("result=%s\n", ok ? "pass" : "fail");
  return ok ? kExitOk : kExitNumeric;
}

// eval

using Metrics = std::map<std::string, nlohmann::json>;

void AddMelodyMetrics(const MelodyTrack& ref, const MelodyTrack& hyp, Metrics& out) {
  if (ref.size() != hyp.size()) {
    throw Error(ErrorCode::kAlignment, "melody tracks have " + std::to_string(ref.size()) +
                                           " and " + std::to_string(hyp.size()) + " frames");
  }
  const F0Error f0 = F0Rmse(ref, hyp);
  const SemitoneAccuracyResult sa = SemitoneAccuracy(ref, hyp);
  out["co_voiced_frames"] = f0.co_voiced;
  out["f0_rmse"] = f0.rmse;
  out["semitone_accuracy"] = sa.accuracy ? nlohmann::json(*sa.accuracy) : nlohmann::json();
}

Metrics Evaluate(const fs::path& ref, const fs::path& hyp, int threads) {
  const FileKind kr = DetectKind(ref);
  const FileKind kh = DetectKind(hyp);
  Metrics out;
  if (kr == FileKind::kWav && kh == FileKind::kWav) {
    const AudioClip a = ReadWav(ref), b = ReadWav(hyp);
    out["mcd_db"] = MelCepstralDistortion(MelCepstrum(a), MelCepstrum(b));
    F0Options o;
    o.threads = threads;
    AddMelodyMetrics(EstimateF0(a, o), EstimateF0(b, o), out);
  } else if (kr == FileKind::kFeatures && kh == FileKind::kFeatures) {
    const FeatureMatrix a = ReadFeatures(ref), b = ReadFeatures(hyp);
    if (a.rows() != b.rows() || a.dim() != b.dim()) {
      throw Error(ErrorCode::kAlignment, "feature matrices differ in shape");
    }
    out["distortion"] = Distortion(a, b);
    out["frames"] = a.rows();
  } else if (kr == FileKind::kTokens && kh == FileKind::kTokens) {
    const Bundle a = ReadBundle(ref), b = ReadBundle(hyp);
    if (a.tokens.ks == b.tokens.ks && a.tokens.num_frames == b.tokens.num_frames &&
        a.tokens.size() > 0) {
      std::size_t same = 0, total = 0;
      for (std::size_t j = 0; j < a.tokens.size(); ++j) {
        for (std::size_t i = 0; i < a.tokens.num_frames; ++i) {
          same += a.tokens.streams[j][i] == b.tokens.streams[j][i] ? 1 : 0;
          ++total;
        }
      }
      out["token_agreement"] = total == 0 ? 0.0 : static_cast<double>(same) / total;
    }
    if (a.melody && b.melody) AddMelodyMetrics(*a.melody, *b.melody, out);
  } else if ((kr == FileKind::kWav && kh == FileKind::kTokens) ||
             (kr == FileKind::kTokens && kh == FileKind::kWav)) {
    const bool wav_first = kr == FileKind::kWav;
    const MelodyTrack tokens_melody = MelodyFromBundleFile(wav_first ? hyp : ref);
    const MelodyTrack wav_melody =
        MelodyFromWav(wav_first ? ref : hyp, tokens_melody.fps, threads);
    if (wav_first) {
      AddMelodyMetrics(wav_melody, tokens_melody, out);
    } else {
      AddMelodyMetrics(tokens_melody, wav_melody, out);
    }
  } else {
    throw Error(ErrorCode::kInvalidArgument, "no metric applies to this pair of input files");
  }
  if (out.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no metric applies to this pair of input files");
  }
  return out;
}

int RunEval(const fs::path& ref, const fs::path& hyp, bool json, int threads) {
  const Metrics m = Evaluate(ref, hyp, threads);
  if (json) {
    nlohmann::json j(m);
    std::printf("%s\n", j.dump().c_str());
    return kExitOk;
  }
  for (const auto& [key, value] : m) {
    if (value.is_null()) {
      std::printf("%s=undefined\n", key.c_str());
    } else if (value.is_number_float()) {
      std::printf("%s=%.9g\n", key.c_str(), value.get<double>());
    } else {
      std::printf("%s=%s\n", key.c_str(), value.dump().c_str());
    }
  }
  return kExitOk;
}

int Main(int argc, char** argv) {
  CLI::App app{"Discrete singing-voice token toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "melotok 0.1.0");

  ExtractF0Args f0;
  auto* cmd_f0 = app.add_subcommand("extract-f0", "Estimate a log-F0 track from a WAV file");
  cmd_f0->add_option("--in", f0.in, "Input WAV")->required()->check(CLI::ExistingFile);
  cmd_f0->add_option("--fps", f0.fps, "Frame rate")->capture_default_str();
  cmd_f0->add_option("--out", f0.out, "Output melody container (TOKS)")->required();
  cmd_f0->add_option("--threads", f0.threads)->capture_default_str()->check(CLI::PositiveNumber);

  TrainCodebookArgs tc;
  auto* cmd_tc = app.add_subcommand("train-codebook", "Train a k-means or RVQ codebook");
  cmd_tc->add_option("--features", tc.features, "FMAT inputs")->required()->check(CLI::ExistingFile);
  cmd_tc->add_option("--k", tc.k, "Clusters per stage")->capture_default_str();
  cmd_tc->add_option("--seed", tc.seed)->required();
  cmd_tc->add_option("--out", tc.out)->required();
  cmd_tc->add_option("--rvq-stages", tc.rvq_stages, "Residual stages (0 = plain k-means)");
  cmd_tc->add_option("--max-iters", tc.max_iters)->capture_default_str();
  cmd_tc->add_option("--tol", tc.tol)->capture_default_str();
  cmd_tc->add_option("--threads", tc.threads)->capture_default_str()->check(CLI::PositiveNumber);

  EncodeArgs enc;
  std::string enc_melody;
  auto* cmd_enc = app.add_subcommand("encode", "Encode features into a token container");
  cmd_enc->add_option("--features", enc.features)->required()->check(CLI::ExistingFile);
  cmd_enc->add_option("--codebooks", enc.codebooks)->required()->check(CLI::ExistingFile);
  cmd_enc->add_option("--melody", enc_melody, "WAV or melody container")->check(CLI::ExistingFile);
  cmd_enc->add_option("--out", enc.out)->required();
  cmd_enc->add_option("--threads", enc.threads)->capture_default_str()->check(CLI::PositiveNumber);

  DecodeArgs dec;
  auto* cmd_dec = app.add_subcommand("decode", "Reconstruct features from tokens");
  cmd_dec->add_option("--tokens", dec.tokens)->required()->check(CLI::ExistingFile);
  cmd_dec->add_option("--codebooks", dec.codebooks)->required()->check(CLI::ExistingFile);
  cmd_dec->add_option("--out", dec.out, "One FMAT per codebook file")->required();

  fs::path bitrate_tokens;
  auto* cmd_br = app.add_subcommand("bitrate", "Print the container bitrate in bps");
  cmd_br->add_option("--tokens", bitrate_tokens)->required()->check(CLI::ExistingFile);

  RegulateArgs reg;
  std::string reg_melody;
  auto* cmd_reg = app.add_subcommand("regulate", "Expand a score into a frame plan");
  cmd_reg->add_option("--score", reg.score)->required()->check(CLI::ExistingFile);
  cmd_reg->add_option("--fps", reg.fps)->capture_default_str();
  cmd_reg->add_option("--out", reg.out)->required();
  cmd_reg->add_option("--melody-out", reg_melody, "Also write the score melody (TOKS)");

  TrainToyArgs toy;
  auto* cmd_toy = app.add_subcommand("train-toy", "Train the toy token predictor");
  cmd_toy->add_option("--plan", toy.plan)->required()->check(CLI::ExistingFile);
  cmd_toy->add_option("--tokens", toy.tokens)->required()->check(CLI::ExistingFile);
  cmd_toy->add_flag("--no-melody-enhance", toy.no_melody_enhance);
  cmd_toy->add_option("--epochs", toy.epochs)->required();
  cmd_toy->add_option("--seed", toy.seed)->required();
  cmd_toy->add_option("--out", toy.out)->required();
  cmd_toy->add_option("--hidden", toy.hidden)->capture_default_str()->check(CLI::PositiveNumber);
  cmd_toy->add_option("--lr", toy.lr)->capture_default_str();
  cmd_toy->add_option("--batch", toy.batch, "Minibatch size (0 = full batch)")->capture_default_str();
  cmd_toy->add_option("--melody-weight", toy.melody_weight)->capture_default_str();
  cmd_toy->add_flag("--voiced-only-melody", toy.voiced_only);

  std::uint64_t gc_seed = 0;
  auto* cmd_gc = app.add_subcommand("grad-check", "Finite-difference gradient checks");
  cmd_gc->add_option("--seed", gc_seed)->required();

  fs::path ev_ref, ev_hyp;
  bool ev_json = false;
  int ev_threads = 1;
  auto* cmd_ev = app.add_subcommand("eval", "Objective metrics between two files");
  cmd_ev->add_option("--ref", ev_ref)->required()->check(CLI::ExistingFile);
  cmd_ev->add_option("--hyp", ev_hyp)->required()->check(CLI::ExistingFile);
  cmd_ev->add_flag("--json", ev_json, "Print one JSON object instead of key=value lines");
  cmd_ev->add_option("--threads", ev_threads)->capture_default_str()->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    ReportError("usage", e.what());
    return kExitUsage;
  }

  try {
    if (*cmd_f0) return RunExtractF0(f0);
    if (*cmd_tc) return RunTrainCodebook(tc);
    if (*cmd_enc) {
      if (!enc_melody.empty()) enc.melody = enc_melody;
      return RunEncode(enc);
    }
    if (*cmd_dec) return RunDecode(dec);
    if (*cmd_br) return RunBitrate(bitrate_tokens);
    if (*cmd_reg) {
      if (!reg_melody.empty()) reg.melody_out = reg_melody;
      return RunRegulate(reg);
    }
    if (*cmd_toy) return RunTrainToy(toy);
    if (*cmd_gc) return RunGradCheck(gc_seed);
    if (*cmd_ev) return RunEval(ev_ref, ev_hyp, ev_json, ev_threads);
  } catch (const Error& e) {
    ReportError(ErrorCodeName(e.code()), e.what());
    return ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    ReportError("internal", e.what());
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace
}  // namespace melotok

int main(int argc, char** argv) { return melotok::Main(argc, argv); }
