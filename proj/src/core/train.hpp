#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gnn.hpp"
#include "params.hpp"

namespace gvpnn {

enum class LossKind : std::uint8_t { kMse, kCrossEntropy };
enum class MetricKind : std::uint8_t { kMae, kRmse, kAuroc, kSpearman, kNone };

MetricKind metric_from_name(const std::string& name);
std::string metric_name(MetricKind kind);

double loss_mse(std::span<const double> pred, std::span<const double> target);
// Stable log-sum-exp cross entropy; label indexes the logits.
double loss_cross_entropy(std::span<const double> logits, int label);

// mae / rmse over paired arrays; auroc treats targets > 0.5 as the positive
// class; spearman uses average ranks for ties.
double metric_value(MetricKind kind, std::span<const double> preds,
                    std::span<const double> targets);

struct TrainConfig {
  double lr = 1e-3;
  int batch_size = 8;
  int max_epochs = 10;
  std::uint64_t seed = 0;
  LossKind loss = LossKind::kMse;
  MetricKind metric = MetricKind::kNone;
  int threads = 1;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  void validate() const;
  static TrainConfig from_kv(const KvConfig& kv);
  static std::vector<std::string> keys();
  std::string to_text() const;
};

struct Sample {
  MolGraph graph;
  std::optional<MolGraph> graph2;  // paired tasks
  std::vector<double> targets;
};

struct Dataset {
  std::vector<Sample> samples;
  bool paired = false;
};

// Manifest: one sample per line, "<graph-file> <targets...>"; paired tasks
// list two graph files before the targets. Relative paths resolve against the
// manifest's directory.
Dataset load_manifest(const std::string& path, bool paired);

struct EpochStats {
  double train_loss = 0.0;
  double val_loss = 0.0;
  double metric = 0.0;
};
using History = std::vector<EpochStats>;

void save_history_csv(const History& history, const std::string& path);

class AdamOptimizer {
 public:
  AdamOptimizer(const ParamStore& params, double lr, double beta1, double beta2, double eps);
  void step(ParamStore& params, const Grads& grads);
  long steps_taken() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<Tensor> m_, v_;
};

// Deterministic mini-batch Adam training. Shuffling and dropout streams are
// derived from cfg.seed; per-sample gradients reduce in batch order so the
// result is independent of cfg.threads. When no validation set is given
// val_loss repeats the train-mode epoch loss and the metric (if any) is
// evaluated on the training set.
History train_loop(GvpGnnModel& model, const Dataset& train, const Dataset* val,
                   const TrainConfig& cfg);

double sample_loss(const GvpGnnModel& model, const Sample& sample, LossKind loss);

// Per-sample prediction reduced to one score for ranking metrics: the first
// output for 1-d outputs, logit[1] - logit[0] for 2-class outputs.
double scalar_score(std::span<const double> output);

// Checkpoint file: "GVPC" magic, u32 version, length-prefixed config text,
// then repeated records [u32 name length, name, u32 rank, u32 dims...,
// f64 little-endian payload] until end of file.
void save_checkpoint(const GvpGnnModel& model, const std::string& path);
GvpGnnModel load_checkpoint(const std::string& path);

// Copies checkpoint tensors whose names match the prefixes (exact name, or
// leading match for entries ending in '*') into the model bit-exactly; every
// other tensor keeps the model's own fresh initialization. Returns the
// transferred names in store order.
std::vector<std::string> transfer_load(GvpGnnModel& model, const std::string& ckpt_path,
                                       std::span<const std::string> prefixes);

inline const std::vector<std::string> kDefaultTransferPrefixes = {"embed", "layer.0.*",
                                                                  "layer.1.*"};

// Gaussian smoothing (sigma in epochs), kernel truncated at +-4 sigma and
// renormalized at the boundaries; length preserved.
std::vector<double> smooth_history(std::span<const double> series, double sigma = 2.0);

}  // namespace gvpnn
