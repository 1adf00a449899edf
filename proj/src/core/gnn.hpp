#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "config.hpp"
#include "gvp.hpp"
#include "molgraph.hpp"
#include "params.hpp"

namespace gvpnn {

enum class TaskMode : std::uint8_t { kPool, kNodeReadout, kPaired };

struct ModelConfig {
  int node_scalars = 100;
  int node_vectors = 16;
  int edge_scalars = 16;
  int edge_vectors = 1;
  int num_layers = 5;
  int msg_gvps = 3;
  int ff_gvps = 2;
  double dropout = 0.1;
  int head_hidden = 100;
  int output_dim = 1;
  TaskMode task_mode = TaskMode::kPool;
  GvpVariant variant = GvpVariant::kGated;
  std::vector<std::string> vocab = ElementVocab::default_vocab().symbols();

  void validate() const;
  std::string to_text() const;
  static ModelConfig from_text(const std::string& text);
  static ModelConfig from_kv(const KvConfig& kv);
  static std::vector<std::string> keys();

  int onehot_width() const { return int(vocab.size()) + 1; }
  GvpConfig message_gvp_cfg(int k) const;
  GvpConfig ff_gvp_cfg() const;
  GvpConfig readout_gvp_cfg() const;
  int head_in() const {
    return task_mode == TaskMode::kPaired ? 2 * node_scalars : node_scalars;
  }
};

// Graph network of GVP message-passing layers over atomic radius graphs:
// one-hot embed, num_layers rounds of (message stack, mean aggregate,
// residual + norm, feed-forward stack, residual + norm), an invariant
// readout GVP, pooling, and a two-layer dense head.
class GvpGnnModel {
 public:
  static GvpGnnModel create(const ModelConfig& cfg, std::uint64_t seed);

  const ModelConfig& config() const { return cfg_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  // Records the full forward pass; returns the output (output_dim x 1).
  // dropout_rng must be non-null in train mode.
  ValId build_forward(Tape& tape, const ParamBinding& binding, const MolGraph& graph,
                      bool train_mode, std::mt19937_64* dropout_rng) const;
  ValId build_forward_pair(Tape& tape, const ParamBinding& binding, const MolGraph& g1,
                           const MolGraph& g2, bool train_mode,
                           std::mt19937_64* dropout_rng) const;

  std::vector<double> predict(const MolGraph& graph) const;
  std::vector<double> predict_pair(const MolGraph& g1, const MolGraph& g2) const;

  // Evaluation-mode forward capturing the node states after every
  // message-passing layer (for the equivariance audit).
  struct Trace {
    std::vector<std::vector<SvTuple>> layer_states;  // [layer][node]
    std::vector<double> output;
  };
  Trace forward_trace(const MolGraph& graph) const;

  void check_graph(const MolGraph& graph) const;

 private:
  GvpGnnModel(ModelConfig cfg, ParamStore params)
      : cfg_(std::move(cfg)), params_(std::move(params)) {}

  struct BuildOut {
    ValId pooled;
    std::vector<std::vector<SvIds>> layer_states;
  };
  BuildOut build_trunk(Tape& tape, const ParamBinding& binding, const MolGraph& graph,
                       bool train_mode, std::mt19937_64* dropout_rng) const;
  ValId build_head(Tape& tape, const ParamBinding& binding, ValId pooled) const;

  ModelConfig cfg_;
  ParamStore params_;
};

// Standardizes scalar channels (learned scale and offset) and rescales vector
// channels by the RMS of their row norms (single learned positive scale, no
// offset). Exposed for unit tests.
SvIds layer_norm_sv(Tape& tape, SvIds x, ValId s_scale, ValId s_offset, ValId v_logscale);

// Entrywise scalar dropout, whole-row vector dropout, survivors scaled by
// 1/(1-rate). Identity in eval mode.
SvIds dropout_sv(Tape& tape, SvIds x, double rate, bool train_mode, std::mt19937_64* rng);

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b);

}  // namespace gvpnn
