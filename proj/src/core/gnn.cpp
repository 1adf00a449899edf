#include "gnn.hpp"

#include <cmath>

#include "error.hpp"

namespace gvpnn {

void ModelConfig::validate() const {
  require(node_scalars >= 1 && node_vectors >= 1, "ModelConfig: node dims must be positive");
  require(edge_scalars >= 1 && edge_vectors >= 1, "ModelConfig: edge dims must be positive");
  require(num_layers >= 1 && msg_gvps >= 1 && ff_gvps >= 1, "ModelConfig: layer counts must be positive");
  require(dropout >= 0.0 && dropout < 1.0, "ModelConfig: dropout must lie in [0, 1)");
  require(head_hidden >= 1 && output_dim >= 1, "ModelConfig: head dims must be positive");
  require(!vocab.empty(), "ModelConfig: vocabulary must be non-empty");
}

GvpConfig ModelConfig::message_gvp_cfg(int k) const {
  GvpConfig cfg;
  if (k == 0) {
    cfg.in_scalars = node_scalars + edge_scalars;
    cfg.in_vectors = node_vectors + edge_vectors;
  } else {
    cfg.in_scalars = node_scalars;
    cfg.in_vectors = node_vectors;
  }
  cfg.out_scalars = node_scalars;
  cfg.out_vectors = node_vectors;
  cfg.variant = variant;
  return cfg;
}

GvpConfig ModelConfig::ff_gvp_cfg() const {
  GvpConfig cfg;
  cfg.in_scalars = node_scalars;
  cfg.in_vectors = node_vectors;
  cfg.out_scalars = node_scalars;
  cfg.out_vectors = node_vectors;
  cfg.variant = variant;
  return cfg;
}

GvpConfig ModelConfig::readout_gvp_cfg() const {
  GvpConfig cfg;
  cfg.in_scalars = node_scalars;
  cfg.in_vectors = node_vectors;
  cfg.out_scalars = node_scalars;
  cfg.out_vectors = 0;
  cfg.variant = variant;
  return cfg;
}

namespace {

std::string task_mode_name(TaskMode mode) {
  switch (mode) {
    case TaskMode::kPool:
      return "pool";
    case TaskMode::kNodeReadout:
      return "node_readout";
    case TaskMode::kPaired:
      return "paired";
  }
  fail_contract("unknown task mode");
}

TaskMode task_mode_from(const std::string& name) {
  if (name == "pool") return TaskMode::kPool;
  if (name == "node_readout") return TaskMode::kNodeReadout;
  if (name == "paired") return TaskMode::kPaired;
  fail(Errc::parse, "config: unknown task_mode '" + name + "'");
}

std::string join_csv(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ",";
    out += items[i];
  }
  return out;
}

}  // namespace

std::string ModelConfig::to_text() const {
  KvConfig kv;
  kv.set("variant", variant == GvpVariant::kGated ? "gated" : "original");
  kv.set("node_scalars", std::to_string(node_scalars));
  kv.set("node_vectors", std::to_string(node_vectors));
  kv.set("edge_scalars", std::to_string(edge_scalars));
  kv.set("edge_vectors", std::to_string(edge_vectors));
  kv.set("num_layers", std::to_string(num_layers));
  kv.set("msg_gvps", std::to_string(msg_gvps));
  kv.set("ff_gvps", std::to_string(ff_gvps));
  kv.set("dropout", format_double(dropout));
  kv.set("head_hidden", std::to_string(head_hidden));
  kv.set("output_dim", std::to_string(output_dim));
  kv.set("task_mode", task_mode_name(task_mode));
  kv.set("vocab", join_csv(vocab));
  return kv.render();
}

std::vector<std::string> ModelConfig::keys() {
  return {"variant",  "node_scalars", "node_vectors", "edge_scalars", "edge_vectors",
          "num_layers", "msg_gvps",   "ff_gvps",      "dropout",      "head_hidden",
          "output_dim", "task_mode",  "vocab"};
}

ModelConfig ModelConfig::from_kv(const KvConfig& kv) {
  ModelConfig cfg;
  const std::string variant = kv.get_str("variant", "gated");
  if (variant == "gated")
    cfg.variant = GvpVariant::kGated;
  else if (variant == "original")
    cfg.variant = GvpVariant::kOriginal;
  else
    fail(Errc::parse, "config: unknown variant '" + variant + "'");
  cfg.node_scalars = kv.get_int("node_scalars", cfg.node_scalars);
  cfg.node_vectors = kv.get_int("node_vectors", cfg.node_vectors);
  cfg.edge_scalars = kv.get_int("edge_scalars", cfg.edge_scalars);
  cfg.edge_vectors = kv.get_int("edge_vectors", cfg.edge_vectors);
  cfg.num_layers = kv.get_int("num_layers", cfg.num_layers);
  cfg.msg_gvps = kv.get_int("msg_gvps", cfg.msg_gvps);
  cfg.ff_gvps = kv.get_int("ff_gvps", cfg.ff_gvps);
  cfg.dropout = kv.get_double("dropout", cfg.dropout);
  cfg.head_hidden = kv.get_int("head_hidden", cfg.head_hidden);
  cfg.output_dim = kv.get_int("output_dim", cfg.output_dim);
  cfg.task_mode = task_mode_from(kv.get_str("task_mode", "pool"));
  if (kv.has("vocab")) cfg.vocab = split_csv(kv.get_str("vocab", ""));
  cfg.validate();
  return cfg;
}

ModelConfig ModelConfig::from_text(const std::string& text) {
  KvConfig kv = KvConfig::parse(text);
  const auto allowed = keys();
  kv.check_known(allowed);
  return from_kv(kv);
}

namespace {

void add_norm(ParamStore& store, const std::string& prefix, int scalars) {
  Tensor scale(scalars, 1);
  for (double& x : scale.flat()) x = 1.0;
  store.add(prefix + ".scalar_scale", std::move(scale));
  store.add(prefix + ".scalar_offset", Tensor(scalars, 1));
  store.add(prefix + ".vector_logscale", Tensor(1, 1));  // exp(0) = 1
}

}  // namespace

GvpGnnModel GvpGnnModel::create(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::mt19937_64 rng(seed);
  ParamStore store;
  store.add("embed", glorot_uniform(cfg.node_scalars, int(cfg.vocab.size()) + 1, rng));
  for (int layer = 0; layer < cfg.num_layers; ++layer) {
    const std::string lp = "layer." + std::to_string(layer);
    for (int k = 0; k < cfg.msg_gvps; ++k)
      add_gvp_params(store, lp + ".msg." + std::to_string(k), cfg.message_gvp_cfg(k), rng);
    for (int k = 0; k < cfg.ff_gvps; ++k)
      add_gvp_params(store, lp + ".ff." + std::to_string(k), cfg.ff_gvp_cfg(), rng);
    add_norm(store, lp + ".norm.0", cfg.node_scalars);
    add_norm(store, lp + ".norm.1", cfg.node_scalars);
  }
  add_gvp_params(store, "readout", cfg.readout_gvp_cfg(), rng);
  store.add("head.0.w", glorot_uniform(cfg.head_hidden, cfg.head_in(), rng));
  store.add("head.0.b", Tensor(cfg.head_hidden, 1));
  store.add("head.1.w", glorot_uniform(cfg.output_dim, cfg.head_hidden, rng));
  store.add("head.1.b", Tensor(cfg.output_dim, 1));
  return GvpGnnModel(cfg, std::move(store));
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  // splitmix64 finalizer over the packed inputs
  std::uint64_t x = seed + 0x9E3779B97F4A7C15ull * (a + 1) + 0xBF58476D1CE4E5B9ull * (b + 1);
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ull;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBull;
  x ^= x >> 31;
  return x;
}

SvIds layer_norm_sv(Tape& tape, SvIds x, ValId s_scale, ValId s_offset, ValId v_logscale) {
  SvIds out;
  {
    const int n = tape.val(x.s).rows();
    ValId mean = tape.scale(tape.sum(x.s), 1.0 / double(n));
    ValId centered = tape.add_bcast(x.s, tape.scale(mean, -1.0));
    ValId std_dev = tape.scale(tape.frob_norm_safe(centered, 1e-8), 1.0 / std::sqrt(double(n)));
    ValId inv = tape.pow_const(tape.add_const(std_dev, 1e-8), -1.0);
    ValId standardized = tape.mul_bcast(centered, inv);
    out.s = tape.add(tape.hadamard(s_scale, standardized), s_offset);
  }
  if (x.V != kNoVal) {
    const int nu = tape.val(x.V).rows();
    ValId norms = tape.row_norms_safe(x.V, 1e-8);
    ValId mean_sq = tape.scale(tape.sum(tape.pow_const(norms, 2.0)), 1.0 / double(nu));
    ValId inv = tape.pow_const(tape.add_const(mean_sq, 1e-8), -0.5);
    out.V = tape.mul_bcast(tape.mul_bcast(x.V, inv), tape.exp(v_logscale));
  }
  return out;
}

SvIds dropout_sv(Tape& tape, SvIds x, double rate, bool train_mode, std::mt19937_64* rng) {
  require(rate >= 0.0 && rate < 1.0, "dropout_sv: rate must lie in [0, 1)");
  if (!train_mode || rate == 0.0) return x;
  require(rng != nullptr, "dropout_sv: train mode needs an rng");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double keep_scale = 1.0 / (1.0 - rate);
  SvIds out = x;
  {
    const Tensor& s = tape.val(x.s);
    Tensor mask(s.rows(), s.cols());
    for (double& m : mask.flat()) m = unit(*rng) < rate ? 0.0 : keep_scale;
    out.s = tape.mul_mask(x.s, std::move(mask));
  }
  if (x.V != kNoVal) {
    const Tensor& v = tape.val(x.V);
    Tensor mask(v.rows(), v.cols());
    for (int r = 0; r < v.rows(); ++r) {
      const double m = unit(*rng) < rate ? 0.0 : keep_scale;  // whole-row
      for (int c = 0; c < v.cols(); ++c) mask(r, c) = m;
    }
    out.V = tape.mul_mask(x.V, std::move(mask));
  }
  return out;
}

void GvpGnnModel::check_graph(const MolGraph& graph) const {
  require(graph.num_nodes() >= 1, "forward: graph is empty");
  require(graph.vocab.symbols() == cfg_.vocab,
          "forward: graph vocabulary does not match the model (embed width)");
  require(graph.rbf_count == cfg_.edge_scalars,
          "forward: graph RBF width does not match edge_scalars");
}

GvpGnnModel::BuildOut GvpGnnModel::build_trunk(Tape& tape, const ParamBinding& binding,
                                               const MolGraph& graph, bool train_mode,
                                               std::mt19937_64* dropout_rng) const {
  check_graph(graph);
  const int n_nodes = graph.num_nodes();
  ValId embed_w = binding.leaves[std::size_t(params_.index_of("embed"))];

  // Input embedding: scalars from the one-hot, vector channels start at zero.
  std::vector<SvIds> states(static_cast<std::size_t>(n_nodes));
  ValId zero_v = tape.leaf(Tensor(cfg_.node_vectors, 3));
  for (int i = 0; i < n_nodes; ++i) {
    states[std::size_t(i)].s = tape.matmul(embed_w, tape.leaf(graph.node_onehot(i)));
    states[std::size_t(i)].V = zero_v;
  }

  // Edge features are computed once and held fixed across layers.
  std::vector<SvIds> edge_feats(graph.edges.size());
  std::vector<std::vector<int>> incoming(static_cast<std::size_t>(n_nodes));
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    edge_feats[e].s = tape.leaf(graph.edge_scalar_tensor(int(e)));
    edge_feats[e].V = tape.leaf(graph.edge_unit_tensor(int(e)));
    incoming[std::size_t(graph.edges[e].dst)].push_back(int(e));
  }

  BuildOut out;
  out.layer_states.reserve(std::size_t(cfg_.num_layers));
  for (int layer = 0; layer < cfg_.num_layers; ++layer) {
    const std::string lp = "layer." + std::to_string(layer);
    std::vector<GvpParamIds> msg_ids(static_cast<std::size_t>(cfg_.msg_gvps));
    for (int k = 0; k < cfg_.msg_gvps; ++k)
      msg_ids[std::size_t(k)] = gvp_param_ids(params_, binding, lp + ".msg." + std::to_string(k));
    std::vector<GvpParamIds> ff_ids(static_cast<std::size_t>(cfg_.ff_gvps));
    for (int k = 0; k < cfg_.ff_gvps; ++k)
      ff_ids[std::size_t(k)] = gvp_param_ids(params_, binding, lp + ".ff." + std::to_string(k));
    auto norm_ids = [&](int which, const char* leafname) {
      return binding.leaves[std::size_t(
          params_.index_of(lp + ".norm." + std::to_string(which) + "." + leafname))];
    };

    // Messages over every directed edge j -> i from the source state and the
    // fixed edge features.
    std::vector<SvIds> messages(graph.edges.size());
    for (std::size_t e = 0; e < graph.edges.size(); ++e) {
      const int src = graph.edges[e].src;
      SvIds m;
      m.s = tape.concat_rows(states[std::size_t(src)].s, edge_feats[e].s);
      m.V = tape.concat_rows(states[std::size_t(src)].V, edge_feats[e].V);
      for (int k = 0; k < cfg_.msg_gvps; ++k)
        m = gvp_forward(tape, cfg_.message_gvp_cfg(k), msg_ids[std::size_t(k)], m);
      messages[e] = m;
    }

    for (int i = 0; i < n_nodes; ++i) {
      SvIds& h = states[std::size_t(i)];
      // Mean of incoming messages; the zero tuple for isolated nodes.
      SvIds agg;
      const auto& inc = incoming[std::size_t(i)];
      if (inc.empty()) {
        agg.s = tape.leaf(Tensor(cfg_.node_scalars, 1));
        agg.V = tape.leaf(Tensor(cfg_.node_vectors, 3));
      } else {
        std::vector<ValId> s_ids, v_ids;
        s_ids.reserve(inc.size());
        v_ids.reserve(inc.size());
        for (int e : inc) {
          s_ids.push_back(messages[std::size_t(e)].s);
          v_ids.push_back(messages[std::size_t(e)].V);
        }
        agg.s = tape.mean_n(s_ids);
        agg.V = tape.mean_n(v_ids);
      }
      agg = dropout_sv(tape, agg, cfg_.dropout, train_mode, dropout_rng);
      h.s = tape.add(h.s, agg.s);
      h.V = tape.add(h.V, agg.V);
      h = layer_norm_sv(tape, h, norm_ids(0, "scalar_scale"), norm_ids(0, "scalar_offset"),
                        norm_ids(0, "vector_logscale"));

      SvIds ff = h;
      for (int k = 0; k < cfg_.ff_gvps; ++k)
        ff = gvp_forward(tape, cfg_.ff_gvp_cfg(), ff_ids[std::size_t(k)], ff);
      ff = dropout_sv(tape, ff, cfg_.dropout, train_mode, dropout_rng);
      h.s = tape.add(h.s, ff.s);
      h.V = tape.add(h.V, ff.V);
      h = layer_norm_sv(tape, h, norm_ids(1, "scalar_scale"), norm_ids(1, "scalar_offset"),
                        norm_ids(1, "vector_logscale"));
    }
    out.layer_states.push_back(states);
  }

  // Invariant readout: a GVP with no vector outputs, then the task pool.
  GvpParamIds readout = gvp_param_ids(params_, binding, "readout");
  std::vector<ValId> pooled_inputs;
  for (int i = 0; i < n_nodes; ++i) {
    SvIds r = gvp_forward(tape, cfg_.readout_gvp_cfg(), readout, states[std::size_t(i)]);
    if (cfg_.task_mode == TaskMode::kNodeReadout) {
      if (graph.atoms[std::size_t(i)].readout_tag) pooled_inputs.push_back(r.s);
    } else {
      pooled_inputs.push_back(r.s);
    }
  }
  if (cfg_.task_mode == TaskMode::kNodeReadout && pooled_inputs.empty())
    fail(Errc::invalid_argument, "forward: node_readout requires at least one tagged node");
  out.pooled = tape.mean_n(pooled_inputs);
  return out;
}

ValId GvpGnnModel::build_head(Tape& tape, const ParamBinding& binding, ValId pooled) const {
  auto leaf = [&](const char* name) {
    return binding.leaves[std::size_t(params_.index_of(name))];
  };
  ValId hidden = tape.relu(tape.affine(leaf("head.0.w"), pooled, leaf("head.0.b")));
  return tape.affine(leaf("head.1.w"), hidden, leaf("head.1.b"));
}

ValId GvpGnnModel::build_forward(Tape& tape, const ParamBinding& binding, const MolGraph& graph,
                                 bool train_mode, std::mt19937_64* dropout_rng) const {
  require(cfg_.task_mode != TaskMode::kPaired, "build_forward: paired models need two graphs");
  BuildOut trunk = build_trunk(tape, binding, graph, train_mode, dropout_rng);
  return build_head(tape, binding, trunk.pooled);
}

ValId GvpGnnModel::build_forward_pair(Tape& tape, const ParamBinding& binding, const MolGraph& g1,
                                      const MolGraph& g2, bool train_mode,
                                      std::mt19937_64* dropout_rng) const {
  require(cfg_.task_mode == TaskMode::kPaired, "build_forward_pair: model is not paired");
  // Two independent passes share one parameter binding (weight tying).
  BuildOut t1 = build_trunk(tape, binding, g1, train_mode, dropout_rng);
  BuildOut t2 = build_trunk(tape, binding, g2, train_mode, dropout_rng);
  return build_head(tape, binding, tape.concat_rows(t1.pooled, t2.pooled));
}

namespace {

std::vector<double> column_to_vector(const Tensor& t) {
  return {t.flat().begin(), t.flat().end()};
}

}  // namespace

std::vector<double> GvpGnnModel::predict(const MolGraph& graph) const {
  Tape tape;
  ParamBinding binding = bind_params(tape, params_);
  ValId out = build_forward(tape, binding, graph, false, nullptr);
  return column_to_vector(tape.val(out));
}

std::vector<double> GvpGnnModel::predict_pair(const MolGraph& g1, const MolGraph& g2) const {
  Tape tape;
  ParamBinding binding = bind_params(tape, params_);
  ValId out = build_forward_pair(tape, binding, g1, g2, false, nullptr);
  return column_to_vector(tape.val(out));
}

GvpGnnModel::Trace GvpGnnModel::forward_trace(const MolGraph& graph) const {
  Tape tape;
  ParamBinding binding = bind_params(tape, params_);
  BuildOut trunk = build_trunk(tape, binding, graph, false, nullptr);
  ValId out = build_head(tape, binding, trunk.pooled);
  Trace trace;
  trace.layer_states.reserve(trunk.layer_states.size());
  for (const auto& layer : trunk.layer_states) {
    std::vector<SvTuple> nodes;
    nodes.reserve(layer.size());
    for (const SvIds& ids : layer) nodes.emplace_back(tape.val(ids.s), tape.val(ids.V));
    trace.layer_states.push_back(std::move(nodes));
  }
  trace.output = column_to_vector(tape.val(out));
  return trace;
}

}  // namespace gvpnn
