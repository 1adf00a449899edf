#include "train.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include "error.hpp"

namespace gvpnn {

MetricKind metric_from_name(const std::string& name) {
  if (name == "mae") return MetricKind::kMae;
  if (name == "rmse") return MetricKind::kRmse;
  if (name == "auroc") return MetricKind::kAuroc;
  if (name == "spearman") return MetricKind::kSpearman;
  if (name == "none") return MetricKind::kNone;
  fail(Errc::parse, "unknown metric '" + name + "'");
}

std::string metric_name(MetricKind kind) {
  switch (kind) {
    case MetricKind::kMae:
      return "mae";
    case MetricKind::kRmse:
      return "rmse";
    case MetricKind::kAuroc:
      return "auroc";
    case MetricKind::kSpearman:
      return "spearman";
    case MetricKind::kNone:
      return "none";
  }
  fail_contract("unknown metric kind");
}

double loss_mse(std::span<const double> pred, std::span<const double> target) {
  require(pred.size() == target.size() && !pred.empty(), "loss_mse: shape mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    s += d * d;
  }
  return s / double(pred.size());
}

double loss_cross_entropy(std::span<const double> logits, int label) {
  require(!logits.empty(), "loss_cross_entropy: empty logits");
  require(label >= 0 && std::size_t(label) < logits.size(),
          "loss_cross_entropy: label out of range");
  double m = logits[0];
  for (double z : logits) m = std::max(m, z);
  double se = 0.0;
  for (double z : logits) se += std::exp(z - m);
  return m + std::log(se) - logits[std::size_t(label)];
}

namespace {

// Ranks 1..n with average ranks for ties.
std::vector<double> average_ranks(std::span<const double> xs) {
  const std::size_t n = xs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double avg = (double(i) + double(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  const double n = double(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0)
    fail(Errc::metric_undefined, "spearman: constant series has no defined rank correlation");
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

double metric_value(MetricKind kind, std::span<const double> preds,
                    std::span<const double> targets) {
  require(preds.size() == targets.size(), "metric: size mismatch");
  require(preds.size() >= 2, "metric: need at least two samples");
  switch (kind) {
    case MetricKind::kMae: {
      double s = 0.0;
      for (std::size_t i = 0; i < preds.size(); ++i) s += std::fabs(preds[i] - targets[i]);
      return s / double(preds.size());
    }
    case MetricKind::kRmse: {
      double s = 0.0;
      for (std::size_t i = 0; i < preds.size(); ++i)
        s += (preds[i] - targets[i]) * (preds[i] - targets[i]);
      return std::sqrt(s / double(preds.size()));
    }
    case MetricKind::kAuroc: {
      std::size_t n_pos = 0;
      for (double t : targets) n_pos += t > 0.5 ? 1 : 0;
      const std::size_t n_neg = targets.size() - n_pos;
      if (n_pos == 0 || n_neg == 0)
        fail(Errc::metric_undefined, "auroc: needs both classes present");
      // Rank statistic: U / (n_pos * n_neg) with average ranks for ties.
      std::vector<double> ranks = average_ranks(preds);
      double rank_sum = 0.0;
      for (std::size_t i = 0; i < targets.size(); ++i)
        if (targets[i] > 0.5) rank_sum += ranks[i];
      const double u = rank_sum - double(n_pos) * double(n_pos + 1) / 2.0;
      return u / (double(n_pos) * double(n_neg));
    }
    case MetricKind::kSpearman: {
      std::vector<double> rx = average_ranks(preds);
      std::vector<double> ry = average_ranks(targets);
      return pearson(rx, ry);
    }
    case MetricKind::kNone:
      fail_contract("metric_value: kind is none");
  }
  fail_contract("metric_value: unknown kind");
}

void TrainConfig::validate() const {
  require(lr > 0.0, "TrainConfig: lr must be positive");
  require(batch_size >= 1, "TrainConfig: batch_size must be >= 1");
  require(max_epochs >= 1, "TrainConfig: max_epochs must be >= 1");
  require(threads >= 1, "TrainConfig: threads must be >= 1");
}

std::vector<std::string> TrainConfig::keys() {
  return {"lr", "batch_size", "max_epochs", "seed", "loss", "metric", "threads"};
}

TrainConfig TrainConfig::from_kv(const KvConfig& kv) {
  TrainConfig cfg;
  cfg.lr = kv.get_double("lr", cfg.lr);
  cfg.batch_size = kv.get_int("batch_size", cfg.batch_size);
  cfg.max_epochs = kv.get_int("max_epochs", cfg.max_epochs);
  cfg.seed = kv.get_u64("seed", cfg.seed);
  const std::string loss = kv.get_str("loss", "mse");
  if (loss == "mse")
    cfg.loss = LossKind::kMse;
  else if (loss == "cross_entropy")
    cfg.loss = LossKind::kCrossEntropy;
  else
    fail(Errc::parse, "config: unknown loss '" + loss + "'");
  cfg.metric = metric_from_name(kv.get_str("metric", "none"));
  cfg.threads = kv.get_int("threads", cfg.threads);
  cfg.validate();
  return cfg;
}

std::string TrainConfig::to_text() const {
  KvConfig kv;
  kv.set("lr", format_double(lr));
  kv.set("batch_size", std::to_string(batch_size));
  kv.set("max_epochs", std::to_string(max_epochs));
  kv.set("seed", std::to_string(seed));
  kv.set("loss", loss == LossKind::kMse ? "mse" : "cross_entropy");
  kv.set("metric", metric_name(metric));
  kv.set("threads", std::to_string(threads));
  return kv.render();
}

Dataset load_manifest(const std::string& path, bool paired) {
  std::ifstream in(path);
  if (!in) fail(Errc::io, "cannot open manifest: " + path);
  const std::filesystem::path base = std::filesystem::path(path).parent_path();
  auto resolve = [&](const std::string& p) {
    std::filesystem::path fp(p);
    return fp.is_absolute() ? fp.string() : (base / fp).string();
  };
  Dataset ds;
  ds.paired = paired;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream is(line);
    std::vector<std::string> toks;
    std::string tok;
    while (is >> tok) toks.push_back(tok);
    if (toks.empty()) continue;
    const std::size_t paths = paired ? 2 : 1;
    if (toks.size() < paths + 1)
      fail(Errc::parse, "manifest line " + std::to_string(line_no) +
                            ": expected graph path(s) and at least one target");
    Sample sample;
    sample.graph = load_graph(resolve(toks[0]));
    if (paired) sample.graph2 = load_graph(resolve(toks[1]));
    for (std::size_t t = paths; t < toks.size(); ++t) {
      try {
        sample.targets.push_back(std::stod(toks[t]));
      } catch (const std::exception&) {
        fail(Errc::parse,
             "manifest line " + std::to_string(line_no) + ": bad target '" + toks[t] + "'");
      }
    }
    ds.samples.push_back(std::move(sample));
  }
  if (ds.samples.empty()) fail(Errc::parse, "manifest is empty: " + path);
  return ds;
}

void save_history_csv(const History& history, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::io, "cannot open for writing: " + path);
  out << "epoch,train_loss,val_loss,metric\n";
  for (std::size_t i = 0; i < history.size(); ++i) {
    out << (i + 1) << ',' << format_double(history[i].train_loss) << ','
        << format_double(history[i].val_loss) << ',' << format_double(history[i].metric) << '\n';
  }
  if (!out) fail(Errc::io, "write failed: " + path);
}

AdamOptimizer::AdamOptimizer(const ParamStore& params, double lr, double beta1, double beta2,
                             double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  m_.reserve(std::size_t(params.size()));
  v_.reserve(std::size_t(params.size()));
  for (int i = 0; i < params.size(); ++i) {
    m_.emplace_back(params.at(i).rows(), params.at(i).cols());
    v_.emplace_back(params.at(i).rows(), params.at(i).cols());
  }
}

void AdamOptimizer::step(ParamStore& params, const Grads& grads) {
  require(params.size() == int(m_.size()) && grads.size() == int(m_.size()),
          "AdamOptimizer: store/grads size mismatch");
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, double(t_));
  const double bc2 = 1.0 - std::pow(beta2_, double(t_));
  for (int i = 0; i < params.size(); ++i) {
    Tensor& p = params.at(i);
    const Tensor& g = grads[i];
    Tensor& m = m_[std::size_t(i)];
    Tensor& v = v_[std::size_t(i)];
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double gk = g.data()[k];
      m.data()[k] = beta1_ * m.data()[k] + (1.0 - beta1_) * gk;
      v.data()[k] = beta2_ * v.data()[k] + (1.0 - beta2_) * gk * gk;
      const double mhat = m.data()[k] / bc1;
      const double vhat = v.data()[k] / bc2;
      p.data()[k] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

namespace {

// Builds the tape for one sample and returns (loss value, loss node id).
std::pair<double, ValId> build_sample_loss(Tape& tape, const ParamBinding& binding,
                                           const GvpGnnModel& model, const Sample& sample,
                                           LossKind loss, bool train_mode,
                                           std::mt19937_64* dropout_rng) {
  ValId out;
  if (model.config().task_mode == TaskMode::kPaired) {
    require(sample.graph2.has_value(), "train: paired model needs paired samples");
    out = model.build_forward_pair(tape, binding, sample.graph, *sample.graph2, train_mode,
                                   dropout_rng);
  } else {
    out = model.build_forward(tape, binding, sample.graph, train_mode, dropout_rng);
  }
  const int out_dim = model.config().output_dim;
  ValId loss_id;
  if (loss == LossKind::kMse) {
    require(int(sample.targets.size()) == out_dim, "train: target width != output_dim");
    ValId target = tape.leaf(Tensor::column(sample.targets));
    ValId diff = tape.add(out, tape.scale(target, -1.0));
    loss_id = tape.scale(tape.sum(tape.hadamard(diff, diff)), 1.0 / double(out_dim));
  } else {
    require(sample.targets.size() == 1, "train: cross-entropy expects a single label target");
    const double raw = sample.targets[0];
    const int label = int(std::llround(raw));
    require(std::fabs(raw - double(label)) < 1e-9, "train: label is not an integer");
    require(label >= 0 && label < out_dim, "train: label out of range");
    loss_id = tape.softmax_ce(out, label);
  }
  return {tape.val(loss_id)(0, 0), loss_id};
}

struct SampleResult {
  double loss = 0.0;
  Grads grads;
  explicit SampleResult(const ParamStore& store) : grads(store) {}
};

double eval_sample_loss(const GvpGnnModel& model, const Sample& sample, LossKind loss) {
  std::vector<double> out = model.config().task_mode == TaskMode::kPaired
                                ? model.predict_pair(sample.graph, *sample.graph2)
                                : model.predict(sample.graph);
  if (loss == LossKind::kMse) return loss_mse(out, sample.targets);
  return loss_cross_entropy(out, int(std::llround(sample.targets[0])));
}

}  // namespace

double sample_loss(const GvpGnnModel& model, const Sample& sample, LossKind loss) {
  return eval_sample_loss(model, sample, loss);
}

double scalar_score(std::span<const double> output) {
  require(!output.empty(), "scalar_score: empty output");
  if (output.size() == 1) return output[0];
  if (output.size() == 2) return output[1] - output[0];
  fail(Errc::metric_undefined, "scalar_score: ranking metrics need 1- or 2-wide outputs");
}

History train_loop(GvpGnnModel& model, const Dataset& train, const Dataset* val,
                   const TrainConfig& cfg) {
  cfg.validate();
  require(!train.samples.empty(), "train_loop: empty dataset");
  const int n = int(train.samples.size());

  AdamOptimizer adam(model.params(), cfg.lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
  std::mt19937_64 shuffle_rng(mix_seed(cfg.seed, 0x5340ull, 0));
  History history;
  history.reserve(std::size_t(cfg.max_epochs));

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    for (int start = 0; start < n; start += cfg.batch_size) {
      const int count = std::min(cfg.batch_size, n - start);
      std::vector<SampleResult> results;
      results.reserve(std::size_t(count));
      for (int k = 0; k < count; ++k) results.emplace_back(model.params());

      auto run_sample = [&](int k) {
        const int idx = order[std::size_t(start + k)];
        const Sample& sample = train.samples[std::size_t(idx)];
        std::mt19937_64 dropout_rng(mix_seed(cfg.seed, std::uint64_t(epoch) + 1,
                                             std::uint64_t(idx) + 1));
        Tape tape;
        ParamBinding binding = bind_params(tape, model.params());
        auto [loss, loss_id] =
            build_sample_loss(tape, binding, model, sample, cfg.loss, true, &dropout_rng);
        results[std::size_t(k)].loss = loss;
        std::vector<Tensor> adjoints = tape.backward(loss_id);
        results[std::size_t(k)].grads.accumulate(adjoints, binding, 1.0);
      };

      if (cfg.threads <= 1 || count == 1) {
        for (int k = 0; k < count; ++k) run_sample(k);
      } else {
        std::vector<std::thread> pool;
        const int workers = std::min(cfg.threads, count);
        std::atomic<int> next{0};
        for (int w = 0; w < workers; ++w)
          pool.emplace_back([&]() {
            for (int k = next.fetch_add(1); k < count; k = next.fetch_add(1)) run_sample(k);
          });
        for (auto& th : pool) th.join();
      }

      // Serial reduction in batch order keeps results thread-count independent.
      Grads total(model.params());
      double batch_loss = 0.0;
      for (int k = 0; k < count; ++k) {
        batch_loss += results[std::size_t(k)].loss;
        total.add_scaled(results[std::size_t(k)].grads, 1.0 / double(count));
      }
      if (!std::isfinite(batch_loss))
        fail(Errc::numeric, "train_loop: non-finite loss at epoch " + std::to_string(epoch + 1) +
                                " batch " + std::to_string(start / cfg.batch_size + 1));
      loss_sum += batch_loss;
      adam.step(model.params(), total);
    }

    EpochStats stats;
    stats.train_loss = loss_sum / double(n);
    const Dataset* eval_set = val ? val : &train;
    if (val == nullptr && cfg.metric == MetricKind::kNone) {
      stats.val_loss = stats.train_loss;
      stats.metric = std::numeric_limits<double>::quiet_NaN();
    } else {
      double vsum = 0.0;
      std::vector<double> scores, starget, flat_pred, flat_target;
      for (const Sample& sample : eval_set->samples) {
        std::vector<double> out = model.config().task_mode == TaskMode::kPaired
                                      ? model.predict_pair(sample.graph, *sample.graph2)
                                      : model.predict(sample.graph);
        vsum += cfg.loss == LossKind::kMse
                    ? loss_mse(out, sample.targets)
                    : loss_cross_entropy(out, int(std::llround(sample.targets[0])));
        if (cfg.metric == MetricKind::kAuroc || cfg.metric == MetricKind::kSpearman) {
          scores.push_back(scalar_score(out));
          starget.push_back(sample.targets[0]);
        } else {
          flat_pred.insert(flat_pred.end(), out.begin(), out.end());
          flat_target.insert(flat_target.end(), sample.targets.begin(), sample.targets.end());
        }
      }
      stats.val_loss = vsum / double(eval_set->samples.size());
      if (cfg.metric == MetricKind::kNone)
        stats.metric = std::numeric_limits<double>::quiet_NaN();
      else if (cfg.metric == MetricKind::kAuroc || cfg.metric == MetricKind::kSpearman)
        stats.metric = metric_value(cfg.metric, scores, starget);
      else
        stats.metric = metric_value(cfg.metric, flat_pred, flat_target);
    }
    history.push_back(stats);
  }
  return history;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

void put_u32(std::ostream& out, std::uint32_t x) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = (unsigned char)((x >> (8 * i)) & 0xFF);
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_f64(std::ostream& out, double x) {
  std::uint64_t bits;
  std::memcpy(&bits, &x, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = (unsigned char)((bits >> (8 * i)) & 0xFF);
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t take_u32(std::istream& in, const char* what) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4))
    fail(Errc::parse, std::string("truncated checkpoint while reading ") + what);
  std::uint32_t x = 0;
  for (int i = 0; i < 4; ++i) x |= std::uint32_t(b[i]) << (8 * i);
  return x;
}

double take_f64(std::istream& in, const char* what) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8))
    fail(Errc::parse, std::string("truncated checkpoint while reading ") + what);
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= std::uint64_t(b[i]) << (8 * i);
  double x;
  std::memcpy(&x, &bits, 8);
  return x;
}

constexpr char kMagic[4] = {'G', 'V', 'P', 'C'};
constexpr std::uint32_t kCheckpointVersion = 1;

struct RawCheckpoint {
  std::string config_text;
  std::vector<NamedTensor> tensors;
  const Tensor* find(const std::string& name) const {
    for (const auto& t : tensors)
      if (t.name == name) return &t.value;
    return nullptr;
  }
};

RawCheckpoint read_checkpoint_raw(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io, "cannot open checkpoint: " + path);
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    fail(Errc::parse, "not a checkpoint file (bad magic): " + path);
  const std::uint32_t version = take_u32(in, "version");
  if (version != kCheckpointVersion)
    fail(Errc::parse, "unsupported checkpoint version " + std::to_string(version));
  const std::uint32_t cfg_len = take_u32(in, "config length");
  RawCheckpoint raw;
  raw.config_text.resize(cfg_len);
  if (cfg_len > 0 && !in.read(raw.config_text.data(), cfg_len))
    fail(Errc::parse, "truncated checkpoint while reading config text");
  for (;;) {
    // Records run to end of file; a clean EOF at a record boundary ends them.
    int probe = in.peek();
    if (probe == std::char_traits<char>::eof()) break;
    const std::uint32_t name_len = take_u32(in, "tensor name length");
    NamedTensor nt;
    nt.name.resize(name_len);
    if (!in.read(nt.name.data(), name_len))
      fail(Errc::parse, "truncated checkpoint while reading tensor name");
    const std::uint32_t rank = take_u32(in, "tensor rank");
    if (rank != 2) fail(Errc::parse, "checkpoint tensor " + nt.name + ": expected rank 2");
    const std::uint32_t rows = take_u32(in, "tensor rows");
    const std::uint32_t cols = take_u32(in, "tensor cols");
    Tensor t(static_cast<int>(rows), static_cast<int>(cols));
    for (std::size_t k = 0; k < t.size(); ++k) t.data()[k] = take_f64(in, nt.name.c_str());
    nt.value = std::move(t);
    raw.tensors.push_back(std::move(nt));
  }
  return raw;
}

}  // namespace

void save_checkpoint(const GvpGnnModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::io, "cannot open for writing: " + path);
  out.write(kMagic, 4);
  put_u32(out, kCheckpointVersion);
  const std::string cfg_text = model.config().to_text();
  put_u32(out, std::uint32_t(cfg_text.size()));
  out.write(cfg_text.data(), std::streamsize(cfg_text.size()));
  const ParamStore& store = model.params();
  for (int i = 0; i < store.size(); ++i) {
    const std::string& name = store.name(i);
    const Tensor& t = store.at(i);
    put_u32(out, std::uint32_t(name.size()));
    out.write(name.data(), std::streamsize(name.size()));
    put_u32(out, 2);
    put_u32(out, std::uint32_t(t.rows()));
    put_u32(out, std::uint32_t(t.cols()));
    for (std::size_t k = 0; k < t.size(); ++k) put_f64(out, t.data()[k]);
  }
  if (!out) fail(Errc::io, "write failed: " + path);
}

GvpGnnModel load_checkpoint(const std::string& path) {
  RawCheckpoint raw = read_checkpoint_raw(path);
  ModelConfig cfg = ModelConfig::from_text(raw.config_text);
  GvpGnnModel model = GvpGnnModel::create(cfg, 0);
  ParamStore& store = model.params();
  require(int(raw.tensors.size()) == store.size(),
          "checkpoint " + path + ": tensor count does not match the config");
  for (int i = 0; i < store.size(); ++i) {
    const Tensor* rec = raw.find(store.name(i));
    if (!rec) fail(Errc::parse, "checkpoint is missing tensor " + store.name(i));
    if (rec->rows() != store.at(i).rows() || rec->cols() != store.at(i).cols())
      fail(Errc::parse, "checkpoint tensor " + store.name(i) + ": shape mismatch");
    store.at(i) = *rec;
  }
  return model;
}

std::vector<std::string> transfer_load(GvpGnnModel& model, const std::string& ckpt_path,
                                       std::span<const std::string> prefixes) {
  RawCheckpoint raw = read_checkpoint_raw(ckpt_path);
  ParamStore& store = model.params();
  auto matches = [](const std::string& name, const std::string& prefix) {
    if (!prefix.empty() && prefix.back() == '*')
      return name.rfind(prefix.substr(0, prefix.size() - 1), 0) == 0;
    return name == prefix;
  };
  std::vector<bool> selected(std::size_t(store.size()), false);
  for (const std::string& prefix : prefixes) {
    bool any = false;
    for (int i = 0; i < store.size(); ++i) {
      if (matches(store.name(i), prefix)) {
        selected[std::size_t(i)] = true;
        any = true;
      }
    }
    require(any, "transfer_load: prefix '" + prefix + "' matches no model tensor");
  }
  std::vector<std::string> transferred;
  for (int i = 0; i < store.size(); ++i) {
    if (!selected[std::size_t(i)]) continue;
    const Tensor* rec = raw.find(store.name(i));
    if (!rec)
      fail(Errc::invalid_argument, "transfer_load: checkpoint is missing tensor " + store.name(i));
    if (rec->rows() != store.at(i).rows() || rec->cols() != store.at(i).cols())
      fail(Errc::invalid_argument,
           "transfer_load: shape mismatch for tensor " + store.name(i));
    store.at(i) = *rec;
    transferred.push_back(store.name(i));
  }
  return transferred;
}

std::vector<double> smooth_history(std::span<const double> series, double sigma) {
  require(sigma > 0.0, "smooth_history: sigma must be positive");
  const int n = int(series.size());
  const int radius = int(std::ceil(4.0 * sigma));
  std::vector<double> weights(static_cast<std::size_t>(2 * radius + 1));
  for (int k = -radius; k <= radius; ++k)
    weights[std::size_t(k + radius)] = std::exp(-double(k) * double(k) / (2.0 * sigma * sigma));
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double num = 0.0, den = 0.0;
    for (int k = -radius; k <= radius; ++k) {
      const int j = i + k;
      if (j < 0 || j >= n) continue;  // renormalized at the boundaries
      num += weights[std::size_t(k + radius)] * series[std::size_t(j)];
      den += weights[std::size_t(k + radius)];
    }
    out[std::size_t(i)] = num / den;
  }
  return out;
}

}  // namespace gvpnn
