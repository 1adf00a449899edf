// C binding over the gvpnn core: opaque handles, status codes, thread-local
// error messages.

#include "gvpnn.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "core/config.hpp"
#include "core/error.hpp"
#include "core/experiments.hpp"
#include "core/gnn.hpp"
#include "core/molgraph.hpp"
#include "core/train.hpp"

struct gvpnn_graph {
  gvpnn::MolGraph g;
};

struct gvpnn_model {
  gvpnn::GvpGnnModel m;
};

namespace {

thread_local std::string g_last_error;

gvpnn_status to_status(gvpnn::Errc code) {
  switch (code) {
    case gvpnn::Errc::invalid_argument:
      return GVPNN_ERR_INVALID_ARGUMENT;
    case gvpnn::Errc::parse:
      return GVPNN_ERR_PARSE;
    case gvpnn::Errc::io:
      return GVPNN_ERR_IO;
    case gvpnn::Errc::numeric:
      return GVPNN_ERR_NUMERIC;
    case gvpnn::Errc::metric_undefined:
      return GVPNN_ERR_METRIC_UNDEFINED;
    case gvpnn::Errc::property_violation:
      return GVPNN_ERR_PROPERTY_VIOLATION;
  }
  return GVPNN_ERR_INVALID_ARGUMENT;
}

template <typename Fn>
gvpnn_status guarded(Fn&& fn) noexcept {
  try {
    fn();
    return GVPNN_OK;
  } catch (const gvpnn::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return GVPNN_ERR_INVALID_ARGUMENT;
  } catch (...) {
    g_last_error = "unknown error";
    return GVPNN_ERR_INVALID_ARGUMENT;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) return nullptr;
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

gvpnn::MolGraph graph_from_xyz(const std::string& text, const gvpnn_graph_options* opts) {
  double cutoff = 4.5;
  bool keep_h = false;
  gvpnn::ElementVocab vocab = gvpnn::ElementVocab::default_vocab();
  if (opts) {
    if (opts->cutoff > 0.0) cutoff = opts->cutoff;
    keep_h = opts->keep_hydrogens != 0;
    if (opts->vocab_csv) vocab = gvpnn::ElementVocab(gvpnn::split_csv(opts->vocab_csv));
  }
  std::vector<gvpnn::AtomRecord> atoms = gvpnn::parse_xyz(text);
  if (!keep_h) atoms = gvpnn::strip_hydrogens(std::move(atoms));
  if (atoms.empty())
    gvpnn::fail(gvpnn::Errc::invalid_argument, "empty graph after hydrogen stripping");
  return gvpnn::featurize(std::move(atoms), std::move(vocab), cutoff);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) gvpnn::fail(gvpnn::Errc::io, "cannot open: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void require_ptr(const void* p, const char* what) {
  if (!p) gvpnn::fail(gvpnn::Errc::invalid_argument, std::string(what) + " must not be NULL");
}

}  // namespace

extern "C" {

const char* gvpnn_version(void) { return "1.0.0"; }

const char* gvpnn_last_error(void) { return g_last_error.c_str(); }

void gvpnn_string_free(char* s) { std::free(s); }

gvpnn_status gvpnn_graph_from_xyz_text(const char* text, const gvpnn_graph_options* opts,
                                       gvpnn_graph** out) {
  return guarded([&]() {
    require_ptr(text, "text");
    require_ptr(out, "out");
    *out = new gvpnn_graph{graph_from_xyz(text, opts)};
  });
}

gvpnn_status gvpnn_graph_from_xyz_file(const char* path, const gvpnn_graph_options* opts,
                                       gvpnn_graph** out) {
  return guarded([&]() {
    require_ptr(path, "path");
    require_ptr(out, "out");
    *out = new gvpnn_graph{graph_from_xyz(read_file(path), opts)};
  });
}

gvpnn_status gvpnn_graph_load(const char* path, gvpnn_graph** out) {
  return guarded([&]() {
    require_ptr(path, "path");
    require_ptr(out, "out");
    *out = new gvpnn_graph{gvpnn::load_graph(path)};
  });
}

gvpnn_status gvpnn_graph_save(const gvpnn_graph* graph, const char* path) {
  return guarded([&]() {
    require_ptr(graph, "graph");
    require_ptr(path, "path");
    gvpnn::save_graph(graph->g, path);
  });
}

size_t gvpnn_graph_num_nodes(const gvpnn_graph* graph) {
  return graph ? size_t(graph->g.num_nodes()) : 0;
}

size_t gvpnn_graph_num_edges(const gvpnn_graph* graph) {
  return graph ? size_t(graph->g.num_edges()) : 0;
}

gvpnn_status gvpnn_graph_vocab(const gvpnn_graph* graph, char** csv_out) {
  return guarded([&]() {
    require_ptr(graph, "graph");
    require_ptr(csv_out, "csv_out");
    std::string csv;
    for (const auto& sym : graph->g.vocab.symbols()) {
      if (!csv.empty()) csv += ",";
      csv += sym;
    }
    *csv_out = dup_string(csv);
  });
}

void gvpnn_graph_free(gvpnn_graph* graph) { delete graph; }

gvpnn_status gvpnn_model_create(const char* config_text, uint64_t seed, gvpnn_model** out) {
  return guarded([&]() {
    require_ptr(config_text, "config_text");
    require_ptr(out, "out");
    gvpnn::ModelConfig cfg = gvpnn::ModelConfig::from_text(config_text);
    *out = new gvpnn_model{gvpnn::GvpGnnModel::create(cfg, seed)};
  });
}

gvpnn_status gvpnn_model_load(const char* path, gvpnn_model** out) {
  return guarded([&]() {
    require_ptr(path, "path");
    require_ptr(out, "out");
    *out = new gvpnn_model{gvpnn::load_checkpoint(path)};
  });
}

gvpnn_status gvpnn_model_save(const gvpnn_model* model, const char* path) {
  return guarded([&]() {
    require_ptr(model, "model");
    require_ptr(path, "path");
    gvpnn::save_checkpoint(model->m, path);
  });
}

gvpnn_status gvpnn_model_config_text(const gvpnn_model* model, char** out) {
  return guarded([&]() {
    require_ptr(model, "model");
    require_ptr(out, "out");
    *out = dup_string(model->m.config().to_text());
  });
}

int gvpnn_model_output_dim(const gvpnn_model* model) {
  return model ? model->m.config().output_dim : 0;
}

void gvpnn_model_free(gvpnn_model* model) { delete model; }

gvpnn_status gvpnn_model_transfer_load(gvpnn_model* model, const char* ckpt_path,
                                       const char* prefixes_csv, char** report_out) {
  return guarded([&]() {
    require_ptr(model, "model");
    require_ptr(ckpt_path, "ckpt_path");
    std::vector<std::string> prefixes =
        prefixes_csv ? gvpnn::split_csv(prefixes_csv) : gvpnn::kDefaultTransferPrefixes;
    std::vector<std::string> names = gvpnn::transfer_load(model->m, ckpt_path, prefixes);
    if (report_out) {
      std::string report;
      for (const auto& name : names) report += name + "\n";
      *report_out = dup_string(report);
    }
  });
}

gvpnn_status gvpnn_predict(const gvpnn_model* model, const gvpnn_graph* graph, double* out,
                           size_t out_len) {
  return guarded([&]() {
    require_ptr(model, "model");
    require_ptr(graph, "graph");
    require_ptr(out, "out");
    std::vector<double> y = model->m.predict(graph->g);
    if (y.size() != out_len)
      gvpnn::fail(gvpnn::Errc::invalid_argument,
                  "output buffer length " + std::to_string(out_len) + " != output_dim " +
                      std::to_string(y.size()));
    std::memcpy(out, y.data(), y.size() * sizeof(double));
  });
}

gvpnn_status gvpnn_predict_pair(const gvpnn_model* model, const gvpnn_graph* g1,
                                const gvpnn_graph* g2, double* out, size_t out_len) {
  return guarded([&]() {
    require_ptr(model, "model");
    require_ptr(g1, "g1");
    require_ptr(g2, "g2");
    require_ptr(out, "out");
    std::vector<double> y = model->m.predict_pair(g1->g, g2->g);
    if (y.size() != out_len)
      gvpnn::fail(gvpnn::Errc::invalid_argument,
                  "output buffer length " + std::to_string(out_len) + " != output_dim " +
                      std::to_string(y.size()));
    std::memcpy(out, y.data(), y.size() * sizeof(double));
  });
}

gvpnn_status gvpnn_train(gvpnn_model* model, const char* manifest_path,
                         const char* val_manifest_path, const char* train_config_text,
                         const char* history_csv_path) {
  return guarded([&]() {
    require_ptr(model, "model");
    require_ptr(manifest_path, "manifest_path");
    require_ptr(train_config_text, "train_config_text");
    gvpnn::KvConfig kv = gvpnn::KvConfig::parse(train_config_text);
    kv.check_known(gvpnn::TrainConfig::keys());
    gvpnn::TrainConfig cfg = gvpnn::TrainConfig::from_kv(kv);
    const bool paired = model->m.config().task_mode == gvpnn::TaskMode::kPaired;
    gvpnn::Dataset train_set = gvpnn::load_manifest(manifest_path, paired);
    gvpnn::Dataset val_set;
    const gvpnn::Dataset* val = nullptr;
    if (val_manifest_path) {
      val_set = gvpnn::load_manifest(val_manifest_path, paired);
      val = &val_set;
    }
    gvpnn::History history = gvpnn::train_loop(model->m, train_set, val, cfg);
    if (history_csv_path) gvpnn::save_history_csv(history, history_csv_path);
  });
}

gvpnn_status gvpnn_eval_manifest(const gvpnn_model* model, const char* manifest_path,
                                 const char* metrics_csv, char** out_text) {
  return guarded([&]() {
    require_ptr(model, "model");
    require_ptr(manifest_path, "manifest_path");
    require_ptr(metrics_csv, "metrics_csv");
    require_ptr(out_text, "out_text");
    const bool paired = model->m.config().task_mode == gvpnn::TaskMode::kPaired;
    gvpnn::Dataset ds = gvpnn::load_manifest(manifest_path, paired);
    std::vector<double> scores, starget, flat_pred, flat_target;
    for (const gvpnn::Sample& sample : ds.samples) {
      std::vector<double> out = paired ? model->m.predict_pair(sample.graph, *sample.graph2)
                                       : model->m.predict(sample.graph);
      scores.push_back(gvpnn::scalar_score(out));
      starget.push_back(sample.targets[0]);
      flat_pred.insert(flat_pred.end(), out.begin(), out.end());
      flat_target.insert(flat_target.end(), sample.targets.begin(), sample.targets.end());
    }
    std::string text;
    for (const std::string& name : gvpnn::split_csv(metrics_csv)) {
      gvpnn::MetricKind kind = gvpnn::metric_from_name(name);
      if (kind == gvpnn::MetricKind::kNone)
        gvpnn::fail(gvpnn::Errc::invalid_argument, "eval: metric 'none' is not reportable");
      double value =
          (kind == gvpnn::MetricKind::kAuroc || kind == gvpnn::MetricKind::kSpearman)
              ? gvpnn::metric_value(kind, scores, starget)
              : gvpnn::metric_value(kind, flat_pred, flat_target);
      text += name + " " + gvpnn::format_double(value) + "\n";
    }
    *out_text = dup_string(text);
  });
}

gvpnn_status gvpnn_metric(const char* kind, const double* preds, const double* targets, size_t n,
                          double* out) {
  return guarded([&]() {
    require_ptr(kind, "kind");
    require_ptr(preds, "preds");
    require_ptr(targets, "targets");
    require_ptr(out, "out");
    gvpnn::MetricKind k = gvpnn::metric_from_name(kind);
    if (k == gvpnn::MetricKind::kNone)
      gvpnn::fail(gvpnn::Errc::invalid_argument, "metric 'none' is not computable");
    *out = gvpnn::metric_value(k, std::span<const double>(preds, n),
                               std::span<const double>(targets, n));
  });
}

gvpnn_status gvpnn_smooth_series(const double* series, size_t n, double sigma, double* out) {
  return guarded([&]() {
    require_ptr(series, "series");
    require_ptr(out, "out");
    std::vector<double> smoothed =
        gvpnn::smooth_history(std::span<const double>(series, n), sigma);
    std::memcpy(out, smoothed.data(), smoothed.size() * sizeof(double));
  });
}

gvpnn_status gvpnn_check_equivariance(const gvpnn_model* model, const gvpnn_graph* graph,
                                      const gvpnn_equivariance_options* opts, double* max_dev_out,
                                      char** report_out) {
  return guarded([&]() {
    require_ptr(model, "model");
    require_ptr(graph, "graph");
    gvpnn::EquivarianceOptions options;
    if (opts) {
      if (opts->trials > 0) options.trials = opts->trials;
      if (opts->tol > 0.0) options.tol = opts->tol;
      options.seed = opts->seed;
      if (opts->threads > 0) options.threads = opts->threads;
      options.inject_bias = opts->inject_bias;
    }
    gvpnn::EquivarianceReport report = gvpnn::check_equivariance(model->m, graph->g, options);
    if (max_dev_out) *max_dev_out = report.max_dev;
    if (report_out) *report_out = dup_string(report.to_text());
    if (!report.pass)
      gvpnn::fail(gvpnn::Errc::property_violation,
                  "equivariance violated: max deviation " + gvpnn::format_double(report.max_dev) +
                      " > tol " + gvpnn::format_double(options.tol) + " (worst transform seed " +
                      std::to_string(report.worst_seed) + ")");
  });
}

gvpnn_status gvpnn_demo_gate(uint64_t seed, const char* report_path,
                             const char* history_csv_path, char** report_out) {
  return guarded([&]() {
    gvpnn::GateDemoResult result = gvpnn::run_demo_gate(seed);
    const std::string text = result.to_text();
    if (report_path) gvpnn::write_text_file(report_path, text);
    if (history_csv_path) {
      std::string csv = "step,gated_mse,ungated_mse\n";
      for (std::size_t i = 0; i < result.gated_curve.size(); ++i) {
        csv += std::to_string((i + 1) * 100) + "," + gvpnn::format_double(result.gated_curve[i]) +
               "," + gvpnn::format_double(result.ungated_curve[i]) + "\n";
      }
      gvpnn::write_text_file(history_csv_path, csv);
    }
    if (report_out) *report_out = dup_string(text);
    if (!result.pass)
      gvpnn::fail(gvpnn::Errc::property_violation, "demo-gate assertions failed:\n" + text);
  });
}

gvpnn_status gvpnn_demo_approx(int nu, int width, uint64_t seed, const char* report_path,
                               const char* history_csv_path, char** report_out) {
  return guarded([&]() {
    gvpnn::ApproxDemoResult result = gvpnn::run_demo_approx(nu, width, seed);
    const std::string text = result.to_text();
    if (report_path) gvpnn::write_text_file(report_path, text);
    if (history_csv_path) {
      std::string csv = "step,train_mse\n";
      for (std::size_t i = 0; i < result.curve_large.size(); ++i)
        csv += std::to_string((i + 1) * 100) + "," + gvpnn::format_double(result.curve_large[i]) +
               "\n";
      gvpnn::write_text_file(history_csv_path, csv);
    }
    if (report_out) *report_out = dup_string(text);
    if (!result.pass)
      gvpnn::fail(gvpnn::Errc::property_violation, "demo-approx assertions failed:\n" + text);
  });
}

}  // extern "C"
