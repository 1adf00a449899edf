/* C interface for the gvpnn library: equivariant GVP graph networks over
 * atomic point clouds, with training, checkpoints, transfer loading, an
 * equivariance audit, and two built-in demonstrations.
 *
 * All functions returning gvpnn_status set a thread-local message readable
 * via gvpnn_last_error() on failure. Strings returned through char** are
 * heap-allocated; release them with gvpnn_string_free().
 */
#ifndef GVPNN_H
#define GVPNN_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define GVPNN_API __declspec(dllexport)
#else
#define GVPNN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gvpnn_status {
  GVPNN_OK = 0,
  GVPNN_ERR_INVALID_ARGUMENT = 1,
  GVPNN_ERR_PARSE = 2,
  GVPNN_ERR_IO = 3,
  GVPNN_ERR_NUMERIC = 4,
  GVPNN_ERR_METRIC_UNDEFINED = 5,
  GVPNN_ERR_PROPERTY_VIOLATION = 6,
} gvpnn_status;

typedef struct gvpnn_graph gvpnn_graph;
typedef struct gvpnn_model gvpnn_model;

GVPNN_API const char* gvpnn_version(void);
GVPNN_API const char* gvpnn_last_error(void);
GVPNN_API void gvpnn_string_free(char* s);

/* -------------------------------------------------------------------------
 * Graphs
 *
 * XYZ input: first line atom count, second line comment, then
 * "symbol x y z" rows with an optional fifth column "1" tagging readout
 * atoms. Graph files are JSON (version 1); positions are authoritative and
 * edges are recomputed on load.
 */

typedef struct gvpnn_graph_options {
  double cutoff;         /* edge cutoff in Angstrom; <= 0 selects 4.5 */
  int keep_hydrogens;    /* 0: strip H atoms (default), nonzero: keep */
  const char* vocab_csv; /* element vocabulary, comma separated; NULL: default */
} gvpnn_graph_options;

GVPNN_API gvpnn_status gvpnn_graph_from_xyz_text(const char* text,
                                                 const gvpnn_graph_options* opts,
                                                 gvpnn_graph** out);
GVPNN_API gvpnn_status gvpnn_graph_from_xyz_file(const char* path,
                                                 const gvpnn_graph_options* opts,
                                                 gvpnn_graph** out);
GVPNN_API gvpnn_status gvpnn_graph_load(const char* path, gvpnn_graph** out);
GVPNN_API gvpnn_status gvpnn_graph_save(const gvpnn_graph* graph, const char* path);
GVPNN_API size_t gvpnn_graph_num_nodes(const gvpnn_graph* graph);
GVPNN_API size_t gvpnn_graph_num_edges(const gvpnn_graph* graph);
GVPNN_API gvpnn_status gvpnn_graph_vocab(const gvpnn_graph* graph, char** csv_out);
GVPNN_API void gvpnn_graph_free(gvpnn_graph* graph);

/* -------------------------------------------------------------------------
 * Models
 *
 * config_text is "key = value" lines; unknown keys are rejected. Keys:
 *   variant (gated|original), node_scalars, node_vectors, edge_scalars,
 *   edge_vectors, num_layers, msg_gvps, ff_gvps, dropout, head_hidden,
 *   output_dim, task_mode (pool|node_readout|paired), vocab (csv).
 */

GVPNN_API gvpnn_status gvpnn_model_create(const char* config_text, uint64_t seed,
                                          gvpnn_model** out);
GVPNN_API gvpnn_status gvpnn_model_load(const char* path, gvpnn_model** out);
GVPNN_API gvpnn_status gvpnn_model_save(const gvpnn_model* model, const char* path);
GVPNN_API gvpnn_status gvpnn_model_config_text(const gvpnn_model* model, char** out);
GVPNN_API int gvpnn_model_output_dim(const gvpnn_model* model);
GVPNN_API void gvpnn_model_free(gvpnn_model* model);

/* Copies checkpoint tensors matching the prefixes (comma separated; entries
 * ending in '*' match by prefix) into the model bit-exactly, leaving every
 * other tensor at its fresh initialization. NULL selects the default set
 * "embed,layer.0.*,layer.1.*". report_out (optional) receives the
 * transferred tensor names, one per line. */
GVPNN_API gvpnn_status gvpnn_model_transfer_load(gvpnn_model* model, const char* ckpt_path,
                                                 const char* prefixes_csv, char** report_out);

GVPNN_API gvpnn_status gvpnn_predict(const gvpnn_model* model, const gvpnn_graph* graph,
                                     double* out, size_t out_len);
GVPNN_API gvpnn_status gvpnn_predict_pair(const gvpnn_model* model, const gvpnn_graph* g1,
                                          const gvpnn_graph* g2, double* out, size_t out_len);

/* -------------------------------------------------------------------------
 * Training and evaluation
 *
 * Manifest: one sample per line, "<graph-file> <targets...>" (paired models:
 * two graph files before the targets); paths resolve against the manifest
 * directory. train_config_text keys: lr, batch_size, max_epochs, seed, loss
 * (mse|cross_entropy), metric (mae|rmse|auroc|spearman|none), threads.
 * history_csv_path (optional) receives "epoch,train_loss,val_loss,metric".
 */
GVPNN_API gvpnn_status gvpnn_train(gvpnn_model* model, const char* manifest_path,
                                   const char* val_manifest_path,
                                   const char* train_config_text,
                                   const char* history_csv_path);

/* Evaluates the model over a manifest and reports "name value" lines for
 * each requested metric (comma separated). */
GVPNN_API gvpnn_status gvpnn_eval_manifest(const gvpnn_model* model, const char* manifest_path,
                                           const char* metrics_csv, char** out_text);

/* kind: mae | rmse | auroc | spearman */
GVPNN_API gvpnn_status gvpnn_metric(const char* kind, const double* preds, const double* targets,
                                    size_t n, double* out);

GVPNN_API gvpnn_status gvpnn_smooth_series(const double* series, size_t n, double sigma,
                                           double* out);

/* -------------------------------------------------------------------------
 * Equivariance audit and demonstrations
 *
 * These return GVPNN_ERR_PROPERTY_VIOLATION when an asserted property fails;
 * reports are written either way.
 */

typedef struct gvpnn_equivariance_options {
  int trials;         /* <= 0 selects 100 */
  double tol;         /* <= 0 selects 1e-10 */
  uint64_t seed;
  int threads;        /* <= 0 selects 1 */
  double inject_bias; /* nonzero: deliberate symmetry-breaking negative control */
} gvpnn_equivariance_options;

GVPNN_API gvpnn_status gvpnn_check_equivariance(const gvpnn_model* model,
                                                const gvpnn_graph* graph,
                                                const gvpnn_equivariance_options* opts,
                                                double* max_dev_out, char** report_out);

GVPNN_API gvpnn_status gvpnn_demo_gate(uint64_t seed, const char* report_path,
                                       const char* history_csv_path, char** report_out);
GVPNN_API gvpnn_status gvpnn_demo_approx(int nu, int width, uint64_t seed,
                                         const char* report_path,
                                         const char* history_csv_path, char** report_out);

#ifdef __cplusplus
}
#endif

#endif /* GVPNN_H */
