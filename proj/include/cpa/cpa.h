/* Collaborative procedure alignment: C API of the shared library.
 *
 * All functions that can fail return a cpa_status; on failure the out
 * parameters are untouched and cpa_last_error() carries a one-line detail
 * message (thread-local). Objects returned through handle out-parameters are
 * owned by the caller and released with the matching _destroy function,
 * except where a function is documented to return a borrowed pointer.
 */
#ifndef CPA_H
#define CPA_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cpa_status {
  CPA_OK = 0,
  CPA_ERROR_INVALID_ARGUMENT = 1,
  CPA_ERROR_DIMENSION_MISMATCH = 2,
  CPA_ERROR_LIMIT_EXCEEDED = 3,
  CPA_ERROR_IO = 4,
  CPA_ERROR_NUMERIC = 5,
  CPA_ERROR_INTERNAL = 6
} cpa_status;

typedef enum cpa_sample_policy {
  CPA_POLICY_MIDPOINT = 0,
  CPA_POLICY_SEEDED_RANDOM = 1,
  CPA_POLICY_MEAN = 2
} cpa_sample_policy;

typedef enum cpa_boundary_mode {
  CPA_BOUNDARY_SEMANTIC = 0,
  CPA_BOUNDARY_LITERAL = 1
} cpa_boundary_mode;

typedef enum cpa_verify_method {
  CPA_METHOD_CPA = 0,
  CPA_METHOD_MEAN_L2 = 1
} cpa_verify_method;

typedef enum cpa_negative_mode {
  CPA_NEGATIVE_STEP_PERMUTATION = 0,
  CPA_NEGATIVE_DIFFERENT_PROCEDURE = 1
} cpa_negative_mode;

typedef enum cpa_task_mode {
  CPA_TASK_NONE = 0,
  CPA_TASK_CENTROID_CE = 1
} cpa_task_mode;

const char* cpa_version(void);
const char* cpa_status_name(cpa_status status);
/* Detail message of the most recent failing call on this thread. */
const char* cpa_last_error(void);

/* ---------------- feature sequences ---------------- */

typedef struct cpa_sequence cpa_sequence;

/* data is row-major, frames x dim, finite entries. */
cpa_status cpa_sequence_create(const double* data, int64_t frames, int64_t dim,
                               cpa_sequence** out);
/* Headerless CSV, one frame per row; ragged rows are rejected. */
cpa_status cpa_sequence_load_csv(const char* path, cpa_sequence** out);
cpa_status cpa_sequence_save_csv(const cpa_sequence* seq, const char* path);
int64_t cpa_sequence_frames(const cpa_sequence* seq);
int64_t cpa_sequence_dim(const cpa_sequence* seq);
/* buffer must hold frames*dim doubles. */
cpa_status cpa_sequence_copy_data(const cpa_sequence* seq, double* buffer);
void cpa_sequence_destroy(cpa_sequence* seq);

/* ---------------- matrices ---------------- */

typedef struct cpa_matrix cpa_matrix;

int64_t cpa_matrix_rows(const cpa_matrix* m);
int64_t cpa_matrix_cols(const cpa_matrix* m);
cpa_status cpa_matrix_copy_data(const cpa_matrix* m, double* buffer);
cpa_status cpa_matrix_save_csv(const cpa_matrix* m, const char* path);
/* 8-bit binary PGM scaled by the maximum entry. */
cpa_status cpa_matrix_save_pgm(const cpa_matrix* m, const char* path);
void cpa_matrix_destroy(cpa_matrix* m);

/* Row-softmaxed scaled-dot-product similarities between all frame pairs;
 * raw (normalize = 0) keeps the scaled products, which must be >= 0. */
cpa_status cpa_relational_matrix(const cpa_sequence* a, const cpa_sequence* b, int normalize,
                                 cpa_matrix** out);

/* ---------------- step mining ---------------- */

typedef struct cpa_partition cpa_partition;
typedef struct cpa_steps cpa_steps;

/* Joint K-block segmentation of the pair plus one sampled step feature set
 * per side. Any out-parameter may be NULL if unwanted. */
cpa_status cpa_mine_steps(const cpa_sequence* a, const cpa_sequence* b, int64_t k,
                          cpa_sample_policy policy, uint64_t seed, cpa_partition** partition,
                          cpa_steps** steps_a, cpa_steps** steps_b);

int64_t cpa_partition_step_count(const cpa_partition* p);
double cpa_partition_score(const cpa_partition* p);
/* Block i as half-open coordinates [a, x) x [b, y). */
cpa_status cpa_partition_block(const cpa_partition* p, int64_t i, int64_t* a, int64_t* b,
                               int64_t* x, int64_t* y);
void cpa_partition_destroy(cpa_partition* p);

int64_t cpa_steps_count(const cpa_steps* s);
int64_t cpa_steps_dim(const cpa_steps* s);
/* buffer must hold count*dim doubles. */
cpa_status cpa_steps_copy_data(const cpa_steps* s, double* buffer);
/* Source frame of step i, or -1 when the policy averaged frames. */
int64_t cpa_steps_source_frame(const cpa_steps* s, int64_t i);
void cpa_steps_destroy(cpa_steps* s);

/* ---------------- frame-to-step alignment ---------------- */

typedef struct cpa_align_result {
  double d_align;        /* -(log_prob_1to2 + log_prob_2to1) / 2 */
  double log_prob_1to2;  /* frames of a aligned to steps of b */
  double log_prob_2to1;  /* frames of b aligned to steps of a */
} cpa_align_result;

cpa_status cpa_alignment_distance(const cpa_sequence* a, const cpa_sequence* b,
                                  const cpa_steps* steps_a, const cpa_steps* steps_b,
                                  cpa_boundary_mode mode, cpa_align_result* out);

/* Per-frame posterior over the steps (rows sum to 1). */
cpa_status cpa_alignment_posteriors(const cpa_sequence* frames, const cpa_steps* steps,
                                    cpa_matrix** out);

/* ---------------- verification ---------------- */

typedef struct cpa_verify_options {
  cpa_verify_method method;
  int64_t k;
  cpa_sample_policy policy;
  cpa_boundary_mode boundary;
  uint64_t seed;
} cpa_verify_options;

cpa_status cpa_pair_distance(const cpa_sequence* a, const cpa_sequence* b,
                             const cpa_verify_options* options, double* out);

/* labels: 1 = positive, 0 = negative; both classes must be present.
 * Exhaustive pairwise counting with ties credited 0.5. */
cpa_status cpa_auc(const double* distances, const int32_t* labels, int64_t n, double* out);

/* Mean IoU between step segmentations given as per-step end frames. */
cpa_status cpa_boundary_iou(const int64_t* predicted_ends, int64_t predicted_count,
                            const int64_t* gt_ends, int64_t gt_count, int64_t frames,
                            double* out);

cpa_status cpa_silhouette(const double* points, int64_t n, int64_t dim, const int32_t* labels,
                          double* out);

/* ---------------- synthetic data ---------------- */

typedef struct cpa_dataset cpa_dataset;

typedef struct cpa_gen_config {
  int64_t procedures;
  int64_t steps;
  int64_t dim;
  int64_t frames;
  int64_t min_duration;
  int64_t max_duration;
  double noise_sigma;
  int64_t n_positive;
  int64_t n_negative;
  cpa_negative_mode negative_mode;
  uint64_t seed;
} cpa_gen_config;

cpa_status cpa_dataset_generate(const cpa_gen_config* config, cpa_dataset** out);
int64_t cpa_dataset_sequence_count(const cpa_dataset* d);
int64_t cpa_dataset_pair_count(const cpa_dataset* d);
/* Borrowed pointer, valid while the dataset lives. */
const cpa_sequence* cpa_dataset_sequence(const cpa_dataset* d, int64_t i);
/* Ground-truth step end frames of sequence i; buffer holds step_count values. */
int64_t cpa_dataset_step_count(const cpa_dataset* d, int64_t i);
cpa_status cpa_dataset_boundaries(const cpa_dataset* d, int64_t i, int64_t* buffer);
/* Procedure class of sequence i (-1 when the order was permuted). */
int32_t cpa_dataset_class_id(const cpa_dataset* d, int64_t i);
cpa_status cpa_dataset_pair(const cpa_dataset* d, int64_t i, int64_t* a, int64_t* b,
                            int32_t* label);
void cpa_dataset_destroy(cpa_dataset* d);

/* ---------------- training demo ---------------- */

typedef struct cpa_encoder cpa_encoder;

typedef struct cpa_train_config {
  int64_t k;
  int64_t epochs;
  int64_t out_dim;
  double learning_rate;
  uint64_t seed;
  cpa_sample_policy policy;
  double step_weight;
  double align_weight;
  double task_weight;
  cpa_task_mode task;
} cpa_train_config;

/* Full-batch gradient descent on the positive pairs of (sequences, pairs).
 * class_ids may be NULL unless the centroid task is enabled. The four curve
 * buffers, when non-NULL, receive `epochs` values each. */
cpa_status cpa_train_linear_encoder(const cpa_sequence* const* sequences, int64_t n_sequences,
                                    const int64_t* pair_a, const int64_t* pair_b,
                                    const int32_t* pair_labels, int64_t n_pairs,
                                    const int32_t* class_ids, const cpa_train_config* config,
                                    cpa_encoder** out, double* total_curve, double* step_curve,
                                    double* align_curve, double* task_curve);

/* Freshly initialized encoder (seeded Gaussian weights), not yet trained. */
cpa_status cpa_encoder_init(int64_t in_dim, int64_t out_dim, uint64_t seed, cpa_encoder** out);

int64_t cpa_encoder_in_dim(const cpa_encoder* e);
int64_t cpa_encoder_out_dim(const cpa_encoder* e);
/* buffer must hold in_dim*out_dim doubles (row-major). */
cpa_status cpa_encoder_copy_weights(const cpa_encoder* e, double* buffer);
cpa_status cpa_encoder_apply(const cpa_encoder* e, const cpa_sequence* seq, cpa_sequence** out);
void cpa_encoder_destroy(cpa_encoder* e);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* CPA_H */
