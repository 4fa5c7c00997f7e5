#include "cpa/cpa.h"

#include <cstring>
#include <string>
#include <vector>

#include "cpa/alignment.hpp"
#include "cpa/error.hpp"
#include "cpa/io.hpp"
#include "cpa/metrics.hpp"
#include "cpa/step_mining.hpp"
#include "cpa/synth.hpp"
#include "cpa/training.hpp"

struct cpa_sequence {
  cpa::FeatureSequence value;
};
struct cpa_matrix {
  cpa::Grid value;
};
struct cpa_partition {
  cpa::BlockPartition value;
};
struct cpa_steps {
  cpa::StepFeatures value;
};
struct cpa_dataset {
  cpa::synth::PairDataset data;
  std::vector<cpa_sequence> wrappers;  // parallel to data.sequences
};
struct cpa_encoder {
  cpa::LinearEncoder value;
};

namespace {

thread_local std::string t_last_error;

cpa_status to_status(cpa::ErrorCode code) {
  switch (code) {
    case cpa::ErrorCode::kInvalidArgument:
      return CPA_ERROR_INVALID_ARGUMENT;
    case cpa::ErrorCode::kDimensionMismatch:
      return CPA_ERROR_DIMENSION_MISMATCH;
    case cpa::ErrorCode::kLimitExceeded:
      return CPA_ERROR_LIMIT_EXCEEDED;
    case cpa::ErrorCode::kIo:
      return CPA_ERROR_IO;
    case cpa::ErrorCode::kNumeric:
      return CPA_ERROR_NUMERIC;
  }
  return CPA_ERROR_INTERNAL;
}

template <typename Fn>
cpa_status guarded(Fn&& fn) {
  try {
    fn();
    return CPA_OK;
  } catch (const cpa::Error& e) {
    t_last_error = e.what();
    return to_status(e.code());
  } catch (const std::exception& e) {
    t_last_error = e.what();
    return CPA_ERROR_INTERNAL;
  } catch (...) {
    t_last_error = "unknown error";
    return CPA_ERROR_INTERNAL;
  }
}

cpa_status invalid(const char* message) {
  t_last_error = message;
  return CPA_ERROR_INVALID_ARGUMENT;
}

cpa::SamplePolicy to_policy(cpa_sample_policy policy) {
  switch (policy) {
    case CPA_POLICY_MIDPOINT:
      return cpa::SamplePolicy::kMidpoint;
    case CPA_POLICY_SEEDED_RANDOM:
      return cpa::SamplePolicy::kSeededRandom;
    case CPA_POLICY_MEAN:
      return cpa::SamplePolicy::kMean;
  }
  cpa::fail(cpa::ErrorCode::kInvalidArgument, "unknown sample policy");
}

cpa::BoundaryMode to_boundary(cpa_boundary_mode mode) {
  switch (mode) {
    case CPA_BOUNDARY_SEMANTIC:
      return cpa::BoundaryMode::kSemantic;
    case CPA_BOUNDARY_LITERAL:
      return cpa::BoundaryMode::kLiteral;
  }
  cpa::fail(cpa::ErrorCode::kInvalidArgument, "unknown boundary mode");
}

}  // namespace

extern "C" {

const char* cpa_version(void) { return "1.0.0"; }

const char* cpa_status_name(cpa_status status) {
  switch (status) {
    case CPA_OK:
      return "ok";
    case CPA_ERROR_INVALID_ARGUMENT:
      return "invalid argument";
    case CPA_ERROR_DIMENSION_MISMATCH:
      return "dimension mismatch";
    case CPA_ERROR_LIMIT_EXCEEDED:
      return "limit exceeded";
    case CPA_ERROR_IO:
      return "io error";
    case CPA_ERROR_NUMERIC:
      return "numeric error";
    case CPA_ERROR_INTERNAL:
      return "internal error";
  }
  return "unknown";
}

const char* cpa_last_error(void) { return t_last_error.c_str(); }

/* ---------------- sequences ---------------- */

cpa_status cpa_sequence_create(const double* data, int64_t frames, int64_t dim,
                               cpa_sequence** out) {
  if (data == nullptr || out == nullptr) return invalid("null pointer");
  return guarded([&] {
    std::vector<double> copy(data, data + frames * dim);
    *out = new cpa_sequence{cpa::FeatureSequence(std::move(copy), frames, dim)};
  });
}

cpa_status cpa_sequence_load_csv(const char* path, cpa_sequence** out) {
  if (path == nullptr || out == nullptr) return invalid("null pointer");
  return guarded([&] { *out = new cpa_sequence{cpa::io::load_fseq_csv(path)}; });
}

cpa_status cpa_sequence_save_csv(const cpa_sequence* seq, const char* path) {
  if (seq == nullptr || path == nullptr) return invalid("null pointer");
  return guarded([&] { cpa::io::save_fseq_csv(seq->value, path); });
}

int64_t cpa_sequence_frames(const cpa_sequence* seq) {
  return seq != nullptr ? seq->value.frames() : 0;
}

int64_t cpa_sequence_dim(const cpa_sequence* seq) {
  return seq != nullptr ? seq->value.dim() : 0;
}

cpa_status cpa_sequence_copy_data(const cpa_sequence* seq, double* buffer) {
  if (seq == nullptr || buffer == nullptr) return invalid("null pointer");
  std::memcpy(buffer, seq->value.data().data(), seq->value.data().size() * sizeof(double));
  return CPA_OK;
}

void cpa_sequence_destroy(cpa_sequence* seq) { delete seq; }

/* ---------------- matrices ---------------- */

int64_t cpa_matrix_rows(const cpa_matrix* m) { return m != nullptr ? m->value.rows : 0; }
int64_t cpa_matrix_cols(const cpa_matrix* m) { return m != nullptr ? m->value.cols : 0; }

cpa_status cpa_matrix_copy_data(const cpa_matrix* m, double* buffer) {
  if (m == nullptr || buffer == nullptr) return invalid("null pointer");
  std::memcpy(buffer, m->value.data.data(), m->value.data.size() * sizeof(double));
  return CPA_OK;
}

cpa_status cpa_matrix_save_csv(const cpa_matrix* m, const char* path) {
  if (m == nullptr || path == nullptr) return invalid("null pointer");
  return guarded([&] { cpa::io::save_grid_csv(m->value, path); });
}

cpa_status cpa_matrix_save_pgm(const cpa_matrix* m, const char* path) {
  if (m == nullptr || path == nullptr) return invalid("null pointer");
  return guarded([&] { cpa::io::save_grid_pgm(m->value, path); });
}

void cpa_matrix_destroy(cpa_matrix* m) { delete m; }

cpa_status cpa_relational_matrix(const cpa_sequence* a, const cpa_sequence* b, int normalize,
                                 cpa_matrix** out) {
  if (a == nullptr || b == nullptr || out == nullptr) return invalid("null pointer");
  return guarded([&] {
    cpa::RelationalMatrix m =
        cpa::compute_relational_matrix(a->value, b->value, normalize != 0);
    *out = new cpa_matrix{m.values()};
  });
}

/* ---------------- step mining ---------------- */

cpa_status cpa_mine_steps(const cpa_sequence* a, const cpa_sequence* b, int64_t k,
                          cpa_sample_policy policy, uint64_t seed, cpa_partition** partition,
                          cpa_steps** steps_a, cpa_steps** steps_b) {
  if (a == nullptr || b == nullptr) return invalid("null pointer");
  return guarded([&] {
    cpa::MiningResult mined =
        cpa::collaborative_step_mining(a->value, b->value, k, to_policy(policy), seed);
    if (partition != nullptr) *partition = new cpa_partition{std::move(mined.partition)};
    if (steps_a != nullptr) *steps_a = new cpa_steps{std::move(mined.steps1)};
    if (steps_b != nullptr) *steps_b = new cpa_steps{std::move(mined.steps2)};
  });
}

int64_t cpa_partition_step_count(const cpa_partition* p) {
  return p != nullptr ? p->value.step_count() : 0;
}

double cpa_partition_score(const cpa_partition* p) { return p != nullptr ? p->value.score : 0.0; }

cpa_status cpa_partition_block(const cpa_partition* p, int64_t i, int64_t* a, int64_t* b,
                               int64_t* x, int64_t* y) {
  if (p == nullptr) return invalid("null pointer");
  if (i < 0 || i >= p->value.step_count()) return invalid("block index out of range");
  const cpa::Block& blk = p->value.blocks[static_cast<size_t>(i)];
  if (a != nullptr) *a = blk.a;
  if (b != nullptr) *b = blk.b;
  if (x != nullptr) *x = blk.x;
  if (y != nullptr) *y = blk.y;
  return CPA_OK;
}

void cpa_partition_destroy(cpa_partition* p) { delete p; }

int64_t cpa_steps_count(const cpa_steps* s) { return s != nullptr ? s->value.count() : 0; }
int64_t cpa_steps_dim(const cpa_steps* s) { return s != nullptr ? s->value.dim() : 0; }

cpa_status cpa_steps_copy_data(const cpa_steps* s, double* buffer) {
  if (s == nullptr || buffer == nullptr) return invalid("null pointer");
  std::memcpy(buffer, s->value.steps.data.data(), s->value.steps.data.size() * sizeof(double));
  return CPA_OK;
}

int64_t cpa_steps_source_frame(const cpa_steps* s, int64_t i) {
  if (s == nullptr || i < 0 || i >= s->value.count()) return -1;
  return s->value.source_frames[static_cast<size_t>(i)];
}

void cpa_steps_destroy(cpa_steps* s) { delete s; }

/* ---------------- alignment ---------------- */

cpa_status cpa_alignment_distance(const cpa_sequence* a, const cpa_sequence* b,
                                  const cpa_steps* steps_a, const cpa_steps* steps_b,
                                  cpa_boundary_mode mode, cpa_align_result* out) {
  if (a == nullptr || b == nullptr || steps_a == nullptr || steps_b == nullptr || out == nullptr) {
    return invalid("null pointer");
  }
  return guarded([&] {
    const cpa::AlignmentDistance d = cpa::alignment_distance(
        a->value, b->value, steps_a->value, steps_b->value, to_boundary(mode));
    out->d_align = d.value;
    out->log_prob_1to2 = d.log_prob_1to2;
    out->log_prob_2to1 = d.log_prob_2to1;
  });
}

cpa_status cpa_alignment_posteriors(const cpa_sequence* frames, const cpa_steps* steps,
                                    cpa_matrix** out) {
  if (frames == nullptr || steps == nullptr || out == nullptr) return invalid("null pointer");
  return guarded([&] {
    const cpa::AssignmentMatrix w =
        cpa::frame_to_step_probabilities(frames->value, steps->value);
    *out = new cpa_matrix{cpa::alignment_posteriors(w)};
  });
}

/* ---------------- verification ---------------- */

cpa_status cpa_pair_distance(const cpa_sequence* a, const cpa_sequence* b,
                             const cpa_verify_options* options, double* out) {
  if (a == nullptr || b == nullptr || options == nullptr || out == nullptr) {
    return invalid("null pointer");
  }
  return guarded([&] {
    const cpa::synth::VerifyMethod method = options->method == CPA_METHOD_MEAN_L2
                                                ? cpa::synth::VerifyMethod::kMeanFeatureL2
                                                : cpa::synth::VerifyMethod::kCpa;
    *out = cpa::synth::pair_distance(a->value, b->value, method, options->k,
                                     to_policy(options->policy), options->seed,
                                     to_boundary(options->boundary));
  });
}

cpa_status cpa_auc(const double* distances, const int32_t* labels, int64_t n, double* out) {
  if (distances == nullptr || labels == nullptr || out == nullptr) return invalid("null pointer");
  return guarded([&] {
    *out = cpa::pairwise_auc({distances, static_cast<size_t>(n)},
                             {labels, static_cast<size_t>(n)});
  });
}

cpa_status cpa_boundary_iou(const int64_t* predicted_ends, int64_t predicted_count,
                            const int64_t* gt_ends, int64_t gt_count, int64_t frames,
                            double* out) {
  if (predicted_ends == nullptr || gt_ends == nullptr || out == nullptr) {
    return invalid("null pointer");
  }
  return guarded([&] {
    *out = cpa::boundary_iou({predicted_ends, static_cast<size_t>(predicted_count)},
                             {gt_ends, static_cast<size_t>(gt_count)}, frames);
  });
}

cpa_status cpa_silhouette(const double* points, int64_t n, int64_t dim, const int32_t* labels,
                          double* out) {
  if (points == nullptr || labels == nullptr || out == nullptr) return invalid("null pointer");
  return guarded([&] {
    cpa::Grid g(n, dim, std::vector<double>(points, points + n * dim));
    *out = cpa::silhouette_score(g, {labels, static_cast<size_t>(n)});
  });
}

/* ---------------- synthetic data ---------------- */

cpa_status cpa_dataset_generate(const cpa_gen_config* config, cpa_dataset** out) {
  if (config == nullptr || out == nullptr) return invalid("null pointer");
  return guarded([&] {
    cpa::synth::GenConfig cfg;
    cfg.procedures = config->procedures;
    cfg.steps = config->steps;
    cfg.dim = config->dim;
    cfg.frames = config->frames;
    cfg.min_duration = config->min_duration;
    cfg.max_duration = config->max_duration;
    cfg.noise_sigma = config->noise_sigma;
    cfg.n_positive = config->n_positive;
    cfg.n_negative = config->n_negative;
    cfg.mode = config->negative_mode == CPA_NEGATIVE_DIFFERENT_PROCEDURE
                   ? cpa::synth::NegativeMode::kDifferentProcedure
                   : cpa::synth::NegativeMode::kStepPermutation;
    cfg.seed = config->seed;

    auto* d = new cpa_dataset{cpa::synth::generate_dataset(cfg), {}};
    d->wrappers.reserve(d->data.sequences.size());
    for (const cpa::synth::GeneratedSequence& g : d->data.sequences) {
      d->wrappers.push_back(cpa_sequence{g.seq});
    }
    *out = d;
  });
}

int64_t cpa_dataset_sequence_count(const cpa_dataset* d) {
  return d != nullptr ? static_cast<int64_t>(d->data.sequences.size()) : 0;
}

int64_t cpa_dataset_pair_count(const cpa_dataset* d) {
  return d != nullptr ? static_cast<int64_t>(d->data.pairs.size()) : 0;
}

const cpa_sequence* cpa_dataset_sequence(const cpa_dataset* d, int64_t i) {
  if (d == nullptr || i < 0 || i >= static_cast<int64_t>(d->wrappers.size())) return nullptr;
  return &d->wrappers[static_cast<size_t>(i)];
}

int64_t cpa_dataset_step_count(const cpa_dataset* d, int64_t i) {
  if (d == nullptr || i < 0 || i >= static_cast<int64_t>(d->data.sequences.size())) return 0;
  return static_cast<int64_t>(d->data.sequences[static_cast<size_t>(i)].boundaries.size());
}

cpa_status cpa_dataset_boundaries(const cpa_dataset* d, int64_t i, int64_t* buffer) {
  if (d == nullptr || buffer == nullptr) return invalid("null pointer");
  if (i < 0 || i >= static_cast<int64_t>(d->data.sequences.size())) {
    return invalid("sequence index out of range");
  }
  const auto& ends = d->data.sequences[static_cast<size_t>(i)].boundaries;
  std::memcpy(buffer, ends.data(), ends.size() * sizeof(int64_t));
  return CPA_OK;
}

int32_t cpa_dataset_class_id(const cpa_dataset* d, int64_t i) {
  if (d == nullptr || i < 0 || i >= static_cast<int64_t>(d->data.sequences.size())) return -1;
  const auto& seq = d->data.sequences[static_cast<size_t>(i)];
  return seq.permuted ? -1 : seq.spec_index;
}

cpa_status cpa_dataset_pair(const cpa_dataset* d, int64_t i, int64_t* a, int64_t* b,
                            int32_t* label) {
  if (d == nullptr) return invalid("null pointer");
  if (i < 0 || i >= static_cast<int64_t>(d->data.pairs.size())) {
    return invalid("pair index out of range");
  }
  const cpa::synth::PairEntry& entry = d->data.pairs[static_cast<size_t>(i)];
  if (a != nullptr) *a = entry.a;
  if (b != nullptr) *b = entry.b;
  if (label != nullptr) *label = entry.label;
  return CPA_OK;
}

void cpa_dataset_destroy(cpa_dataset* d) { delete d; }

/* ---------------- training ---------------- */

cpa_status cpa_train_linear_encoder(const cpa_sequence* const* sequences, int64_t n_sequences,
                                    const int64_t* pair_a, const int64_t* pair_b,
                                    const int32_t* pair_labels, int64_t n_pairs,
                                    const int32_t* class_ids, const cpa_train_config* config,
                                    cpa_encoder** out, double* total_curve, double* step_curve,
                                    double* align_curve, double* task_curve) {
  if (sequences == nullptr || pair_a == nullptr || pair_b == nullptr || pair_labels == nullptr ||
      config == nullptr || out == nullptr) {
    return invalid("null pointer");
  }
  return guarded([&] {
    cpa::TrainingSet data;
    data.sequences.reserve(static_cast<size_t>(n_sequences));
    for (int64_t i = 0; i < n_sequences; ++i) {
      cpa::require(sequences[i] != nullptr, cpa::ErrorCode::kInvalidArgument,
                   "null sequence in training set");
      data.sequences.push_back(&sequences[i]->value);
    }
    for (int64_t i = 0; i < n_pairs; ++i) {
      if (pair_labels[i] == 1) {
        data.positive_pairs.emplace_back(static_cast<int32_t>(pair_a[i]),
                                         static_cast<int32_t>(pair_b[i]));
      }
    }
    if (class_ids != nullptr) {
      data.class_ids.assign(class_ids, class_ids + n_sequences);
    } else {
      cpa::require(config->task == CPA_TASK_NONE, cpa::ErrorCode::kInvalidArgument,
                   "centroid task needs class ids");
    }

    cpa::TrainConfig cfg;
    cfg.k = config->k;
    cfg.epochs = config->epochs;
    cfg.out_dim = config->out_dim;
    cfg.learning_rate = config->learning_rate;
    cfg.seed = config->seed;
    cfg.policy = to_policy(config->policy);
    cfg.step_weight = config->step_weight;
    cfg.align_weight = config->align_weight;
    cfg.task_weight = config->task_weight;
    cfg.task = config->task == CPA_TASK_CENTROID_CE ? cpa::TaskMode::kCentroidCrossEntropy
                                                    : cpa::TaskMode::kNone;

    cpa::TrainResult result = cpa::train_linear_encoder(data, cfg);
    for (size_t e = 0; e < result.curve.size(); ++e) {
      if (total_curve != nullptr) total_curve[e] = result.curve[e].total;
      if (step_curve != nullptr) step_curve[e] = result.curve[e].l_step;
      if (align_curve != nullptr) align_curve[e] = result.curve[e].l_align;
      if (task_curve != nullptr) task_curve[e] = result.curve[e].l_task;
    }
    *out = new cpa_encoder{std::move(result.encoder)};
  });
}

cpa_status cpa_encoder_init(int64_t in_dim, int64_t out_dim, uint64_t seed, cpa_encoder** out) {
  if (out == nullptr) return invalid("null pointer");
  return guarded([&] { *out = new cpa_encoder{cpa::init_linear_encoder(in_dim, out_dim, seed)}; });
}

int64_t cpa_encoder_in_dim(const cpa_encoder* e) { return e != nullptr ? e->value.in_dim() : 0; }
int64_t cpa_encoder_out_dim(const cpa_encoder* e) { return e != nullptr ? e->value.out_dim() : 0; }

cpa_status cpa_encoder_copy_weights(const cpa_encoder* e, double* buffer) {
  if (e == nullptr || buffer == nullptr) return invalid("null pointer");
  std::memcpy(buffer, e->value.weight.data.data(), e->value.weight.data.size() * sizeof(double));
  return CPA_OK;
}

cpa_status cpa_encoder_apply(const cpa_encoder* e, const cpa_sequence* seq, cpa_sequence** out) {
  if (e == nullptr || seq == nullptr || out == nullptr) return invalid("null pointer");
  return guarded([&] { *out = new cpa_sequence{e->value.apply(seq->value)}; });
}

void cpa_encoder_destroy(cpa_encoder* e) { delete e; }

} /* extern "C" */
