#pragma once

#include <cstdint>
#include <vector>

#include "cpa/alignment.hpp"
#include "cpa/step_mining.hpp"

namespace cpa::synth {

// Recipe for one procedure class: an ordered list of step prototypes plus
// duration and noise parameters for sampling sequences that execute it.
struct ProcedureSpec {
  Grid prototypes;  // steps x dim
  int64_t total_frames = 0;
  int64_t min_duration = 1;
  int64_t max_duration = 1;
  double noise_sigma = 0.0;

  int64_t step_count() const { return prototypes.rows; }
  int64_t dim() const { return prototypes.cols; }

  void validate() const;
};

// Prototypes are random directions of equal length `prototype_scale`, so
// every step carries the same energy and noise_sigma reads as noise per unit
// of signal scale.
ProcedureSpec random_procedure_spec(int64_t steps, int64_t dim, int64_t total_frames,
                                    int64_t min_duration, int64_t max_duration,
                                    double noise_sigma, uint64_t seed,
                                    double prototype_scale = 1.5);

struct GeneratedSequence {
  FeatureSequence seq;
  std::vector<int64_t> boundaries;  // per-step end frames; last equals frames
  std::vector<int32_t> step_order;  // prototype index executed at each step
  int32_t spec_index = -1;
  bool permuted = false;
};

// Samples step durations (sequentially uniform within the feasible range so
// they always sum to total_frames) and emits prototype + Gaussian noise per
// frame. Deterministic per (spec, seed).
GeneratedSequence generate_procedure(const ProcedureSpec& spec, uint64_t seed);

enum class NegativeMode {
  kStepPermutation,      // same prototypes, two non-adjacent steps swapped
  kDifferentProcedure,   // drawn from another spec entirely
};

struct PairEntry {
  int32_t a = 0;
  int32_t b = 0;
  int32_t label = 0;  // 1 = positive (same steps in the same order)
};

struct PairDataset {
  std::vector<GeneratedSequence> sequences;
  std::vector<PairEntry> pairs;
};

// Positives share a spec with fresh duration/noise draws; negatives violate
// order (step permutation) or content (different procedure).
PairDataset generate_pairs(const std::vector<ProcedureSpec>& specs, int64_t n_pos, int64_t n_neg,
                           NegativeMode mode, uint64_t seed);

// Whole-benchmark recipe: `procedures` random specs plus a pair set.
struct GenConfig {
  int64_t procedures = 8;
  int64_t steps = 4;
  int64_t dim = 16;
  int64_t frames = 16;
  int64_t min_duration = 3;
  int64_t max_duration = 6;
  double noise_sigma = 0.1;
  int64_t n_positive = 100;
  int64_t n_negative = 100;
  NegativeMode mode = NegativeMode::kStepPermutation;
  uint64_t seed = 0;
  double prototype_scale = 1.5;
};

PairDataset generate_dataset(const GenConfig& config);

enum class VerifyMethod {
  kCpa,            // mined steps + symmetric alignment distance
  kMeanFeatureL2,  // normalized L2 between time-averaged features
};

struct VerificationReport {
  std::vector<double> distances;  // one per pair, manifest order
  std::vector<int32_t> labels;
  double auc = 0.0;
};

VerificationReport evaluate_verification(const PairDataset& data, VerifyMethod method, int64_t k,
                                         SamplePolicy policy = SamplePolicy::kMidpoint,
                                         uint64_t seed = 0,
                                         BoundaryMode boundary = BoundaryMode::kSemantic);

double pair_distance(const FeatureSequence& a, const FeatureSequence& b, VerifyMethod method,
                     int64_t k, SamplePolicy policy, uint64_t seed, BoundaryMode boundary);

double mean_feature_distance(const FeatureSequence& a, const FeatureSequence& b);

}  // namespace cpa::synth
