#pragma once

#include <cstdint>
#include <vector>

#include "cpa/relational_matrix.hpp"

namespace cpa {

// Ordered K-block partition of a relational matrix. Blocks chain corner to
// corner, so the row intervals tile [0, T1) and the column intervals tile
// [0, T2) simultaneously.
struct BlockPartition {
  std::vector<Block> blocks;
  double score = 0.0;

  int64_t step_count() const { return static_cast<int64_t>(blocks.size()); }

  // Half-open frame intervals on one side (1 = rows, 2 = columns).
  std::vector<std::pair<int64_t, int64_t>> intervals(int side) const;

  // Strictly increasing block end coordinates on one side; the last entry is
  // the sequence length.
  std::vector<int64_t> boundaries(int side) const;

  void validate(int64_t t1, int64_t t2) const;
};

// Forward tables of the partition search. `score` holds the best cumulative
// consistency of splitting the first i frames of sequence-1 and the first j
// frames of sequence-2 into k blocks; `pred` the chosen predecessor corner.
// Layout is [k][i][j] with k in 1..k_max; unreachable states hold -inf.
class CsmTables {
 public:
  CsmTables(int64_t t1, int64_t t2, int64_t k_max);

  int64_t t1() const { return t1_; }
  int64_t t2() const { return t2_; }
  int64_t k_max() const { return k_max_; }

  double score_at(int64_t i, int64_t j, int64_t k) const { return scores_[index(i, j, k)]; }
  std::pair<int32_t, int32_t> pred_at(int64_t i, int64_t j, int64_t k) const {
    return preds_[index(i, j, k)];
  }

  void set(int64_t i, int64_t j, int64_t k, double score, std::pair<int32_t, int32_t> pred) {
    scores_[index(i, j, k)] = score;
    preds_[index(i, j, k)] = pred;
  }

 private:
  size_t index(int64_t i, int64_t j, int64_t k) const {
    return static_cast<size_t>(((k - 1) * (t1_ + 1) + i) * (t2_ + 1) + j);
  }

  int64_t t1_, t2_, k_max_;
  std::vector<double> scores_;
  std::vector<std::pair<int32_t, int32_t>> preds_;
};

// Fills the cumulative-consistency tables for all step counts up to k.
// Each block must cover at least one frame on each side; ties in the
// predecessor choice resolve to the lexicographically smallest corner.
CsmTables dynamic_procedure_matching(const RelationalMatrix& m, int64_t k);

// Recovers the optimal K-block partition by walking the predecessor table
// from (T1, T2, K) back to the origin. Rejects corrupt tables.
BlockPartition backtrace(const RelationalMatrix& m, const CsmTables& tables, int64_t k);

enum class SamplePolicy {
  kMidpoint,      // deterministic: middle frame of each step
  kSeededRandom,  // uniform frame per step under the caller's seed
  kMean,          // average of the step's frames
};

// One representative feature vector per step plus where it came from.
struct StepFeatures {
  Grid steps;                          // K x d
  std::vector<int64_t> source_frames;  // per step; -1 when the policy is kMean
  SamplePolicy policy = SamplePolicy::kMidpoint;

  int64_t count() const { return steps.rows; }
  int64_t dim() const { return steps.cols; }
  std::span<const double> step(int64_t k) const { return steps.row(k); }
};

StepFeatures sample_step_features(const FeatureSequence& f, const BlockPartition& partition,
                                  int side, SamplePolicy policy, uint64_t seed);

struct MiningResult {
  RelationalMatrix matrix;
  BlockPartition partition;
  StepFeatures steps1;
  StepFeatures steps2;
};

// The full pipeline for one pair: relational matrix, partition search,
// backtrace, and step-feature sampling on both sides.
MiningResult collaborative_step_mining(const FeatureSequence& f1, const FeatureSequence& f2,
                                       int64_t k, SamplePolicy policy = SamplePolicy::kMidpoint,
                                       uint64_t seed = 0);

}  // namespace cpa
