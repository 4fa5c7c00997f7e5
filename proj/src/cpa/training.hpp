#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "cpa/losses.hpp"

namespace cpa {

// Trainable linear head on top of fixed input features.
struct LinearEncoder {
  Grid weight;  // in_dim x out_dim

  int64_t in_dim() const { return weight.rows; }
  int64_t out_dim() const { return weight.cols; }

  FeatureSequence apply(const FeatureSequence& f) const;
};

// Seeded Gaussian init scaled by 1/sqrt(in_dim).
LinearEncoder init_linear_encoder(int64_t in_dim, int64_t out_dim, uint64_t seed);

enum class TaskMode {
  kNone,
  kCentroidCrossEntropy,  // classify videos against per-class centroids
};

struct TrainConfig {
  int64_t k = 4;
  int64_t epochs = 10;
  int64_t out_dim = 8;
  double learning_rate = 0.05;
  uint64_t seed = 0;
  SamplePolicy policy = SamplePolicy::kMidpoint;
  double step_weight = 1.0;
  double align_weight = 1.0;
  double task_weight = 1.0;
  TaskMode task = TaskMode::kNone;
};

struct TrainingSet {
  std::vector<const FeatureSequence*> sequences;
  std::vector<std::pair<int32_t, int32_t>> positive_pairs;  // indices into sequences
  std::vector<int32_t> class_ids;  // per sequence; required for centroid CE, -1 = unlabeled
};

// Hard decisions of one descent step, held fixed while differentiating:
// the mined partition and the per-step sample indices (empty for kMean).
struct PairPlan {
  BlockPartition partition;
  std::vector<int64_t> samples1;
  std::vector<int64_t> samples2;
};

PairPlan plan_pair(const LinearEncoder& encoder, const FeatureSequence& a,
                   const FeatureSequence& b, const TrainConfig& config, uint64_t sample_seed);

// Weighted step + align loss of one pair under a fixed plan. When `grad_out`
// is non-null the analytic gradient with respect to the encoder weight is
// accumulated into it.
LossReport pair_loss(const LinearEncoder& encoder, const FeatureSequence& a,
                     const FeatureSequence& b, const PairPlan& plan, const TrainConfig& config,
                     Grid* grad_out);

// Class centroids of the time-averaged encoded sequences, frozen per epoch.
struct TaskPlan {
  Grid centroids;  // num_classes x out_dim
};

TaskPlan plan_task(const LinearEncoder& encoder, const TrainingSet& data);

// Weighted mean cross-entropy of the negative-squared-distance logits against
// the frozen centroids; gradient accumulation as in pair_loss.
double task_loss(const LinearEncoder& encoder, const TrainingSet& data, const TaskPlan& plan,
                 const TrainConfig& config, Grid* grad_out);

struct TrainResult {
  LinearEncoder encoder;
  std::vector<LossReport> curve;  // one report per epoch
};

// Full-batch gradient descent on the positive pairs. Partitions and sample
// indices are re-mined each epoch and treated as constants within the epoch's
// descent step. Aborts with an error if the loss leaves the finite range.
TrainResult train_linear_encoder(const TrainingSet& data, const TrainConfig& config);

}  // namespace cpa
