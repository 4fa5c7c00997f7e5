#pragma once

#include <cstdint>
#include <span>

#include "cpa/alignment.hpp"
#include "cpa/step_mining.hpp"

namespace cpa {

// One training objective evaluation. Terms are stored with their weights
// already applied so that total is exactly their sum.
struct LossReport {
  double l_step = 0.0;
  double l_align = 0.0;
  double l_task = 0.0;
  double total = 0.0;

  static LossReport make(double step, double align, double task) {
    return LossReport{step, align, task, task + step + align};
  }
};

// Negative optimal cumulative consistency of the pair's K-block partition.
double step_loss(const FeatureSequence& f1, const FeatureSequence& f2, int64_t k);

// The symmetric alignment distance of the pair given both step features.
double align_loss(const FeatureSequence& f1, const FeatureSequence& f2, const StepFeatures& s1,
                  const StepFeatures& s2, BoundaryMode mode = BoundaryMode::kSemantic);

double task_loss_mse(double pred, double target);

// Cross-entropy of softmax(logits) against the true class index.
double task_loss_ce(std::span<const double> logits, int64_t class_index);

}  // namespace cpa
