#include "cpa/losses.hpp"

#include <cmath>
#include <string>

namespace cpa {

double step_loss(const FeatureSequence& f1, const FeatureSequence& f2, int64_t k) {
  const RelationalMatrix m = compute_relational_matrix(f1, f2);
  const CsmTables tables = dynamic_procedure_matching(m, k);
  return -tables.score_at(m.rows(), m.cols(), k);
}

double align_loss(const FeatureSequence& f1, const FeatureSequence& f2, const StepFeatures& s1,
                  const StepFeatures& s2, BoundaryMode mode) {
  return alignment_distance(f1, f2, s1, s2, mode).value;
}

double task_loss_mse(double pred, double target) {
  require(std::isfinite(pred) && std::isfinite(target), ErrorCode::kInvalidArgument,
          "mse inputs must be finite");
  const double diff = pred - target;
  return diff * diff;
}

double task_loss_ce(std::span<const double> logits, int64_t class_index) {
  require(class_index >= 0 && class_index < static_cast<int64_t>(logits.size()),
          ErrorCode::kInvalidArgument,
          "class index " + std::to_string(class_index) + " out of range");
  double mx = logits[0];
  for (double v : logits) mx = std::max(mx, v);
  double denom = 0.0;
  for (double v : logits) denom += std::exp(v - mx);
  return std::log(denom) - (logits[class_index] - mx);
}

}  // namespace cpa
