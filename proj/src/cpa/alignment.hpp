#pragma once

#include <cstdint>
#include <optional>

#include "cpa/feature_sequence.hpp"
#include "cpa/grid.hpp"
#include "cpa/step_mining.hpp"

namespace cpa {

// Per-frame distribution over steps. Row t of `probs` is the probability of
// assigning frame t to each of the K steps.
class AssignmentMatrix {
 public:
  // Scaled-dot-product logits between frames and step features, row-softmaxed.
  static AssignmentMatrix from_features(const FeatureSequence& f, const StepFeatures& s);

  // Direct probability rows; entries must be non-negative and each row must
  // sum to 1 within 1e-9. Zeros are allowed and map to -inf logits.
  static AssignmentMatrix from_probabilities(Grid probs);

  int64_t frames() const { return probs_.rows; }
  int64_t steps() const { return probs_.cols; }
  const Grid& probs() const { return probs_; }
  const Grid& logits() const { return logits_; }

 private:
  AssignmentMatrix() = default;

  Grid logits_;
  Grid probs_;
};

enum class BoundaryMode {
  // First-step column accumulates its own emission probabilities, so the
  // final cell equals the sum over all monotone surjective paths.
  kSemantic,
  // Compatibility mode: the first-step column is held at probability 1.
  kLiteral,
};

// Log-domain forward pass over frame-to-step paths. `table` is padded with a
// zeroth row/column (log 0 everywhere except table(0,0) = log 1) so the
// recursion reads uniformly.
struct AlignmentResult {
  double log_prob = 0.0;
  Grid table;  // (T+1) x (K+1), natural-log domain
  BoundaryMode mode = BoundaryMode::kSemantic;
  std::optional<Grid> posteriors;  // T x K, filled on request
};

// Total probability, in log space, of aligning the T frames to the K steps
// along any monotone non-decreasing path that starts at step 1, ends at step
// K, and visits every step. A fully blocked path space yields -inf.
AlignmentResult alignment_log_probability(const AssignmentMatrix& w,
                                          BoundaryMode mode = BoundaryMode::kSemantic);

// Per-frame posterior over steps given the path constraints (forward-backward
// marginals). Rows sum to 1.
Grid alignment_posteriors(const AssignmentMatrix& w);

// Gradient of -log P with respect to the logits: probs - posteriors, row by
// row. Rows sum to 0.
Grid alignment_gradient(const AssignmentMatrix& w);

// Symmetric procedure-correlation distance: the average negative
// log-likelihood of the two cross directions.
struct AlignmentDistance {
  double value = 0.0;            // -(log_prob_1to2 + log_prob_2to1) / 2
  double log_prob_1to2 = 0.0;    // frames of sequence-1 aligned to steps of sequence-2
  double log_prob_2to1 = 0.0;    // frames of sequence-2 aligned to steps of sequence-1
};

AlignmentDistance alignment_distance(const FeatureSequence& f1, const FeatureSequence& f2,
                                     const StepFeatures& s1, const StepFeatures& s2,
                                     BoundaryMode mode = BoundaryMode::kSemantic);

AssignmentMatrix frame_to_step_probabilities(const FeatureSequence& f, const StepFeatures& s);

// log(exp(a) + exp(b)) with exact handling of -inf operands.
double log_add(double a, double b);

}  // namespace cpa
