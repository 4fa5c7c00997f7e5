#include "cpa/alignment.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace cpa {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_dense_to_sparse(int64_t frames, int64_t steps) {
  require(steps >= 1, ErrorCode::kInvalidArgument, "need at least one step");
  require(frames >= steps, ErrorCode::kInvalidArgument,
          "dense-to-sparse alignment needs at least as many frames (" + std::to_string(frames) +
              ") as steps (" + std::to_string(steps) + ")");
}
}  // namespace

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

AssignmentMatrix AssignmentMatrix::from_features(const FeatureSequence& f, const StepFeatures& s) {
  require(f.dim() == s.dim(), ErrorCode::kDimensionMismatch,
          "frame and step feature dimensions differ");
  check_dense_to_sparse(f.frames(), s.count());
  const double scale = 1.0 / std::sqrt(static_cast<double>(f.dim()));
  Grid logits(f.frames(), s.count());
  for (int64_t t = 0; t < f.frames(); ++t) {
    for (int64_t k = 0; k < s.count(); ++k) {
      logits.at(t, k) = dot(f.frame(t), s.step(k)) * scale;
    }
  }
  AssignmentMatrix w;
  w.probs_ = logits;
  softmax_rows(w.probs_);
  w.logits_ = std::move(logits);
  return w;
}

AssignmentMatrix AssignmentMatrix::from_probabilities(Grid probs) {
  check_dense_to_sparse(probs.rows, probs.cols);
  Grid logits(probs.rows, probs.cols);
  for (int64_t t = 0; t < probs.rows; ++t) {
    double sum = 0.0;
    for (int64_t k = 0; k < probs.cols; ++k) {
      const double p = probs.at(t, k);
      require(std::isfinite(p) && p >= 0.0, ErrorCode::kInvalidArgument,
              "probabilities must be finite and non-negative");
      sum += p;
      logits.at(t, k) = p > 0.0 ? std::log(p) : kNegInf;
    }
    require(std::abs(sum - 1.0) <= 1e-9, ErrorCode::kInvalidArgument,
            "probability row " + std::to_string(t) + " sums to " + std::to_string(sum));
  }
  AssignmentMatrix w;
  w.logits_ = std::move(logits);
  w.probs_ = std::move(probs);
  return w;
}

AlignmentResult alignment_log_probability(const AssignmentMatrix& w, BoundaryMode mode) {
  const int64_t frames = w.frames();
  const int64_t steps = w.steps();

  AlignmentResult result;
  result.mode = mode;
  result.table = Grid(frames + 1, steps + 1, kNegInf);
  Grid& d = result.table;
  d.at(0, 0) = 0.0;

  auto log_w = [&w](int64_t t, int64_t k) {
    const double p = w.probs().at(t - 1, k - 1);  // table indices are 1-based
    return p > 0.0 ? std::log(p) : kNegInf;
  };

  for (int64_t t = 1; t <= frames; ++t) {
    const int64_t k_hi = std::min<int64_t>(t, steps);
    for (int64_t k = 1; k <= k_hi; ++k) {
      if (mode == BoundaryMode::kLiteral && k == 1) {
        d.at(t, 1) = 0.0;
        continue;
      }
      d.at(t, k) = log_w(t, k) + log_add(d.at(t - 1, k), d.at(t - 1, k - 1));
    }
  }

  result.log_prob = d.at(frames, steps);
  return result;
}

namespace {

// Backward companion to the forward table: log-sum over path suffixes from
// (t, k) to (T, K). Shaped T x K, 0-based.
Grid backward_table(const AssignmentMatrix& w) {
  const int64_t frames = w.frames();
  const int64_t steps = w.steps();
  Grid beta(frames, steps, kNegInf);
  beta.at(frames - 1, steps - 1) = 0.0;
  for (int64_t t = frames - 2; t >= 0; --t) {
    for (int64_t k = steps - 1; k >= 0; --k) {
      const double p_stay = w.probs().at(t + 1, k);
      double acc = p_stay > 0.0 ? std::log(p_stay) + beta.at(t + 1, k) : kNegInf;
      if (k + 1 < steps) {
        const double p_next = w.probs().at(t + 1, k + 1);
        if (p_next > 0.0) acc = log_add(acc, std::log(p_next) + beta.at(t + 1, k + 1));
      }
      beta.at(t, k) = acc;
    }
  }
  return beta;
}

}  // namespace

Grid alignment_posteriors(const AssignmentMatrix& w) {
  const AlignmentResult forward = alignment_log_probability(w, BoundaryMode::kSemantic);
  require(std::isfinite(forward.log_prob), ErrorCode::kNumeric,
          "posteriors undefined: every alignment path has probability zero");
  const Grid beta = backward_table(w);

  Grid gamma(w.frames(), w.steps(), 0.0);
  for (int64_t t = 0; t < w.frames(); ++t) {
    for (int64_t k = 0; k < w.steps(); ++k) {
      const double log_alpha = forward.table.at(t + 1, k + 1);
      if (log_alpha == kNegInf || beta.at(t, k) == kNegInf) continue;
      gamma.at(t, k) = std::exp(log_alpha + beta.at(t, k) - forward.log_prob);
    }
  }
  return gamma;
}

Grid alignment_gradient(const AssignmentMatrix& w) {
  const Grid gamma = alignment_posteriors(w);
  Grid grad(w.frames(), w.steps());
  for (int64_t t = 0; t < w.frames(); ++t) {
    for (int64_t k = 0; k < w.steps(); ++k) {
      grad.at(t, k) = w.probs().at(t, k) - gamma.at(t, k);
    }
  }
  return grad;
}

AlignmentDistance alignment_distance(const FeatureSequence& f1, const FeatureSequence& f2,
                                     const StepFeatures& s1, const StepFeatures& s2,
                                     BoundaryMode mode) {
  const AssignmentMatrix w12 = frame_to_step_probabilities(f1, s2);
  const AssignmentMatrix w21 = frame_to_step_probabilities(f2, s1);
  AlignmentDistance out;
  out.log_prob_1to2 = alignment_log_probability(w12, mode).log_prob;
  out.log_prob_2to1 = alignment_log_probability(w21, mode).log_prob;
  out.value = -0.5 * (out.log_prob_1to2 + out.log_prob_2to1);
  return out;
}

AssignmentMatrix frame_to_step_probabilities(const FeatureSequence& f, const StepFeatures& s) {
  return AssignmentMatrix::from_features(f, s);
}

}  // namespace cpa
