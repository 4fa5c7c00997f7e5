#include "cpa/training.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cpa/rng.hpp"

namespace cpa {

namespace {

Grid encode_grid(const FeatureSequence& f, const Grid& weight) {
  Grid out(f.frames(), weight.cols, 0.0);
  for (int64_t t = 0; t < f.frames(); ++t) {
    auto row = f.frame(t);
    for (int64_t i = 0; i < weight.rows; ++i) {
      const double v = row[static_cast<size_t>(i)];
      if (v == 0.0) continue;
      for (int64_t j = 0; j < weight.cols; ++j) {
        out.at(t, j) += v * weight.at(i, j);
      }
    }
  }
  return out;
}

FeatureSequence to_sequence(const Grid& g) { return FeatureSequence(g.data, g.rows, g.cols); }

// logits = lhs * rhs^T * scale
Grid scaled_products(const Grid& lhs, const Grid& rhs, double scale) {
  Grid out(lhs.rows, rhs.rows, 0.0);
  for (int64_t i = 0; i < lhs.rows; ++i) {
    for (int64_t j = 0; j < rhs.rows; ++j) {
      double acc = 0.0;
      for (int64_t c = 0; c < lhs.cols; ++c) acc += lhs.at(i, c) * rhs.at(j, c);
      out.at(i, j) = acc * scale;
    }
  }
  return out;
}

// Chain a loss gradient through a row softmax: given g = dL/dprobs and the
// probs themselves, returns dL/dlogits.
Grid softmax_backward(const Grid& probs, const Grid& g) {
  Grid out(probs.rows, probs.cols, 0.0);
  for (int64_t i = 0; i < probs.rows; ++i) {
    double inner = 0.0;
    for (int64_t j = 0; j < probs.cols; ++j) inner += g.at(i, j) * probs.at(i, j);
    for (int64_t j = 0; j < probs.cols; ++j) {
      out.at(i, j) = probs.at(i, j) * (g.at(i, j) - inner);
    }
  }
  return out;
}

// grad_lhs += dZ * rhs * scale, grad_rhs += dZ^T * lhs * scale for
// Z = lhs * rhs^T * scale.
void products_backward(const Grid& lhs, const Grid& rhs, const Grid& d_z, double scale,
                       Grid& grad_lhs, Grid& grad_rhs) {
  for (int64_t i = 0; i < lhs.rows; ++i) {
    for (int64_t j = 0; j < rhs.rows; ++j) {
      const double g = d_z.at(i, j) * scale;
      if (g == 0.0) continue;
      for (int64_t c = 0; c < lhs.cols; ++c) {
        grad_lhs.at(i, c) += g * rhs.at(j, c);
        grad_rhs.at(j, c) += g * lhs.at(i, c);
      }
    }
  }
}

// grad_weight += f^T * d_encoded for encoded = f * weight.
void encode_backward(const FeatureSequence& f, const Grid& d_encoded, Grid& grad_weight) {
  for (int64_t t = 0; t < f.frames(); ++t) {
    auto row = f.frame(t);
    for (int64_t i = 0; i < grad_weight.rows; ++i) {
      const double v = row[static_cast<size_t>(i)];
      if (v == 0.0) continue;
      for (int64_t j = 0; j < grad_weight.cols; ++j) {
        grad_weight.at(i, j) += v * d_encoded.at(t, j);
      }
    }
  }
}

// Step features of an encoded grid under a frozen plan; `samples` lists one
// source frame per step, or is empty for the mean policy.
Grid gather_steps(const Grid& encoded, const std::vector<std::pair<int64_t, int64_t>>& intervals,
                  const std::vector<int64_t>& samples) {
  Grid steps(static_cast<int64_t>(intervals.size()), encoded.cols, 0.0);
  for (size_t s = 0; s < intervals.size(); ++s) {
    auto dst = steps.row(static_cast<int64_t>(s));
    if (samples.empty()) {
      const auto [start, end] = intervals[s];
      const double inv = 1.0 / static_cast<double>(end - start);
      for (int64_t t = start; t < end; ++t) {
        for (int64_t c = 0; c < encoded.cols; ++c) dst[static_cast<size_t>(c)] += encoded.at(t, c) * inv;
      }
    } else {
      const int64_t t = samples[s];
      for (int64_t c = 0; c < encoded.cols; ++c) dst[static_cast<size_t>(c)] = encoded.at(t, c);
    }
  }
  return steps;
}

void scatter_step_grad(const Grid& d_steps,
                       const std::vector<std::pair<int64_t, int64_t>>& intervals,
                       const std::vector<int64_t>& samples, Grid& d_encoded) {
  for (size_t s = 0; s < intervals.size(); ++s) {
    auto src = d_steps.row(static_cast<int64_t>(s));
    if (samples.empty()) {
      const auto [start, end] = intervals[s];
      const double inv = 1.0 / static_cast<double>(end - start);
      for (int64_t t = start; t < end; ++t) {
        for (int64_t c = 0; c < d_encoded.cols; ++c) d_encoded.at(t, c) += src[static_cast<size_t>(c)] * inv;
      }
    } else {
      const int64_t t = samples[s];
      for (int64_t c = 0; c < d_encoded.cols; ++c) d_encoded.at(t, c) += src[static_cast<size_t>(c)];
    }
  }
}

// -log P of aligning encoded frames to steps, plus the logits gradient.
double direction_loss(const Grid& frames, const Grid& steps, double scale, Grid* d_logits) {
  Grid logits = scaled_products(frames, steps, scale);
  Grid probs = logits;
  softmax_rows(probs);
  AssignmentMatrix w = AssignmentMatrix::from_probabilities(std::move(probs));
  const double log_prob = alignment_log_probability(w).log_prob;
  if (d_logits != nullptr) {
    *d_logits = alignment_gradient(w);
  }
  return -log_prob;
}

uint64_t pair_sample_seed(uint64_t seed, size_t pair_index) {
  return seed ^ (0x9e3779b97f4a7c15ULL * (pair_index + 1));
}

}  // namespace

FeatureSequence LinearEncoder::apply(const FeatureSequence& f) const {
  require(f.dim() == in_dim(), ErrorCode::kDimensionMismatch,
          "encoder expects dimension " + std::to_string(in_dim()));
  return to_sequence(encode_grid(f, weight));
}

LinearEncoder init_linear_encoder(int64_t in_dim, int64_t out_dim, uint64_t seed) {
  require(in_dim >= 1 && out_dim >= 1, ErrorCode::kInvalidArgument,
          "encoder dimensions must be positive");
  auto rng = make_rng(seed);
  LinearEncoder encoder{Grid(in_dim, out_dim)};
  const double scale = 1.0 / std::sqrt(static_cast<double>(in_dim));
  for (double& v : encoder.weight.data) v = gaussian(rng) * scale;
  return encoder;
}

PairPlan plan_pair(const LinearEncoder& encoder, const FeatureSequence& a,
                   const FeatureSequence& b, const TrainConfig& config, uint64_t sample_seed) {
  const FeatureSequence ga = encoder.apply(a);
  const FeatureSequence gb = encoder.apply(b);
  MiningResult mined =
      collaborative_step_mining(ga, gb, config.k, config.policy, sample_seed);
  PairPlan plan;
  plan.partition = std::move(mined.partition);
  if (config.policy != SamplePolicy::kMean) {
    plan.samples1 = std::move(mined.steps1.source_frames);
    plan.samples2 = std::move(mined.steps2.source_frames);
  }
  return plan;
}

LossReport pair_loss(const LinearEncoder& encoder, const FeatureSequence& a,
                     const FeatureSequence& b, const PairPlan& plan, const TrainConfig& config,
                     Grid* grad_out) {
  const Grid g1 = encode_grid(a, encoder.weight);
  const Grid g2 = encode_grid(b, encoder.weight);
  const double scale = 1.0 / std::sqrt(static_cast<double>(encoder.out_dim()));

  // Step term: block-averaged row-softmax similarities under the frozen blocks.
  Grid logits = scaled_products(g1, g2, scale);
  Grid probs = logits;
  softmax_rows(probs);
  double consistency = 0.0;
  for (const Block& blk : plan.partition.blocks) {
    double acc = 0.0;
    for (int64_t i = blk.a; i < blk.x; ++i) {
      for (int64_t j = blk.b; j < blk.y; ++j) acc += probs.at(i, j);
    }
    consistency += acc / static_cast<double>(blk.area());
  }
  const double weighted_step = config.step_weight * -consistency;

  // Align term under the frozen sample indices.
  const auto intervals1 = plan.partition.intervals(1);
  const auto intervals2 = plan.partition.intervals(2);
  const Grid s1 = gather_steps(g1, intervals1, plan.samples1);
  const Grid s2 = gather_steps(g2, intervals2, plan.samples2);

  Grid d_logits_12, d_logits_21;
  Grid* d12 = grad_out != nullptr ? &d_logits_12 : nullptr;
  Grid* d21 = grad_out != nullptr ? &d_logits_21 : nullptr;
  const double nll_12 = direction_loss(g1, s2, scale, d12);
  const double nll_21 = direction_loss(g2, s1, scale, d21);
  const double weighted_align = config.align_weight * 0.5 * (nll_12 + nll_21);

  if (grad_out != nullptr) {
    Grid d_g1(g1.rows, g1.cols, 0.0);
    Grid d_g2(g2.rows, g2.cols, 0.0);

    // Step term: d/dprobs is -w/area inside each frozen block.
    Grid d_probs(probs.rows, probs.cols, 0.0);
    for (const Block& blk : plan.partition.blocks) {
      const double g = -config.step_weight / static_cast<double>(blk.area());
      for (int64_t i = blk.a; i < blk.x; ++i) {
        for (int64_t j = blk.b; j < blk.y; ++j) d_probs.at(i, j) = g;
      }
    }
    const Grid d_z = softmax_backward(probs, d_probs);
    products_backward(g1, g2, d_z, scale, d_g1, d_g2);

    // Align term, both directions.
    const double align_coef = config.align_weight * 0.5;
    for (double& v : d_logits_12.data) v *= align_coef;
    for (double& v : d_logits_21.data) v *= align_coef;
    Grid d_s2(s2.rows, s2.cols, 0.0);
    Grid d_s1(s1.rows, s1.cols, 0.0);
    products_backward(g1, s2, d_logits_12, scale, d_g1, d_s2);
    products_backward(g2, s1, d_logits_21, scale, d_g2, d_s1);
    scatter_step_grad(d_s1, intervals1, plan.samples1, d_g1);
    scatter_step_grad(d_s2, intervals2, plan.samples2, d_g2);

    encode_backward(a, d_g1, *grad_out);
    encode_backward(b, d_g2, *grad_out);
  }

  return LossReport::make(weighted_step, weighted_align, 0.0);
}

TaskPlan plan_task(const LinearEncoder& encoder, const TrainingSet& data) {
  require(data.class_ids.size() == data.sequences.size(), ErrorCode::kInvalidArgument,
          "class ids must match the sequence list");
  int32_t num_classes = 0;
  for (int32_t c : data.class_ids) num_classes = std::max(num_classes, c + 1);
  require(num_classes >= 2, ErrorCode::kInvalidArgument,
          "centroid task needs at least two classes");

  Grid centroids(num_classes, encoder.out_dim(), 0.0);
  std::vector<int64_t> counts(static_cast<size_t>(num_classes), 0);
  for (size_t i = 0; i < data.sequences.size(); ++i) {
    const int32_t c = data.class_ids[i];
    if (c < 0) continue;
    const Grid g = encode_grid(*data.sequences[i], encoder.weight);
    for (int64_t t = 0; t < g.rows; ++t) {
      for (int64_t j = 0; j < g.cols; ++j) centroids.at(c, j) += g.at(t, j) / static_cast<double>(g.rows);
    }
    counts[static_cast<size_t>(c)] += 1;
  }
  for (int32_t c = 0; c < num_classes; ++c) {
    require(counts[static_cast<size_t>(c)] > 0, ErrorCode::kInvalidArgument,
            "class " + std::to_string(c) + " has no sequences");
    for (int64_t j = 0; j < centroids.cols; ++j) {
      centroids.at(c, j) /= static_cast<double>(counts[static_cast<size_t>(c)]);
    }
  }
  return TaskPlan{std::move(centroids)};
}

double task_loss(const LinearEncoder& encoder, const TrainingSet& data, const TaskPlan& plan,
                 const TrainConfig& config, Grid* grad_out) {
  const Grid& centroids = plan.centroids;
  const int64_t num_classes = centroids.rows;
  double total = 0.0;
  int64_t counted = 0;

  // First pass to count labeled sequences so per-sequence gradients can be
  // scaled by the final mean weight in one pass.
  for (int32_t c : data.class_ids) {
    if (c >= 0) ++counted;
  }
  require(counted > 0, ErrorCode::kInvalidArgument, "centroid task has no labeled sequences");
  const double mean_coef = config.task_weight / static_cast<double>(counted);

  for (size_t i = 0; i < data.sequences.size(); ++i) {
    const int32_t label = data.class_ids[i];
    if (label < 0) continue;
    const FeatureSequence& f = *data.sequences[i];
    const Grid g = encode_grid(f, encoder.weight);

    std::vector<double> video(static_cast<size_t>(g.cols), 0.0);
    for (int64_t t = 0; t < g.rows; ++t) {
      for (int64_t j = 0; j < g.cols; ++j) video[static_cast<size_t>(j)] += g.at(t, j) / static_cast<double>(g.rows);
    }

    std::vector<double> logits(static_cast<size_t>(num_classes), 0.0);
    for (int64_t c = 0; c < num_classes; ++c) {
      double sq = 0.0;
      for (int64_t j = 0; j < g.cols; ++j) {
        const double diff = video[static_cast<size_t>(j)] - centroids.at(c, j);
        sq += diff * diff;
      }
      logits[static_cast<size_t>(c)] = -sq;
    }
    total += task_loss_ce(logits, label);

    if (grad_out != nullptr) {
      // softmax probabilities of the logits
      double mx = logits[0];
      for (double v : logits) mx = std::max(mx, v);
      double denom = 0.0;
      std::vector<double> p(logits.size());
      for (size_t c = 0; c < logits.size(); ++c) {
        p[c] = std::exp(logits[c] - mx);
        denom += p[c];
      }
      for (double& v : p) v /= denom;

      std::vector<double> d_video(static_cast<size_t>(g.cols), 0.0);
      for (int64_t c = 0; c < num_classes; ++c) {
        const double d_logit = (p[static_cast<size_t>(c)] -
                                (c == label ? 1.0 : 0.0)) * mean_coef;
        for (int64_t j = 0; j < g.cols; ++j) {
          d_video[static_cast<size_t>(j)] +=
              d_logit * -2.0 * (video[static_cast<size_t>(j)] - centroids.at(c, j));
        }
      }
      Grid d_g(g.rows, g.cols, 0.0);
      for (int64_t t = 0; t < g.rows; ++t) {
        for (int64_t j = 0; j < g.cols; ++j) d_g.at(t, j) = d_video[static_cast<size_t>(j)] / static_cast<double>(g.rows);
      }
      encode_backward(f, d_g, *grad_out);
    }
  }
  return config.task_weight * total / static_cast<double>(counted);
}

TrainResult train_linear_encoder(const TrainingSet& data, const TrainConfig& config) {
  require(!data.sequences.empty(), ErrorCode::kInvalidArgument, "training set is empty");
  require(!data.positive_pairs.empty(), ErrorCode::kInvalidArgument,
          "training needs at least one positive pair");
  require(config.epochs >= 1, ErrorCode::kInvalidArgument, "epochs must be positive");
  const int64_t in_dim = data.sequences.front()->dim();
  for (const FeatureSequence* f : data.sequences) {
    require(f->dim() == in_dim, ErrorCode::kDimensionMismatch,
            "training sequences must share one dimension");
  }
  for (const auto& [ia, ib] : data.positive_pairs) {
    require(ia >= 0 && ib >= 0 && ia < static_cast<int32_t>(data.sequences.size()) &&
                ib < static_cast<int32_t>(data.sequences.size()),
            ErrorCode::kInvalidArgument, "pair index out of range");
  }

  TrainResult result;
  result.encoder = init_linear_encoder(in_dim, config.out_dim, config.seed);
  const double pair_coef = 1.0 / static_cast<double>(data.positive_pairs.size());

  for (int64_t epoch = 0; epoch < config.epochs; ++epoch) {
    Grid grad(in_dim, config.out_dim, 0.0);
    double step_sum = 0.0;
    double align_sum = 0.0;

    for (size_t p = 0; p < data.positive_pairs.size(); ++p) {
      const auto [ia, ib] = data.positive_pairs[p];
      const FeatureSequence& a = *data.sequences[static_cast<size_t>(ia)];
      const FeatureSequence& b = *data.sequences[static_cast<size_t>(ib)];
      const PairPlan plan =
          plan_pair(result.encoder, a, b, config, pair_sample_seed(config.seed, p));
      Grid pair_grad(in_dim, config.out_dim, 0.0);
      const LossReport report = pair_loss(result.encoder, a, b, plan, config, &pair_grad);
      step_sum += report.l_step;
      align_sum += report.l_align;
      for (size_t i = 0; i < grad.data.size(); ++i) grad.data[i] += pair_grad.data[i] * pair_coef;
    }

    double task_term = 0.0;
    if (config.task == TaskMode::kCentroidCrossEntropy) {
      const TaskPlan plan = plan_task(result.encoder, data);
      task_term = task_loss(result.encoder, data, plan, config, &grad);
    }

    const LossReport epoch_report =
        LossReport::make(step_sum * pair_coef, align_sum * pair_coef, task_term);
    require(std::isfinite(epoch_report.total), ErrorCode::kNumeric,
            "training diverged at epoch " + std::to_string(epoch + 1) + ": total loss is not finite");
    result.curve.push_back(epoch_report);

    for (size_t i = 0; i < grad.data.size(); ++i) {
      result.encoder.weight.data[i] -= config.learning_rate * grad.data[i];
    }
  }
  return result;
}

}  // namespace cpa
