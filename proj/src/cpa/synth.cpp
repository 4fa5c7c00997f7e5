#include "cpa/synth.hpp"

#include <cmath>
#include <string>

#include "cpa/metrics.hpp"
#include "cpa/rng.hpp"

namespace cpa::synth {

void ProcedureSpec::validate() const {
  require(step_count() >= 1 && dim() >= 1, ErrorCode::kInvalidArgument,
          "procedure needs at least one step and one dimension");
  require(min_duration >= 1 && max_duration >= min_duration, ErrorCode::kInvalidArgument,
          "invalid duration range");
  require(step_count() * min_duration <= total_frames &&
              total_frames <= step_count() * max_duration,
          ErrorCode::kInvalidArgument,
          "duration constraints cannot tile " + std::to_string(total_frames) + " frames with " +
              std::to_string(step_count()) + " steps in [" + std::to_string(min_duration) + ", " +
              std::to_string(max_duration) + "]");
  require(noise_sigma >= 0.0, ErrorCode::kInvalidArgument, "noise sigma must be non-negative");
  for (int64_t i = 0; i < step_count(); ++i) {
    for (int64_t j = i + 1; j < step_count(); ++j) {
      bool equal = true;
      for (int64_t c = 0; c < dim() && equal; ++c) {
        equal = prototypes.at(i, c) == prototypes.at(j, c);
      }
      require(!equal, ErrorCode::kInvalidArgument,
              "step prototypes " + std::to_string(i) + " and " + std::to_string(j) +
                  " are identical");
    }
  }
}

ProcedureSpec random_procedure_spec(int64_t steps, int64_t dim, int64_t total_frames,
                                    int64_t min_duration, int64_t max_duration,
                                    double noise_sigma, uint64_t seed, double prototype_scale) {
  require(prototype_scale > 0.0, ErrorCode::kInvalidArgument, "prototype scale must be positive");
  auto rng = make_rng(seed);
  ProcedureSpec spec;
  spec.prototypes = Grid(steps, dim);
  // Gaussian draws orthonormalized by Gram-Schmidt (when they fit), then
  // scaled: equal-energy, well-separated steps.
  for (int64_t s = 0; s < steps; ++s) {
    auto row = spec.prototypes.row(s);
    for (double& v : row) v = gaussian(rng);
    if (steps <= dim) {
      for (int64_t prev = 0; prev < s; ++prev) {
        auto other = spec.prototypes.row(prev);
        double proj = 0.0;
        for (int64_t c = 0; c < dim; ++c) proj += row[static_cast<size_t>(c)] * other[static_cast<size_t>(c)];
        proj /= prototype_scale * prototype_scale;
        for (int64_t c = 0; c < dim; ++c) row[static_cast<size_t>(c)] -= proj * other[static_cast<size_t>(c)];
      }
    }
    double norm = 0.0;
    for (double v : row) norm += v * v;
    norm = std::sqrt(norm);
    require(norm > 1e-9, ErrorCode::kNumeric, "degenerate prototype draw");
    for (double& v : row) v *= prototype_scale / norm;
  }
  spec.total_frames = total_frames;
  spec.min_duration = min_duration;
  spec.max_duration = max_duration;
  spec.noise_sigma = noise_sigma;
  spec.validate();
  return spec;
}

namespace {

std::vector<int64_t> sample_durations(const ProcedureSpec& spec, std::mt19937_64& rng) {
  const int64_t k = spec.step_count();
  std::vector<int64_t> durations(static_cast<size_t>(k));
  int64_t remaining = spec.total_frames;
  for (int64_t s = 0; s < k; ++s) {
    const int64_t after = k - s - 1;
    const int64_t lo = std::max(spec.min_duration, remaining - after * spec.max_duration);
    const int64_t hi = std::min(spec.max_duration, remaining - after * spec.min_duration);
    const int64_t d = uniform_int(rng, lo, hi);
    durations[static_cast<size_t>(s)] = d;
    remaining -= d;
  }
  return durations;
}

GeneratedSequence generate_with_order(const ProcedureSpec& spec,
                                      const std::vector<int32_t>& order, uint64_t seed) {
  auto rng = make_rng(seed);
  const std::vector<int64_t> durations = sample_durations(spec, rng);

  std::vector<double> data;
  data.reserve(static_cast<size_t>(spec.total_frames * spec.dim()));
  std::vector<int64_t> boundaries;
  int64_t cursor = 0;
  for (size_t s = 0; s < order.size(); ++s) {
    const int32_t proto = order[s];
    for (int64_t t = 0; t < durations[s]; ++t) {
      for (int64_t c = 0; c < spec.dim(); ++c) {
        double v = spec.prototypes.at(proto, c);
        if (spec.noise_sigma > 0.0) v += spec.noise_sigma * gaussian(rng);
        data.push_back(v);
      }
    }
    cursor += durations[s];
    boundaries.push_back(cursor);
  }
  return GeneratedSequence{FeatureSequence(std::move(data), spec.total_frames, spec.dim()),
                           std::move(boundaries), order, -1, false};
}

std::vector<int32_t> identity_order(int64_t k) {
  std::vector<int32_t> order(static_cast<size_t>(k));
  for (int64_t i = 0; i < k; ++i) order[static_cast<size_t>(i)] = static_cast<int32_t>(i);
  return order;
}

// Swap two non-adjacent positions, chosen uniformly over all such pairs.
std::vector<int32_t> permuted_order(int64_t k, std::mt19937_64& rng) {
  std::vector<std::pair<int64_t, int64_t>> candidates;
  for (int64_t p = 0; p < k; ++p) {
    for (int64_t q = p + 2; q < k; ++q) candidates.emplace_back(p, q);
  }
  const auto [p, q] = candidates[static_cast<size_t>(uniform_index(
      rng, static_cast<int64_t>(candidates.size())))];
  std::vector<int32_t> order = identity_order(k);
  std::swap(order[static_cast<size_t>(p)], order[static_cast<size_t>(q)]);
  return order;
}

}  // namespace

GeneratedSequence generate_procedure(const ProcedureSpec& spec, uint64_t seed) {
  spec.validate();
  return generate_with_order(spec, identity_order(spec.step_count()), seed);
}

PairDataset generate_pairs(const std::vector<ProcedureSpec>& specs, int64_t n_pos, int64_t n_neg,
                           NegativeMode mode, uint64_t seed) {
  require(!specs.empty(), ErrorCode::kInvalidArgument, "no procedure specs given");
  for (const ProcedureSpec& spec : specs) spec.validate();
  if (mode == NegativeMode::kDifferentProcedure && n_neg > 0) {
    require(specs.size() >= 2, ErrorCode::kInvalidArgument,
            "different-procedure negatives need at least two specs");
  }
  if (mode == NegativeMode::kStepPermutation && n_neg > 0) {
    for (const ProcedureSpec& spec : specs) {
      require(spec.step_count() >= 3, ErrorCode::kInvalidArgument,
              "step-permutation negatives need at least three steps");
    }
  }

  auto rng = make_rng(seed);
  PairDataset data;
  auto add_sequence = [&](GeneratedSequence seq) {
    data.sequences.push_back(std::move(seq));
    return static_cast<int32_t>(data.sequences.size() - 1);
  };

  for (int64_t p = 0; p < n_pos; ++p) {
    const size_t spec_idx = static_cast<size_t>(p) % specs.size();
    const ProcedureSpec& spec = specs[spec_idx];
    GeneratedSequence a = generate_procedure(spec, rng());
    GeneratedSequence b = generate_procedure(spec, rng());
    a.spec_index = b.spec_index = static_cast<int32_t>(spec_idx);
    const int32_t ia = add_sequence(std::move(a));
    const int32_t ib = add_sequence(std::move(b));
    data.pairs.push_back({ia, ib, 1});
  }

  for (int64_t n = 0; n < n_neg; ++n) {
    const size_t spec_idx = static_cast<size_t>(n) % specs.size();
    const ProcedureSpec& spec = specs[spec_idx];
    GeneratedSequence a = generate_procedure(spec, rng());
    a.spec_index = static_cast<int32_t>(spec_idx);

    GeneratedSequence b = [&]() -> GeneratedSequence {
      if (mode == NegativeMode::kStepPermutation) {
        const std::vector<int32_t> order = permuted_order(spec.step_count(), rng);
        GeneratedSequence seq = generate_with_order(spec, order, rng());
        seq.spec_index = static_cast<int32_t>(spec_idx);
        seq.permuted = true;
        return seq;
      }
      size_t other = static_cast<size_t>(uniform_index(rng, static_cast<int64_t>(specs.size() - 1)));
      if (other >= spec_idx) ++other;
      GeneratedSequence seq = generate_procedure(specs[other], rng());
      seq.spec_index = static_cast<int32_t>(other);
      return seq;
    }();
    const int32_t ia = add_sequence(std::move(a));
    const int32_t ib = add_sequence(std::move(b));
    data.pairs.push_back({ia, ib, 0});
  }
  return data;
}

PairDataset generate_dataset(const GenConfig& config) {
  require(config.procedures >= 1, ErrorCode::kInvalidArgument, "need at least one procedure");
  auto rng = make_rng(config.seed);
  std::vector<ProcedureSpec> specs;
  specs.reserve(static_cast<size_t>(config.procedures));
  for (int64_t i = 0; i < config.procedures; ++i) {
    specs.push_back(random_procedure_spec(config.steps, config.dim, config.frames,
                                          config.min_duration, config.max_duration,
                                          config.noise_sigma, rng(), config.prototype_scale));
  }
  return generate_pairs(specs, config.n_positive, config.n_negative, config.mode, rng());
}

double mean_feature_distance(const FeatureSequence& a, const FeatureSequence& b) {
  require(a.dim() == b.dim(), ErrorCode::kDimensionMismatch, "feature dimensions differ");
  auto mean_unit = [](const FeatureSequence& f) {
    std::vector<double> m(static_cast<size_t>(f.dim()), 0.0);
    for (int64_t t = 0; t < f.frames(); ++t) {
      auto row = f.frame(t);
      for (int64_t c = 0; c < f.dim(); ++c) m[static_cast<size_t>(c)] += row[c];
    }
    double norm = 0.0;
    for (double& v : m) {
      v /= static_cast<double>(f.frames());
      norm += v * v;
    }
    norm = std::sqrt(norm);
    if (norm > 0.0) {
      for (double& v : m) v /= norm;
    }
    return m;
  };
  const std::vector<double> ma = mean_unit(a);
  const std::vector<double> mb = mean_unit(b);
  double sq = 0.0;
  for (size_t c = 0; c < ma.size(); ++c) {
    const double diff = ma[c] - mb[c];
    sq += diff * diff;
  }
  return std::sqrt(sq);
}

double pair_distance(const FeatureSequence& a, const FeatureSequence& b, VerifyMethod method,
                     int64_t k, SamplePolicy policy, uint64_t seed, BoundaryMode boundary) {
  if (method == VerifyMethod::kMeanFeatureL2) {
    return mean_feature_distance(a, b);
  }
  const MiningResult mined = collaborative_step_mining(a, b, k, policy, seed);
  return alignment_distance(a, b, mined.steps1, mined.steps2, boundary).value;
}

VerificationReport evaluate_verification(const PairDataset& data, VerifyMethod method, int64_t k,
                                         SamplePolicy policy, uint64_t seed,
                                         BoundaryMode boundary) {
  require(!data.pairs.empty(), ErrorCode::kInvalidArgument, "no pairs to evaluate");
  VerificationReport report;
  report.distances.reserve(data.pairs.size());
  report.labels.reserve(data.pairs.size());
  for (const PairEntry& entry : data.pairs) {
    const FeatureSequence& a = data.sequences[static_cast<size_t>(entry.a)].seq;
    const FeatureSequence& b = data.sequences[static_cast<size_t>(entry.b)].seq;
    report.distances.push_back(pair_distance(a, b, method, k, policy, seed, boundary));
    report.labels.push_back(entry.label);
  }
  report.auc = pairwise_auc(report.distances, report.labels);
  return report;
}

}  // namespace cpa::synth
