// Acceptance suite: every release-gating property of the library, one
// pass/fail line each. Exit code is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cpa/alignment.hpp"
#include "cpa/metrics.hpp"
#include "cpa/step_mining.hpp"
#include "cpa/synth.hpp"
#include "cpa/training.hpp"
#include "oracle/brute_force.hpp"
#include "test_util.hpp"

using namespace cpa;

namespace {

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void expect(bool condition, const std::string& message) {
  if (!condition) throw Failure(message);
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

void expect_close(double actual, double expected, double tolerance, const std::string& what) {
  if (!(std::abs(actual - expected) <= tolerance)) {
    throw Failure(what + ": got " + format_double(actual) + ", want " + format_double(expected) +
                  " within " + format_double(tolerance));
  }
}

// ---- shared benchmark recipe ----

synth::GenConfig benchmark_config(uint64_t seed, double sigma) {
  synth::GenConfig config;
  config.procedures = 8;
  config.steps = 4;
  config.dim = 16;
  config.frames = 16;
  config.min_duration = 3;
  config.max_duration = 6;
  config.noise_sigma = sigma;
  config.n_positive = 100;
  config.n_negative = 100;
  config.mode = synth::NegativeMode::kStepPermutation;
  config.seed = seed;
  return config;
}

constexpr int64_t kBenchmarkSteps = 4;

// ---- criteria ----

void csm_optimality() {
  auto rng = std::mt19937_64{1001};
  std::uniform_int_distribution<int64_t> size(3, 7);
  for (int trial = 0; trial < 200; ++trial) {
    const int64_t t1 = size(rng);
    const int64_t t2 = size(rng);
    std::uniform_int_distribution<int64_t> steps(1, std::min<int64_t>(4, std::min(t1, t2)));
    const int64_t k = steps(rng);
    const RelationalMatrix m = testutil::random_relational(t1, t2, rng);

    const CsmTables tables = dynamic_procedure_matching(m, k);
    const double dp_score = tables.score_at(t1, t2, k);
    const auto reference = oracle::brute_force_partition(m, k);
    expect_close(dp_score, reference.score, 1e-9,
                 "trial " + std::to_string(trial) + ": search score vs enumeration");

    const BlockPartition partition = backtrace(m, tables, k);
    expect_close(partition.score, reference.score, 1e-9,
                 "trial " + std::to_string(trial) + ": backtraced partition score");
  }
}

void fsa_correctness() {
  auto rng = std::mt19937_64{1002};
  std::uniform_int_distribution<int64_t> frames_dist(2, 10);
  for (int trial = 0; trial < 200; ++trial) {
    const int64_t frames = frames_dist(rng);
    std::uniform_int_distribution<int64_t> steps_dist(1, std::min<int64_t>(frames, 5));
    const int64_t steps = steps_dist(rng);
    const Grid probs = testutil::random_row_stochastic(frames, steps, rng);

    const auto reference = oracle::brute_force_alignment(probs);
    const double dp_prob =
        std::exp(alignment_log_probability(AssignmentMatrix::from_probabilities(probs),
                                           BoundaryMode::kSemantic)
                     .log_prob);
    const double rel = std::abs(dp_prob - reference.probability) / reference.probability;
    expect(rel <= 1e-9, "trial " + std::to_string(trial) + ": path sum off by rel " +
                            format_double(rel));
  }
}

void gradient_fidelity() {
  auto rng = std::mt19937_64{1003};
  std::normal_distribution<double> normal(0.0, 1.0);
  const double h = 1e-5;
  for (int trial = 0; trial < 50; ++trial) {
    std::uniform_int_distribution<int64_t> frames_dist(2, 8);
    const int64_t frames = frames_dist(rng);
    std::uniform_int_distribution<int64_t> steps_dist(1, std::min<int64_t>(frames, 4));
    const int64_t steps = steps_dist(rng);

    Grid logits(frames, steps);
    for (double& v : logits.data) v = normal(rng);

    auto loss_of = [&](const Grid& l) {
      Grid p = l;
      softmax_rows(p);
      return -alignment_log_probability(AssignmentMatrix::from_probabilities(p)).log_prob;
    };

    Grid probs = logits;
    softmax_rows(probs);
    const Grid analytic = alignment_gradient(AssignmentMatrix::from_probabilities(probs));

    double max_diff = 0.0;
    double max_mag = 0.0;
    for (int64_t t = 0; t < frames; ++t) {
      double row_sum = 0.0;
      for (int64_t k = 0; k < steps; ++k) {
        Grid plus = logits;
        Grid minus = logits;
        plus.at(t, k) += h;
        minus.at(t, k) -= h;
        const double numeric = (loss_of(plus) - loss_of(minus)) / (2.0 * h);
        max_diff = std::max(max_diff, std::abs(analytic.at(t, k) - numeric));
        max_mag = std::max({max_mag, std::abs(analytic.at(t, k)), std::abs(numeric)});
        row_sum += analytic.at(t, k);
      }
      expect(std::abs(row_sum) <= 1e-8, "trial " + std::to_string(trial) +
                                            ": gradient row sum " + format_double(row_sum));
    }
    const double rel = max_diff / std::max(max_mag, 1e-12);
    expect(rel <= 1e-4, "trial " + std::to_string(trial) +
                            ": finite-difference mismatch rel " + format_double(rel));
  }
}

void closed_forms() {
  // uniform three-frame two-step case: two paths of probability 1/8
  const AlignmentResult uniform =
      alignment_log_probability(AssignmentMatrix::from_probabilities(Grid(3, 2, 0.5)));
  expect_close(std::exp(uniform.log_prob), 0.25, 1e-15, "uniform 3x2 path sum");

  auto rng = std::mt19937_64{1004};

  // single step: the product of the first column
  const Grid single = testutil::random_row_stochastic(7, 1, rng);
  double expected = 0.0;
  for (int64_t t = 0; t < 7; ++t) expected += std::log(single.at(t, 0));
  const double got =
      alignment_log_probability(AssignmentMatrix::from_probabilities(single)).log_prob;
  expect(got == expected, "single-step closed form: got " + format_double(got) + ", want " +
                              format_double(expected));

  // one step per frame: the diagonal product
  const Grid square = testutil::random_row_stochastic(6, 6, rng);
  double diagonal = 0.0;
  for (int64_t t = 0; t < 6; ++t) diagonal += std::log(square.at(t, t));
  const double got_diag =
      alignment_log_probability(AssignmentMatrix::from_probabilities(square)).log_prob;
  expect(got_diag == diagonal, "diagonal closed form: got " + format_double(got_diag) +
                                   ", want " + format_double(diagonal));
}

void verification_benchmark() {
  for (uint64_t seed : {0ULL, 1ULL, 2ULL}) {
    const synth::PairDataset data = synth::generate_dataset(benchmark_config(seed, 0.1));
    const synth::VerificationReport cpa_report =
        synth::evaluate_verification(data, synth::VerifyMethod::kCpa, kBenchmarkSteps);
    const synth::VerificationReport baseline =
        synth::evaluate_verification(data, synth::VerifyMethod::kMeanFeatureL2, kBenchmarkSteps);
    std::cout << "    seed " << seed << ": cpa auc " << cpa_report.auc << ", mean-l2 auc "
              << baseline.auc << "\n";
    expect(cpa_report.auc >= 0.90, "seed " + std::to_string(seed) + ": cpa auc " +
                                       format_double(cpa_report.auc) + " below 0.90");
    expect(cpa_report.auc > baseline.auc,
           "seed " + std::to_string(seed) + ": cpa auc " + format_double(cpa_report.auc) +
               " does not beat mean-l2 " + format_double(baseline.auc));
  }
}

void segmentation_recovery() {
  // noiseless positives: mined boundaries equal the generator's exactly
  const synth::PairDataset clean = synth::generate_dataset(benchmark_config(0, 0.0));
  for (const synth::PairEntry& pair : clean.pairs) {
    if (pair.label != 1) continue;
    const synth::GeneratedSequence& a = clean.sequences[static_cast<size_t>(pair.a)];
    const synth::GeneratedSequence& b = clean.sequences[static_cast<size_t>(pair.b)];
    const MiningResult mined = collaborative_step_mining(a.seq, b.seq, kBenchmarkSteps);
    expect(mined.partition.boundaries(1) == a.boundaries &&
               mined.partition.boundaries(2) == b.boundaries,
           "noiseless boundaries differ from the ground truth");
  }

  // noisy benchmark: mean IoU across seeds
  double iou_sum = 0.0;
  int64_t iou_count = 0;
  for (uint64_t seed : {0ULL, 1ULL, 2ULL}) {
    const synth::PairDataset data = synth::generate_dataset(benchmark_config(seed, 0.1));
    for (const synth::PairEntry& pair : data.pairs) {
      if (pair.label != 1) continue;
      const synth::GeneratedSequence& a = data.sequences[static_cast<size_t>(pair.a)];
      const synth::GeneratedSequence& b = data.sequences[static_cast<size_t>(pair.b)];
      const MiningResult mined = collaborative_step_mining(a.seq, b.seq, kBenchmarkSteps);
      iou_sum += boundary_iou(mined.partition.boundaries(1), a.boundaries, a.seq.frames());
      iou_sum += boundary_iou(mined.partition.boundaries(2), b.boundaries, b.seq.frames());
      iou_count += 2;
    }
  }
  const double mean_iou = iou_sum / static_cast<double>(iou_count);
  std::cout << "    mean boundary iou at sigma 0.1: " << mean_iou << "\n";
  expect(mean_iou >= 0.8, "mean boundary iou " + format_double(mean_iou) + " below 0.8");
}

double encoded_auc(const synth::PairDataset& data, const LinearEncoder& encoder, int64_t k) {
  std::vector<double> distances;
  std::vector<int32_t> labels;
  std::vector<FeatureSequence> encoded;
  encoded.reserve(data.sequences.size());
  for (const synth::GeneratedSequence& g : data.sequences) encoded.push_back(encoder.apply(g.seq));
  for (const synth::PairEntry& pair : data.pairs) {
    const MiningResult mined =
        collaborative_step_mining(encoded[static_cast<size_t>(pair.a)],
                                  encoded[static_cast<size_t>(pair.b)], k);
    distances.push_back(
        alignment_distance(encoded[static_cast<size_t>(pair.a)],
                           encoded[static_cast<size_t>(pair.b)], mined.steps1, mined.steps2)
            .value);
    labels.push_back(pair.label);
  }
  return pairwise_auc(distances, labels);
}

void training_demo() {
  const synth::PairDataset data = synth::generate_dataset(benchmark_config(0, 0.1));

  TrainingSet set;
  for (const synth::GeneratedSequence& g : data.sequences) set.sequences.push_back(&g.seq);
  for (const synth::PairEntry& pair : data.pairs) {
    if (pair.label == 1) set.positive_pairs.emplace_back(pair.a, pair.b);
  }

  TrainConfig config;
  config.k = kBenchmarkSteps;
  config.epochs = 10;
  config.out_dim = 8;
  config.learning_rate = 0.05;
  config.seed = 0;

  const LinearEncoder initial = init_linear_encoder(16, 8, config.seed);
  const double auc_before = encoded_auc(data, initial, config.k);

  const TrainResult result = train_linear_encoder(set, config);
  const double auc_after = encoded_auc(data, result.encoder, config.k);

  std::cout << "    loss epoch 1 " << result.curve.front().total << " -> epoch 10 "
            << result.curve.back().total << "; auc " << auc_before << " -> " << auc_after << "\n";
  expect(result.curve.back().total < result.curve.front().total,
         "epoch-10 loss " + format_double(result.curve.back().total) +
             " not below epoch-1 loss " + format_double(result.curve.front().total));
  expect(auc_after >= auc_before, "auc after training " + format_double(auc_after) +
                                      " fell below " + format_double(auc_before));
}

void step_count_sensitivity() {
  const synth::PairDataset data = synth::generate_dataset(benchmark_config(0, 0.1));
  double best = 0.0;
  double at_truth = 0.0;
  std::cout << "    k vs auc:";
  for (int64_t k = 2; k <= 8; ++k) {
    const double auc = synth::evaluate_verification(data, synth::VerifyMethod::kCpa, k).auc;
    std::cout << " " << k << ":" << format_double(auc);
    best = std::max(best, auc);
    if (k == kBenchmarkSteps) at_truth = auc;
  }
  std::cout << "\n";
  expect(at_truth >= best - 0.02, "auc at the true step count " + format_double(at_truth) +
                                      " trails the best " + format_double(best) +
                                      " by more than 0.02");
}

struct Criterion {
  std::string name;
  double time_limit_seconds;
  std::function<void()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"csm-optimality", 60.0, csm_optimality},
      {"fsa-correctness", 60.0, fsa_correctness},
      {"gradient-fidelity", 60.0, gradient_fidelity},
      {"closed-forms", 60.0, closed_forms},
      {"verification-benchmark", 300.0, verification_benchmark},
      {"segmentation-recovery", 300.0, segmentation_recovery},
      {"training-demo", 300.0, training_demo},
      {"step-count-sensitivity", 300.0, step_count_sensitivity},
  };

  int failures = 0;
  for (const Criterion& criterion : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string error;
    try {
      criterion.run();
    } catch (const std::exception& e) {
      error = e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (error.empty() && elapsed > criterion.time_limit_seconds) {
      error = "exceeded the " + format_double(criterion.time_limit_seconds) + "s budget";
    }
    if (error.empty()) {
      std::printf("[PASS] %-24s (%.2fs)\n", criterion.name.c_str(), elapsed);
    } else {
      std::printf("[FAIL] %-24s (%.2fs): %s\n", criterion.name.c_str(), elapsed, error.c_str());
      ++failures;
    }
  }
  if (failures == 0) {
    std::printf("all %zu criteria passed\n", criteria.size());
  } else {
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  }
  return failures;
}
