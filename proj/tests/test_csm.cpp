#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "cpa/step_mining.hpp"
#include "oracle/brute_force.hpp"
#include "test_util.hpp"

using namespace cpa;

TEST_CASE("block-diagonal matrix splits at the corner") {
  const RelationalMatrix m = testutil::block_diagonal_4x4();
  const CsmTables tables = dynamic_procedure_matching(m, 2);
  CHECK(tables.score_at(4, 4, 2) == doctest::Approx(1.0).epsilon(1e-12));

  const BlockPartition partition = backtrace(m, tables, 2);
  REQUIRE(partition.step_count() == 2);
  CHECK(partition.blocks[0].x == 2);
  CHECK(partition.blocks[0].y == 2);
  CHECK(partition.blocks[1].x == 4);
  CHECK(partition.blocks[1].y == 4);

  const auto oracle_result = oracle::brute_force_partition(m, 2);
  CHECK(oracle_result.score == doctest::Approx(tables.score_at(4, 4, 2)).epsilon(1e-12));
  CHECK(oracle_result.partition.blocks[0].x == 2);
  CHECK(oracle_result.partition.blocks[0].y == 2);
}

TEST_CASE("a single block covers everything and scores the mean") {
  auto rng = std::mt19937_64{21};
  const RelationalMatrix m = testutil::random_relational(5, 4, rng);
  const CsmTables tables = dynamic_procedure_matching(m, 1);

  double mean = 0.0;
  for (double v : m.values().data) mean += v;
  mean /= static_cast<double>(m.rows() * m.cols());
  CHECK(tables.score_at(5, 4, 1) == doctest::Approx(mean).epsilon(1e-12));

  const BlockPartition partition = backtrace(m, tables, 1);
  REQUIRE(partition.step_count() == 1);
  CHECK(partition.blocks[0].a == 0);
  CHECK(partition.blocks[0].b == 0);
  CHECK(partition.blocks[0].x == 5);
  CHECK(partition.blocks[0].y == 4);
}

TEST_CASE("first table layer equals the leading-rectangle consistency") {
  auto rng = std::mt19937_64{22};
  const RelationalMatrix m = testutil::random_relational(6, 5, rng);
  const CsmTables tables = dynamic_procedure_matching(m, 3);
  for (int64_t i = 1; i <= 6; ++i) {
    for (int64_t j = 1; j <= 5; ++j) {
      CHECK(tables.score_at(i, j, 1) ==
            doctest::Approx(block_consistency(m, {0, 0, i, j})).epsilon(1e-12));
    }
  }
  // states with fewer frames than steps are unreachable
  CHECK(tables.score_at(1, 1, 2) == -std::numeric_limits<double>::infinity());
  CHECK(tables.score_at(2, 1, 2) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("random 5x5 three-step search matches exhaustive enumeration") {
  auto rng = std::mt19937_64{23};
  const RelationalMatrix m = testutil::random_relational(5, 5, rng);
  const CsmTables tables = dynamic_procedure_matching(m, 3);
  const auto oracle_result = oracle::brute_force_partition(m, 3);
  CHECK(tables.score_at(5, 5, 3) == doctest::Approx(oracle_result.score).epsilon(1e-9));
}

TEST_CASE("backtraced partition attains the table optimum on a 6x7 instance") {
  auto rng = std::mt19937_64{24};
  const RelationalMatrix m = testutil::random_relational(6, 7, rng);
  const CsmTables tables = dynamic_procedure_matching(m, 3);
  const BlockPartition partition = backtrace(m, tables, 3);
  CHECK(partition.score == doctest::Approx(tables.score_at(6, 7, 3)).epsilon(1e-9));
  const auto oracle_result = oracle::brute_force_partition(m, 3);
  CHECK(partition.score == doctest::Approx(oracle_result.score).epsilon(1e-9));
}

TEST_CASE("search equals brute force over random instances") {
  auto rng = std::mt19937_64{25};
  std::uniform_int_distribution<int64_t> size(3, 7);
  for (int trial = 0; trial < 200; ++trial) {
    const int64_t t1 = size(rng);
    const int64_t t2 = size(rng);
    std::uniform_int_distribution<int64_t> steps(1, std::min<int64_t>(4, std::min(t1, t2)));
    const int64_t k = steps(rng);
    const RelationalMatrix m = testutil::random_relational(t1, t2, rng);

    const CsmTables tables = dynamic_procedure_matching(m, k);
    const BlockPartition partition = backtrace(m, tables, k);
    const auto oracle_result = oracle::brute_force_partition(m, k);

    CHECK(tables.score_at(t1, t2, k) == doctest::Approx(oracle_result.score).epsilon(1e-9));
    CHECK(partition.score == doctest::Approx(oracle_result.score).epsilon(1e-9));

    // structural invariants of every backtraced partition
    int64_t prev_x = 0;
    int64_t prev_y = 0;
    for (const Block& blk : partition.blocks) {
      CHECK(blk.a == prev_x);
      CHECK(blk.b == prev_y);
      CHECK(blk.x > blk.a);
      CHECK(blk.y > blk.b);
      prev_x = blk.x;
      prev_y = blk.y;
    }
    CHECK(prev_x == t1);
    CHECK(prev_y == t2);
  }
}

TEST_CASE("step count out of range is rejected") {
  auto rng = std::mt19937_64{26};
  const RelationalMatrix m = testutil::random_relational(4, 3, rng);
  CHECK_THROWS_AS(dynamic_procedure_matching(m, 0), Error);
  CHECK_THROWS_AS(dynamic_procedure_matching(m, 4), Error);
}

TEST_CASE("corrupt index tables are rejected by the backtrace") {
  auto rng = std::mt19937_64{27};
  const RelationalMatrix m = testutil::random_relational(4, 4, rng);
  CsmTables tables = dynamic_procedure_matching(m, 2);
  // self-loop at the final state
  tables.set(4, 4, 2, tables.score_at(4, 4, 2), {4, 4});
  CHECK_THROWS_AS(backtrace(m, tables, 2), Error);
}

TEST_CASE("midpoint sampling picks the middle frame of each step") {
  auto rng = std::mt19937_64{28};
  const FeatureSequence f = testutil::random_sequence(6, 3, rng);
  BlockPartition partition;
  partition.blocks = {{0, 0, 2, 2}, {2, 2, 6, 6}};

  const StepFeatures s = sample_step_features(f, partition, 1, SamplePolicy::kMidpoint, 0);
  REQUIRE(s.count() == 2);
  CHECK(s.source_frames[0] == 0);  // interval [0, 2)
  CHECK(s.source_frames[1] == 3);  // interval [2, 6)
  for (int64_t c = 0; c < 3; ++c) {
    CHECK(s.step(0)[static_cast<size_t>(c)] == f.frame(0)[static_cast<size_t>(c)]);
    CHECK(s.step(1)[static_cast<size_t>(c)] == f.frame(3)[static_cast<size_t>(c)]);
  }
}

TEST_CASE("one step per frame returns the frames in order") {
  auto rng = std::mt19937_64{29};
  const FeatureSequence f = testutil::random_sequence(4, 2, rng);
  BlockPartition partition;
  for (int64_t i = 0; i < 4; ++i) partition.blocks.push_back({i, i, i + 1, i + 1});

  const StepFeatures s = sample_step_features(f, partition, 1, SamplePolicy::kMidpoint, 0);
  REQUIRE(s.count() == 4);
  for (int64_t i = 0; i < 4; ++i) {
    CHECK(s.source_frames[static_cast<size_t>(i)] == i);
    for (int64_t c = 0; c < 2; ++c) {
      CHECK(s.step(i)[static_cast<size_t>(c)] == f.frame(i)[static_cast<size_t>(c)]);
    }
  }
}

TEST_CASE("seeded random sampling is reproducible and in range") {
  auto rng = std::mt19937_64{30};
  const FeatureSequence f = testutil::random_sequence(9, 2, rng);
  BlockPartition partition;
  partition.blocks = {{0, 0, 3, 3}, {3, 3, 9, 9}};

  const StepFeatures a = sample_step_features(f, partition, 1, SamplePolicy::kSeededRandom, 42);
  const StepFeatures b = sample_step_features(f, partition, 1, SamplePolicy::kSeededRandom, 42);
  CHECK(a.source_frames == b.source_frames);
  CHECK(a.source_frames[0] >= 0);
  CHECK(a.source_frames[0] < 3);
  CHECK(a.source_frames[1] >= 3);
  CHECK(a.source_frames[1] < 9);
}

TEST_CASE("mean sampling averages the step frames") {
  const FeatureSequence f({0.0, 2.0, 4.0, 6.0}, 4, 1);
  BlockPartition partition;
  partition.blocks = {{0, 0, 2, 2}, {2, 2, 4, 4}};
  const StepFeatures s = sample_step_features(f, partition, 1, SamplePolicy::kMean, 0);
  CHECK(s.step(0)[0] == doctest::Approx(1.0));
  CHECK(s.step(1)[0] == doctest::Approx(5.0));
  CHECK(s.source_frames[0] == -1);
}

TEST_CASE("joint mining recovers matching noiseless segments") {
  const FeatureSequence f =
      testutil::segmented_sequence({3, 3}, {0, 1}, 4, 4.0);
  const MiningResult mined = collaborative_step_mining(f, f, 2);
  REQUIRE(mined.partition.step_count() == 2);
  CHECK(mined.partition.blocks[0].x == 3);
  CHECK(mined.partition.blocks[0].y == 3);
  CHECK(mined.partition.blocks[1].x == 6);
  CHECK(mined.partition.blocks[1].y == 6);
}

TEST_CASE("per-frame mining on a sharply diagonal matrix is the diagonal") {
  const int64_t t = 5;
  std::vector<int64_t> durations(t, 1);
  std::vector<int64_t> order(t);
  for (int64_t i = 0; i < t; ++i) order[static_cast<size_t>(i)] = i;
  const FeatureSequence f = testutil::segmented_sequence(durations, order, t, 6.0);

  const MiningResult mined = collaborative_step_mining(f, f, t);
  for (int64_t i = 0; i < t; ++i) {
    const Block& blk = mined.partition.blocks[static_cast<size_t>(i)];
    CHECK(blk.a == i);
    CHECK(blk.b == i);
    CHECK(blk.x == i + 1);
    CHECK(blk.y == i + 1);
  }
}

TEST_CASE("swapping non-adjacent segments strictly lowers the optimum") {
  const FeatureSequence original =
      testutil::segmented_sequence({2, 2, 2, 2}, {0, 1, 2, 3}, 4, 4.0);
  const FeatureSequence swapped =
      testutil::segmented_sequence({2, 2, 2, 2}, {2, 1, 0, 3}, 4, 4.0);

  const RelationalMatrix matched = compute_relational_matrix(original, original);
  const RelationalMatrix mismatched = compute_relational_matrix(original, swapped);
  const double matched_score = dynamic_procedure_matching(matched, 4).score_at(8, 8, 4);
  const double mismatched_score = dynamic_procedure_matching(mismatched, 4).score_at(8, 8, 4);
  CHECK(matched_score > mismatched_score + 1e-6);
}
