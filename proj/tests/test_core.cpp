#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "cpa/relational_matrix.hpp"
#include "test_util.hpp"

using namespace cpa;

TEST_CASE("feature sequence validates its shape and entries") {
  CHECK_THROWS_AS(FeatureSequence({}, 0, 1), Error);
  CHECK_THROWS_AS(FeatureSequence({1.0, 2.0, 3.0}, 2, 2), Error);
  CHECK_THROWS_AS(FeatureSequence({1.0, std::nan("")}, 1, 2), Error);

  const FeatureSequence f({1.0, 2.0, 3.0, 4.0, 5.0, 6.0}, 2, 3);
  CHECK(f.frames() == 2);
  CHECK(f.dim() == 3);
  CHECK(f.frame(1)[2] == 6.0);
}

TEST_CASE("identical constant frames give uniform similarity rows") {
  const FeatureSequence f({1.0, 2.0, 1.0, 2.0, 1.0, 2.0}, 3, 2);
  const RelationalMatrix m = compute_relational_matrix(f, f);
  for (int64_t i = 0; i < 3; ++i) {
    for (int64_t j = 0; j < 3; ++j) {
      CHECK(m.at(i, j) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    }
  }
  CHECK(m.row_normalized());
}

TEST_CASE("two orthonormal frames match the scalar softmax value") {
  const FeatureSequence f({1.0, 0.0, 0.0, 1.0}, 2, 2);
  const RelationalMatrix m = compute_relational_matrix(f, f);
  // row 0 logits are (1/sqrt(2), 0)
  const double hot = std::exp(1.0 / std::sqrt(2.0));
  const double expected = hot / (hot + 1.0);
  CHECK(m.at(0, 0) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(m.at(0, 0) == doctest::Approx(0.6698).epsilon(1e-4));
  CHECK(m.at(0, 1) == doctest::Approx(0.3302).epsilon(1e-4));
}

TEST_CASE("relational matrix shape and row normalization") {
  auto rng = std::mt19937_64{7};
  const FeatureSequence f1 = testutil::random_sequence(5, 3, rng);
  const FeatureSequence f2 = testutil::random_sequence(7, 3, rng);
  const RelationalMatrix m = compute_relational_matrix(f1, f2);
  CHECK(m.rows() == 5);
  CHECK(m.cols() == 7);
  for (int64_t i = 0; i < m.rows(); ++i) {
    double sum = 0.0;
    for (int64_t j = 0; j < m.cols(); ++j) {
      CHECK(m.at(i, j) >= 0.0);
      CHECK(m.at(i, j) <= 1.0);
      sum += m.at(i, j);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("dimension mismatch is rejected with a message") {
  auto rng = std::mt19937_64{8};
  const FeatureSequence f1 = testutil::random_sequence(3, 2, rng);
  const FeatureSequence f2 = testutil::random_sequence(3, 4, rng);
  CHECK_THROWS_WITH_AS(compute_relational_matrix(f1, f2),
                       doctest::Contains("dimensions differ"), Error);
}

TEST_CASE("relational matrix computation is deterministic") {
  auto rng = std::mt19937_64{9};
  const FeatureSequence f1 = testutil::random_sequence(6, 4, rng);
  const FeatureSequence f2 = testutil::random_sequence(5, 4, rng);
  const RelationalMatrix a = compute_relational_matrix(f1, f2);
  const RelationalMatrix b = compute_relational_matrix(f1, f2);
  CHECK(std::memcmp(a.values().data.data(), b.values().data.data(),
                    a.values().data.size() * sizeof(double)) == 0);
}

TEST_CASE("raw mode keeps scaled products and rejects negatives") {
  const FeatureSequence pos({1.0, 0.0, 0.0, 1.0}, 2, 2);
  const RelationalMatrix raw = compute_relational_matrix(pos, pos, /*normalize=*/false);
  CHECK_FALSE(raw.row_normalized());
  CHECK(raw.at(0, 0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(raw.at(0, 1) == 0.0);

  const FeatureSequence neg({1.0, -1.0}, 2, 1);
  CHECK_THROWS_AS(compute_relational_matrix(neg, neg, false), Error);
}

TEST_CASE("block consistency of a constant matrix is the constant") {
  const RelationalMatrix m = RelationalMatrix::from_values(Grid(3, 4, 0.25), false);
  CHECK(block_consistency(m, {0, 0, 3, 4}) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(block_consistency(m, {1, 2, 2, 4}) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("block consistency on the block-diagonal example") {
  const RelationalMatrix m = testutil::block_diagonal_4x4();
  CHECK(block_consistency(m, {0, 0, 2, 2}) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(block_consistency(m, {2, 2, 4, 4}) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(block_consistency(m, {0, 2, 2, 4}) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("single-cell blocks return the entry exactly") {
  auto rng = std::mt19937_64{10};
  const RelationalMatrix m = testutil::random_relational(5, 6, rng);
  for (int64_t i = 0; i < 5; ++i) {
    for (int64_t j = 0; j < 6; ++j) {
      CHECK(block_consistency(m, {i, j, i + 1, j + 1}) == doctest::Approx(m.at(i, j)).epsilon(1e-12));
    }
  }
}

TEST_CASE("invalid blocks are rejected") {
  const RelationalMatrix m = RelationalMatrix::from_values(Grid(3, 3, 0.1), false);
  CHECK_THROWS_AS(block_consistency(m, {0, 0, 0, 2}), Error);  // empty rows
  CHECK_THROWS_AS(block_consistency(m, {0, 0, 4, 2}), Error);  // out of bounds
  CHECK_THROWS_AS(block_consistency(m, {-1, 0, 2, 2}), Error);
}

TEST_CASE("summed-area table equals direct summation on random instances") {
  auto rng = std::mt19937_64{11};
  std::uniform_int_distribution<int64_t> size(1, 12);
  for (int trial = 0; trial < 200; ++trial) {
    const int64_t t1 = size(rng);
    const int64_t t2 = size(rng);
    const RelationalMatrix m = testutil::random_relational(t1, t2, rng);

    std::uniform_int_distribution<int64_t> ri(0, t1 - 1), rj(0, t2 - 1);
    const int64_t a = ri(rng);
    const int64_t b = rj(rng);
    std::uniform_int_distribution<int64_t> rx(a + 1, t1), ry(b + 1, t2);
    const Block blk{a, b, rx(rng), ry(rng)};

    double direct = 0.0;
    for (int64_t i = blk.a; i < blk.x; ++i) {
      for (int64_t j = blk.b; j < blk.y; ++j) direct += m.at(i, j);
    }
    CHECK(m.block_sum(blk) == doctest::Approx(direct).epsilon(1e-9));
    CHECK(block_consistency(m, blk) ==
          doctest::Approx(direct / static_cast<double>(blk.area())).epsilon(1e-9));

    // prefix sums reproduce direct rectangle sums from the origin
    double origin = 0.0;
    for (int64_t i = 0; i < blk.x; ++i) {
      for (int64_t j = 0; j < blk.y; ++j) origin += m.at(i, j);
    }
    CHECK(m.prefix_sum(blk.x, blk.y) == doctest::Approx(origin).epsilon(1e-9));
  }
}

TEST_CASE("row-normalized construction enforces the row sums") {
  Grid bad(2, 2, 0.4);
  CHECK_THROWS_AS(RelationalMatrix::from_values(bad, true), Error);
  Grid negative(2, 2, 0.5);
  negative.at(0, 0) = -0.5;
  CHECK_THROWS_AS(RelationalMatrix::from_values(negative, false), Error);
}
