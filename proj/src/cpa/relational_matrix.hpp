#pragma once

#include <cstdint>

#include "cpa/feature_sequence.hpp"
#include "cpa/grid.hpp"

namespace cpa {

// Rectangular region of a relational matrix, 0-based half-open on both axes:
// rows [a, x) of sequence-1 against columns [b, y) of sequence-2.
struct Block {
  int64_t a = 0;
  int64_t b = 0;
  int64_t x = 0;
  int64_t y = 0;

  int64_t row_span() const { return x - a; }
  int64_t col_span() const { return y - b; }
  int64_t area() const { return row_span() * col_span(); }
};

// Frame-wise similarity grid between two sequences plus a summed-area table
// for O(1) rectangle sums. Entries are non-negative; when `row_normalized`
// each row is a distribution over sequence-2 frames.
class RelationalMatrix {
 public:
  static RelationalMatrix from_values(Grid values, bool row_normalized);

  int64_t rows() const { return values_.rows; }
  int64_t cols() const { return values_.cols; }
  double at(int64_t i, int64_t j) const { return values_.at(i, j); }
  const Grid& values() const { return values_; }
  bool row_normalized() const { return row_normalized_; }

  // Sum of entries over the rectangle [0, i) x [0, j).
  double prefix_sum(int64_t i, int64_t j) const { return sat_.at(i, j); }

  // Sum of entries inside `blk` via the summed-area table.
  double block_sum(const Block& blk) const;

  void check_block(const Block& blk) const;

 private:
  RelationalMatrix() = default;

  Grid values_;
  Grid sat_;  // (rows+1) x (cols+1)
  bool row_normalized_ = false;
};

// Scaled-dot-product similarity between all frame pairs. With `normalize`
// each row is passed through a softmax over sequence-2 frames; the raw mode
// keeps the scaled products (they must be non-negative).
RelationalMatrix compute_relational_matrix(const FeatureSequence& f1, const FeatureSequence& f2,
                                           bool normalize = true);

// Mean of the matrix entries inside the block.
double block_consistency(const RelationalMatrix& m, const Block& blk);

// In-place row softmax with max subtraction.
void softmax_rows(Grid& g);

}  // namespace cpa
