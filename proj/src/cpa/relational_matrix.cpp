#include "cpa/relational_matrix.hpp"

#include <cmath>
#include <string>

namespace cpa {

namespace {

Grid build_sat(const Grid& values) {
  Grid sat(values.rows + 1, values.cols + 1, 0.0);
  for (int64_t i = 0; i < values.rows; ++i) {
    double row_acc = 0.0;
    for (int64_t j = 0; j < values.cols; ++j) {
      row_acc += values.at(i, j);
      sat.at(i + 1, j + 1) = sat.at(i, j + 1) + row_acc;
    }
  }
  return sat;
}

}  // namespace

void softmax_rows(Grid& g) {
  for (int64_t i = 0; i < g.rows; ++i) {
    auto row = g.row(i);
    double mx = row[0];
    for (double v : row) mx = std::max(mx, v);
    double denom = 0.0;
    for (double& v : row) {
      v = std::exp(v - mx);
      denom += v;
    }
    for (double& v : row) v /= denom;
  }
}

RelationalMatrix RelationalMatrix::from_values(Grid values, bool row_normalized) {
  require(values.rows >= 1 && values.cols >= 1, ErrorCode::kInvalidArgument,
          "relational matrix must be non-empty");
  for (double v : values.data) {
    require(std::isfinite(v) && v >= 0.0, ErrorCode::kInvalidArgument,
            "relational matrix entries must be finite and non-negative");
  }
  if (row_normalized) {
    for (int64_t i = 0; i < values.rows; ++i) {
      double sum = 0.0;
      for (double v : values.row(i)) sum += v;
      require(std::abs(sum - 1.0) <= 1e-9, ErrorCode::kInvalidArgument,
              "row " + std::to_string(i) + " of a row-normalized matrix sums to " +
                  std::to_string(sum));
    }
  }
  RelationalMatrix m;
  m.sat_ = build_sat(values);
  m.values_ = std::move(values);
  m.row_normalized_ = row_normalized;
  return m;
}

void RelationalMatrix::check_block(const Block& blk) const {
  require(blk.a >= 0 && blk.b >= 0 && blk.a < blk.x && blk.b < blk.y && blk.x <= rows() &&
              blk.y <= cols(),
          ErrorCode::kInvalidArgument, "block out of bounds or empty");
}

double RelationalMatrix::block_sum(const Block& blk) const {
  check_block(blk);
  return sat_.at(blk.x, blk.y) - sat_.at(blk.a, blk.y) - sat_.at(blk.x, blk.b) +
         sat_.at(blk.a, blk.b);
}

RelationalMatrix compute_relational_matrix(const FeatureSequence& f1, const FeatureSequence& f2,
                                           bool normalize) {
  require(f1.dim() == f2.dim(), ErrorCode::kDimensionMismatch,
          "feature dimensions differ: " + std::to_string(f1.dim()) + " vs " +
              std::to_string(f2.dim()));
  const double scale = 1.0 / std::sqrt(static_cast<double>(f1.dim()));
  Grid logits(f1.frames(), f2.frames());
  for (int64_t i = 0; i < f1.frames(); ++i) {
    for (int64_t j = 0; j < f2.frames(); ++j) {
      logits.at(i, j) = dot(f1.frame(i), f2.frame(j)) * scale;
    }
  }
  if (normalize) {
    softmax_rows(logits);
    return RelationalMatrix::from_values(std::move(logits), true);
  }
  return RelationalMatrix::from_values(std::move(logits), false);
}

double block_consistency(const RelationalMatrix& m, const Block& blk) {
  return m.block_sum(blk) / static_cast<double>(blk.area());
}

}  // namespace cpa
