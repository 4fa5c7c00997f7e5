#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cpa/error.hpp"

namespace cpa {

// Dense row-major matrix of doubles. The workhorse container for relational
// matrices, probability grids, DP tables and encoder weights.
struct Grid {
  int64_t rows = 0;
  int64_t cols = 0;
  std::vector<double> data;

  Grid() = default;
  Grid(int64_t r, int64_t c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<size_t>(r * c), fill) {
    require(r >= 0 && c >= 0, ErrorCode::kInvalidArgument, "grid dimensions must be non-negative");
  }
  Grid(int64_t r, int64_t c, std::vector<double> values) : rows(r), cols(c), data(std::move(values)) {
    require(static_cast<int64_t>(data.size()) == r * c, ErrorCode::kInvalidArgument,
            "grid data size does not match dimensions");
  }

  double& at(int64_t i, int64_t j) { return data[static_cast<size_t>(i * cols + j)]; }
  double at(int64_t i, int64_t j) const { return data[static_cast<size_t>(i * cols + j)]; }

  std::span<const double> row(int64_t i) const {
    return {data.data() + i * cols, static_cast<size_t>(cols)};
  }
  std::span<double> row(int64_t i) {
    return {data.data() + i * cols, static_cast<size_t>(cols)};
  }

  bool same_shape(const Grid& other) const { return rows == other.rows && cols == other.cols; }
};

}  // namespace cpa
