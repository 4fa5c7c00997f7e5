#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cpa/error.hpp"

namespace cpa {

// A length-T sequence of d-dimensional feature vectors. Stands in for the
// frame-level output of an upstream video encoder; this library never touches
// raw video.
class FeatureSequence {
 public:
  // `data` is row-major, frames x dim. Every entry must be finite.
  FeatureSequence(std::vector<double> data, int64_t frames, int64_t dim);

  int64_t frames() const { return frames_; }
  int64_t dim() const { return dim_; }

  std::span<const double> frame(int64_t t) const {
    return {data_.data() + t * dim_, static_cast<size_t>(dim_)};
  }

  const std::vector<double>& data() const { return data_; }

 private:
  std::vector<double> data_;
  int64_t frames_ = 0;
  int64_t dim_ = 0;
};

double dot(std::span<const double> a, std::span<const double> b);

}  // namespace cpa
