#include "cpa/feature_sequence.hpp"

#include <cmath>

namespace cpa {

FeatureSequence::FeatureSequence(std::vector<double> data, int64_t frames, int64_t dim)
    : data_(std::move(data)), frames_(frames), dim_(dim) {
  require(frames_ >= 1, ErrorCode::kInvalidArgument, "feature sequence needs at least one frame");
  require(dim_ >= 1, ErrorCode::kInvalidArgument, "feature dimension must be positive");
  require(static_cast<int64_t>(data_.size()) == frames_ * dim_, ErrorCode::kInvalidArgument,
          "feature data size does not match frames x dim");
  for (double v : data_) {
    require(std::isfinite(v), ErrorCode::kInvalidArgument, "feature entries must be finite");
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace cpa
