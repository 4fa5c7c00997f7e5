#pragma once

#include <cstdint>
#include <span>

#include "cpa/grid.hpp"

namespace cpa {

// ROC-AUC by exhaustive positive x negative counting, ties credited 0.5.
// Distances are scores where smaller means more likely positive; labels are
// 1 for positive, 0 for negative. Both classes must be non-empty.
double pairwise_auc(std::span<const double> distances, std::span<const int32_t> labels);

// Mean intersection-over-union between predicted and ground-truth step
// intervals, both given as strictly increasing per-step end frames over
// [0, frames). Predictions with more steps than the ground truth are first
// merged into ground-truth-many contiguous groups of near-equal size.
double boundary_iou(std::span<const int64_t> predicted_ends, std::span<const int64_t> gt_ends,
                    int64_t frames);

// Mean silhouette over points (Euclidean metric). Singleton clusters and
// all-zero distances score 0 by convention. Needs at least two clusters.
double silhouette_score(const Grid& points, std::span<const int32_t> labels);

}  // namespace cpa
