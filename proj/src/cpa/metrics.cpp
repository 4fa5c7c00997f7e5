#include "cpa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "cpa/error.hpp"

namespace cpa {

double pairwise_auc(std::span<const double> distances, std::span<const int32_t> labels) {
  require(distances.size() == labels.size(), ErrorCode::kInvalidArgument,
          "distances and labels differ in length");
  std::vector<double> pos, neg;
  for (size_t i = 0; i < distances.size(); ++i) {
    require(std::isfinite(distances[i]), ErrorCode::kInvalidArgument,
            "distances must be finite");
    (labels[i] == 1 ? pos : neg).push_back(distances[i]);
  }
  require(!pos.empty() && !neg.empty(), ErrorCode::kInvalidArgument,
          "AUC undefined: need both positive and negative pairs");
  double credit = 0.0;
  for (double dp : pos) {
    for (double dn : neg) {
      if (dn > dp) {
        credit += 1.0;
      } else if (dn == dp) {
        credit += 0.5;
      }
    }
  }
  return credit / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

namespace {

using Interval = std::pair<int64_t, int64_t>;

std::vector<Interval> ends_to_intervals(std::span<const int64_t> ends, int64_t frames) {
  require(!ends.empty(), ErrorCode::kInvalidArgument, "empty segmentation");
  std::vector<Interval> out;
  int64_t start = 0;
  for (int64_t end : ends) {
    require(end > start, ErrorCode::kInvalidArgument,
            "segment ends must be strictly increasing");
    out.emplace_back(start, end);
    start = end;
  }
  require(start == frames, ErrorCode::kInvalidArgument,
          "segmentation does not tile [0, " + std::to_string(frames) + ")");
  return out;
}

// Merge n intervals into m <= n contiguous groups with sizes as equal as
// possible (the first n % m groups take one extra interval).
std::vector<Interval> uniform_merge(const std::vector<Interval>& intervals, int64_t target) {
  const int64_t n = static_cast<int64_t>(intervals.size());
  std::vector<Interval> out;
  const int64_t base = n / target;
  const int64_t extra = n % target;
  int64_t idx = 0;
  for (int64_t g = 0; g < target; ++g) {
    const int64_t take = base + (g < extra ? 1 : 0);
    out.emplace_back(intervals[static_cast<size_t>(idx)].first,
                     intervals[static_cast<size_t>(idx + take - 1)].second);
    idx += take;
  }
  return out;
}

double interval_iou(const Interval& a, const Interval& b) {
  const int64_t inter = std::max<int64_t>(0, std::min(a.second, b.second) - std::max(a.first, b.first));
  const int64_t uni = (a.second - a.first) + (b.second - b.first) - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace

double boundary_iou(std::span<const int64_t> predicted_ends, std::span<const int64_t> gt_ends,
                    int64_t frames) {
  std::vector<Interval> pred = ends_to_intervals(predicted_ends, frames);
  const std::vector<Interval> gt = ends_to_intervals(gt_ends, frames);
  require(pred.size() >= gt.size(), ErrorCode::kInvalidArgument,
          "prediction has fewer steps than the ground truth; cannot merge upward");
  if (pred.size() > gt.size()) {
    pred = uniform_merge(pred, static_cast<int64_t>(gt.size()));
  }
  double acc = 0.0;
  for (size_t s = 0; s < gt.size(); ++s) acc += interval_iou(pred[s], gt[s]);
  return acc / static_cast<double>(gt.size());
}

double silhouette_score(const Grid& points, std::span<const int32_t> labels) {
  require(points.rows == static_cast<int64_t>(labels.size()), ErrorCode::kInvalidArgument,
          "labels must match points");
  std::set<int32_t> distinct(labels.begin(), labels.end());
  require(distinct.size() >= 2, ErrorCode::kInvalidArgument,
          "silhouette needs at least two clusters");

  const int64_t n = points.rows;
  auto distance = [&points](int64_t i, int64_t j) {
    double sq = 0.0;
    for (int64_t c = 0; c < points.cols; ++c) {
      const double diff = points.at(i, c) - points.at(j, c);
      sq += diff * diff;
    }
    return std::sqrt(sq);
  };

  double total = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    double intra_sum = 0.0;
    int64_t intra_count = 0;
    // mean distance to each other cluster, tracked per label
    double best_other = std::numeric_limits<double>::infinity();
    for (int32_t other : distinct) {
      if (other == labels[static_cast<size_t>(i)]) continue;
      double sum = 0.0;
      int64_t count = 0;
      for (int64_t j = 0; j < n; ++j) {
        if (labels[static_cast<size_t>(j)] != other) continue;
        sum += distance(i, j);
        ++count;
      }
      best_other = std::min(best_other, sum / static_cast<double>(count));
    }
    for (int64_t j = 0; j < n; ++j) {
      if (j == i || labels[static_cast<size_t>(j)] != labels[static_cast<size_t>(i)]) continue;
      intra_sum += distance(i, j);
      ++intra_count;
    }
    if (intra_count == 0) {
      continue;  // singleton cluster scores 0
    }
    const double a = intra_sum / static_cast<double>(intra_count);
    const double b = best_other;
    const double denom = std::max(a, b);
    total += denom > 0.0 ? (b - a) / denom : 0.0;
  }
  return total / static_cast<double>(n);
}

}  // namespace cpa
