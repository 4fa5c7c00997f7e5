#include "cpa/step_mining.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cpa/rng.hpp"

namespace cpa {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

std::vector<std::pair<int64_t, int64_t>> BlockPartition::intervals(int side) const {
  require(side == 1 || side == 2, ErrorCode::kInvalidArgument, "side must be 1 or 2");
  std::vector<std::pair<int64_t, int64_t>> out;
  out.reserve(blocks.size());
  for (const Block& blk : blocks) {
    if (side == 1) {
      out.emplace_back(blk.a, blk.x);
    } else {
      out.emplace_back(blk.b, blk.y);
    }
  }
  return out;
}

std::vector<int64_t> BlockPartition::boundaries(int side) const {
  std::vector<int64_t> out;
  out.reserve(blocks.size());
  for (const auto& [start, end] : intervals(side)) {
    (void)start;
    out.push_back(end);
  }
  return out;
}

void BlockPartition::validate(int64_t t1, int64_t t2) const {
  require(!blocks.empty(), ErrorCode::kInvalidArgument, "partition has no blocks");
  require(blocks.front().a == 0 && blocks.front().b == 0, ErrorCode::kInvalidArgument,
          "partition must start at the origin");
  for (size_t i = 0; i < blocks.size(); ++i) {
    const Block& blk = blocks[i];
    require(blk.a < blk.x && blk.b < blk.y, ErrorCode::kInvalidArgument,
            "partition block is empty on one side");
    if (i + 1 < blocks.size()) {
      require(blocks[i + 1].a == blk.x && blocks[i + 1].b == blk.y, ErrorCode::kInvalidArgument,
              "partition blocks do not chain");
    }
  }
  require(blocks.back().x == t1 && blocks.back().y == t2, ErrorCode::kInvalidArgument,
          "partition does not cover the full matrix");
}

CsmTables::CsmTables(int64_t t1, int64_t t2, int64_t k_max)
    : t1_(t1),
      t2_(t2),
      k_max_(k_max),
      scores_(static_cast<size_t>(k_max * (t1 + 1) * (t2 + 1)), kNegInf),
      preds_(static_cast<size_t>(k_max * (t1 + 1) * (t2 + 1)), {-1, -1}) {}

CsmTables dynamic_procedure_matching(const RelationalMatrix& m, int64_t k) {
  const int64_t t1 = m.rows();
  const int64_t t2 = m.cols();
  require(k >= 1 && k <= std::min(t1, t2), ErrorCode::kInvalidArgument,
          "step count " + std::to_string(k) + " out of range for a " + std::to_string(t1) + "x" +
              std::to_string(t2) + " matrix");

  CsmTables tables(t1, t2, k);

  // One block: consistency of the leading rectangle.
  for (int64_t i = 1; i <= t1; ++i) {
    for (int64_t j = 1; j <= t2; ++j) {
      tables.set(i, j, 1, block_consistency(m, {0, 0, i, j}), {0, 0});
    }
  }

  // Extend by one block at a time. A state (i, j, step) needs at least `step`
  // frames on each side; the predecessor corner (a, b) must leave a non-empty
  // final block and be reachable with step-1 blocks.
  for (int64_t step = 2; step <= k; ++step) {
    for (int64_t i = step; i <= t1; ++i) {
      for (int64_t j = step; j <= t2; ++j) {
        double best = kNegInf;
        std::pair<int32_t, int32_t> best_pred = {-1, -1};
        for (int64_t a = step - 1; a < i; ++a) {
          for (int64_t b = step - 1; b < j; ++b) {
            const double prev = tables.score_at(a, b, step - 1);
            if (prev == kNegInf) continue;
            const double cand = prev + block_consistency(m, {a, b, i, j});
            if (cand > best) {
              best = cand;
              best_pred = {static_cast<int32_t>(a), static_cast<int32_t>(b)};
            }
          }
        }
        tables.set(i, j, step, best, best_pred);
      }
    }
  }
  return tables;
}

BlockPartition backtrace(const RelationalMatrix& m, const CsmTables& tables, int64_t k) {
  require(k >= 1 && k <= tables.k_max(), ErrorCode::kInvalidArgument,
          "backtrace step count exceeds the table");
  const int64_t t1 = tables.t1();
  const int64_t t2 = tables.t2();
  require(t1 == m.rows() && t2 == m.cols(), ErrorCode::kDimensionMismatch,
          "tables were built for a different matrix shape");

  std::vector<Block> reversed;
  int64_t i = t1;
  int64_t j = t2;
  for (int64_t step = k; step >= 1; --step) {
    require(tables.score_at(i, j, step) != kNegInf, ErrorCode::kNumeric,
            "backtrace reached an unreachable state");
    const auto [a, b] = tables.pred_at(i, j, step);
    require(a >= 0 && b >= 0 && a < i && b < j, ErrorCode::kNumeric,
            "corrupt index table: predecessor does not strictly decrease");
    reversed.push_back({a, b, i, j});
    i = a;
    j = b;
  }
  require(i == 0 && j == 0, ErrorCode::kNumeric, "corrupt index table: backtrace missed origin");

  BlockPartition partition;
  partition.blocks.assign(reversed.rbegin(), reversed.rend());
  double total = 0.0;
  for (const Block& blk : partition.blocks) total += block_consistency(m, blk);
  partition.score = total;
  partition.validate(t1, t2);

  const double table_score = tables.score_at(t1, t2, k);
  require(std::abs(total - table_score) <= 1e-9, ErrorCode::kNumeric,
          "backtraced score disagrees with the forward table");
  return partition;
}

StepFeatures sample_step_features(const FeatureSequence& f, const BlockPartition& partition,
                                  int side, SamplePolicy policy, uint64_t seed) {
  const auto intervals = partition.intervals(side);
  require(!intervals.empty() && intervals.front().first == 0 &&
              intervals.back().second == f.frames(),
          ErrorCode::kDimensionMismatch, "partition does not tile this sequence");

  StepFeatures out;
  out.policy = policy;
  out.steps = Grid(partition.step_count(), f.dim());
  out.source_frames.assign(intervals.size(), -1);

  auto rng = make_rng(seed);
  for (size_t s = 0; s < intervals.size(); ++s) {
    const auto [start, end] = intervals[s];
    switch (policy) {
      case SamplePolicy::kMidpoint: {
        const int64_t t = (start + end - 1) / 2;
        out.source_frames[s] = t;
        auto src = f.frame(t);
        std::copy(src.begin(), src.end(), out.steps.row(static_cast<int64_t>(s)).begin());
        break;
      }
      case SamplePolicy::kSeededRandom: {
        const int64_t t = start + uniform_index(rng, end - start);
        out.source_frames[s] = t;
        auto src = f.frame(t);
        std::copy(src.begin(), src.end(), out.steps.row(static_cast<int64_t>(s)).begin());
        break;
      }
      case SamplePolicy::kMean: {
        auto dst = out.steps.row(static_cast<int64_t>(s));
        for (int64_t t = start; t < end; ++t) {
          auto src = f.frame(t);
          for (int64_t c = 0; c < f.dim(); ++c) dst[static_cast<size_t>(c)] += src[c];
        }
        const double inv = 1.0 / static_cast<double>(end - start);
        for (double& v : dst) v *= inv;
        break;
      }
    }
  }
  return out;
}

MiningResult collaborative_step_mining(const FeatureSequence& f1, const FeatureSequence& f2,
                                       int64_t k, SamplePolicy policy, uint64_t seed) {
  RelationalMatrix m = compute_relational_matrix(f1, f2);
  CsmTables tables = dynamic_procedure_matching(m, k);
  BlockPartition partition = backtrace(m, tables, k);
  StepFeatures s1 = sample_step_features(f1, partition, 1, policy, seed);
  StepFeatures s2 = sample_step_features(f2, partition, 2, policy, seed + 1);
  return MiningResult{std::move(m), std::move(partition), std::move(s1), std::move(s2)};
}

}  // namespace cpa
