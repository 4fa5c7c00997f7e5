#include "cpa/io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace cpa::io {

namespace {

double parse_field(const std::string& field, const std::string& path, size_t line_no) {
  size_t consumed = 0;
  double value = 0.0;
  try {
    value = std::stod(field, &consumed);
  } catch (const std::exception&) {
    fail(ErrorCode::kIo, path + ":" + std::to_string(line_no) + ": not a number: '" + field + "'");
  }
  // allow trailing whitespace only
  for (size_t i = consumed; i < field.size(); ++i) {
    require(std::isspace(static_cast<unsigned char>(field[i])), ErrorCode::kIo,
            path + ":" + std::to_string(line_no) + ": trailing junk in '" + field + "'");
  }
  require(std::isfinite(value), ErrorCode::kIo,
          path + ":" + std::to_string(line_no) + ": non-finite value");
  return value;
}

}  // namespace

FeatureSequence load_fseq_csv(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::kIo, "cannot open " + path);

  std::vector<double> data;
  int64_t dim = -1;
  int64_t frames = 0;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string field;
    int64_t cols = 0;
    while (std::getline(row, field, ',')) {
      data.push_back(parse_field(field, path, line_no));
      ++cols;
    }
    if (dim < 0) {
      dim = cols;
    } else {
      require(cols == dim, ErrorCode::kIo,
              path + ":" + std::to_string(line_no) + ": ragged row (" + std::to_string(cols) +
                  " fields, expected " + std::to_string(dim) + ")");
    }
    ++frames;
  }
  require(frames >= 1, ErrorCode::kIo, path + ": no rows");
  return FeatureSequence(std::move(data), frames, dim);
}

void save_fseq_csv(const FeatureSequence& f, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::kIo, "cannot write " + path);
  char buf[64];
  for (int64_t t = 0; t < f.frames(); ++t) {
    auto row = f.frame(t);
    for (int64_t c = 0; c < f.dim(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", row[static_cast<size_t>(c)]);
      out << buf << (c + 1 < f.dim() ? "," : "\n");
    }
  }
  require(out.good(), ErrorCode::kIo, "write failed: " + path);
}

void save_grid_csv(const Grid& g, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::kIo, "cannot write " + path);
  char buf[64];
  for (int64_t i = 0; i < g.rows; ++i) {
    for (int64_t j = 0; j < g.cols; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", g.at(i, j));
      out << buf << (j + 1 < g.cols ? "," : "\n");
    }
  }
  require(out.good(), ErrorCode::kIo, "write failed: " + path);
}

void save_grid_pgm(const Grid& g, const std::string& path) {
  require(g.rows >= 1 && g.cols >= 1, ErrorCode::kInvalidArgument, "empty grid");
  double mx = 0.0;
  for (double v : g.data) {
    require(std::isfinite(v) && v >= 0.0, ErrorCode::kInvalidArgument,
            "heatmap entries must be finite and non-negative");
    mx = std::max(mx, v);
  }
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCode::kIo, "cannot write " + path);
  out << "P5\n" << g.cols << " " << g.rows << "\n255\n";
  for (double v : g.data) {
    const double scaled = mx > 0.0 ? v / mx * 255.0 : 0.0;
    out.put(static_cast<char>(static_cast<unsigned char>(std::lround(scaled))));
  }
  require(out.good(), ErrorCode::kIo, "write failed: " + path);
}

}  // namespace cpa::io
