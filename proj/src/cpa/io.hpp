#pragma once

#include <string>

#include "cpa/feature_sequence.hpp"
#include "cpa/grid.hpp"

namespace cpa::io {

// fseq-csv: headerless CSV, one frame per row, d decimal floats per row.
// Ragged or non-numeric rows are rejected.
FeatureSequence load_fseq_csv(const std::string& path);
void save_fseq_csv(const FeatureSequence& f, const std::string& path);

void save_grid_csv(const Grid& g, const std::string& path);

// Binary 8-bit PGM with values scaled by the grid maximum.
void save_grid_pgm(const Grid& g, const std::string& path);

}  // namespace cpa::io
