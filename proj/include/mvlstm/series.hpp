#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mvlstm/linalg.hpp"

namespace mvlstm {

// In-memory multivariate time-series table, one value vector per column.
// The target series is always the last column; loaders reorder on ingest.
// Rows belong to contiguous segments: a gap left by dropped rows starts a
// new segment and windows never span one.
struct SeriesFrame {
  std::vector<std::string> columns;  // target last
  std::vector<Vec> values;           // per column, equal lengths
  std::vector<std::size_t> segment_of;  // per row, non-decreasing

  std::size_t n_rows() const { return values.empty() ? 0 : values[0].size(); }
  std::size_t n_cols() const { return columns.size(); }
  std::size_t target_index() const { return columns.size() - 1; }
  const std::string& target_name() const { return columns.back(); }

  void validate() const;

  static SeriesFrame from_columns(std::vector<std::string> names, std::vector<Vec> cols);
};

}  // namespace mvlstm
