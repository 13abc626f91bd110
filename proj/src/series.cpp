#include "mvlstm/series.hpp"

#include <stdexcept>
#include <unordered_set>

namespace mvlstm {

void SeriesFrame::validate() const {
  if (columns.size() < 2) {
    throw std::invalid_argument("SeriesFrame: need at least one exogenous column and a target");
  }
  if (values.size() != columns.size()) {
    throw std::invalid_argument("SeriesFrame: column name/value count mismatch");
  }
  std::unordered_set<std::string> seen;
  for (const std::string& name : columns) {
    if (name.empty()) throw std::invalid_argument("SeriesFrame: empty column name");
    if (!seen.insert(name).second) {
      throw std::invalid_argument("SeriesFrame: duplicate column name '" + name + "'");
    }
  }
  const std::size_t rows = n_rows();
  for (const Vec& col : values) {
    if (col.size() != rows) {
      throw std::invalid_argument("SeriesFrame: columns have unequal lengths");
    }
  }
  if (!segment_of.empty() && segment_of.size() != rows) {
    throw std::invalid_argument("SeriesFrame: segment tags do not cover every row");
  }
  for (std::size_t i = 1; i < segment_of.size(); ++i) {
    if (segment_of[i] < segment_of[i - 1]) {
      throw std::invalid_argument("SeriesFrame: segment ids must be non-decreasing");
    }
  }
}

SeriesFrame SeriesFrame::from_columns(std::vector<std::string> names, std::vector<Vec> cols) {
  SeriesFrame frame;
  frame.columns = std::move(names);
  frame.values = std::move(cols);
  frame.segment_of.assign(frame.n_rows(), 0);
  frame.validate();
  return frame;
}

}  // namespace mvlstm
