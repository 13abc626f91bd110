#include "mvlstm/baseline.hpp"

#include <stdexcept>
#include <string>

#include "mvlstm/granger.hpp"

namespace mvlstm {

double persistence_forecast(const Matrix& window) {
  if (window.rows == 0 || window.cols == 0) {
    throw std::invalid_argument("persistence_forecast: empty window");
  }
  return window(window.rows - 1, window.cols - 1);
}

Vec arx_features(const Matrix& window, std::size_t p) {
  if (p < 1) throw std::invalid_argument("arx_features: lag order must be >= 1");
  if (window.rows < p) {
    throw std::invalid_argument("arx_features: window of " + std::to_string(window.rows) +
                                " rows cannot provide " + std::to_string(p) + " lags");
  }
  Vec row;
  row.reserve(1 + p * window.cols);
  row.push_back(1.0);
  for (std::size_t c = 0; c < window.cols; ++c) {
    for (std::size_t l = 1; l <= p; ++l) {
      row.push_back(window(window.rows - l, c));
    }
  }
  return row;
}

LinearArxModel fit_linear_arx(const WindowedDataset& dataset, std::size_t p) {
  if (dataset.train.empty()) {
    throw std::invalid_argument("fit_linear_arx: train split is empty");
  }
  const std::size_t n_cols = dataset.columns.size();
  const std::size_t n_features = 1 + p * n_cols;
  Matrix design(dataset.train.size(), n_features);
  Vec response(dataset.train.size());
  for (std::size_t i = 0; i < dataset.train.size(); ++i) {
    const Vec row = arx_features(dataset.train[i].x, p);
    for (std::size_t j = 0; j < n_features; ++j) design(i, j) = row[j];
    response[i] = dataset.train[i].y;
  }
  LinearArxModel model;
  model.lag = p;
  model.coef = ols(design, response).coef;
  return model;
}

double predict_linear_arx(const LinearArxModel& model, const Matrix& window) {
  const Vec row = arx_features(window, model.lag);
  if (row.size() != model.coef.size()) {
    throw std::invalid_argument("predict_linear_arx: window has " +
                                std::to_string(window.cols) + " columns, model expects " +
                                std::to_string((model.coef.size() - 1) / model.lag));
  }
  return dot(row, model.coef);
}

}  // namespace mvlstm
