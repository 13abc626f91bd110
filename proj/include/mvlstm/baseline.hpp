#pragma once

#include "mvlstm/train.hpp"

namespace mvlstm {

// Predicts the next target value as the last observed one.
double persistence_forecast(const Matrix& window);

struct LinearArxModel {
  std::size_t lag = 0;
  Vec coef;  // intercept, then p lags of each column in order
};

// Feature row for a window: [1, col0 lag1..lagp, col1 lag1..lagp, ...].
Vec arx_features(const Matrix& window, std::size_t p);

LinearArxModel fit_linear_arx(const WindowedDataset& dataset, std::size_t p);
double predict_linear_arx(const LinearArxModel& model, const Matrix& window);

}  // namespace mvlstm
