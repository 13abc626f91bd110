#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mvlstm/cell.hpp"
#include "mvlstm/series.hpp"

namespace mvlstm {

struct Window {
  Matrix x;       // T x N, normalized
  double y = 0.0; // normalized one-step-ahead target

  bool operator==(const Window&) const = default;
};

struct NormStats {
  Vec mean;    // per column
  Vec stddev;  // per column, population convention

  bool operator==(const NormStats&) const = default;
};

struct SplitFractions {
  double train = 0.7;
  double val = 0.15;
  double test = 0.15;
};

struct WindowedDataset {
  std::vector<Window> train, val, test;
  NormStats stats;                   // computed from train rows only
  std::vector<std::string> columns;  // target last
  std::size_t window_len = 0;
};

// Chronological split (train, then val, then test), sliding windows with
// stride 1 that never straddle a split boundary or a segment gap, z-score
// normalization with train-split statistics applied to every split.
// `stats_override` normalizes with previously fitted statistics instead
// (used when evaluating against a saved model).
WindowedDataset make_windows(const SeriesFrame& frame, std::size_t t_window,
                             SplitFractions splits,
                             const std::optional<NormStats>& stats_override = std::nullopt);

struct TrainConfig {
  std::size_t window = 10;
  std::size_t per_var_dim = 4;
  double learning_rate = 1e-3;
  std::size_t batch_size = 64;
  std::size_t max_epochs = 500;
  std::size_t patience = 15;
  double clip_norm = 5.0;
  std::uint64_t seed = 0;
  SplitFractions splits{0.7, 0.15, 0.15};
  std::size_t threads = 1;  // 0 = all hardware threads

  void validate() const;
};

struct FitResult {
  MvLstmParams params;           // from the best validation epoch
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  std::size_t best_epoch = 0;    // index into the loss curves
  double test_rmse = 0.0;
  double test_mae = 0.0;
  std::vector<Vec> test_alphas;  // one attention vector per test window
};

// Adam on mean squared error with shuffled mini-batches, global-norm gradient
// clipping and early stopping on validation loss. Fully determined by
// (dataset, config), independent of the worker count.
FitResult fit(const WindowedDataset& dataset, const TrainConfig& config);

double rmse(const Vec& pred, const Vec& truth);
double mae(const Vec& pred, const Vec& truth);

}  // namespace mvlstm
