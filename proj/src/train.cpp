#include "mvlstm/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "mvlstm/grad.hpp"
#include "mvlstm/parallel.hpp"
#include "mvlstm/rng.hpp"

namespace mvlstm {

namespace {

void check_splits(const SplitFractions& s) {
  if (!(s.train > 0.0) || !(s.val > 0.0) || !(s.test > 0.0)) {
    throw std::invalid_argument("splits: every fraction must be positive");
  }
  if (std::abs(s.train + s.val + s.test - 1.0) > 1e-9) {
    throw std::invalid_argument("splits: fractions must sum to 1");
  }
}

struct SplitRange {
  const char* name;
  std::size_t lo, hi;  // row range [lo, hi)
};

std::vector<Window> windows_in_range(const SeriesFrame& frame, const NormStats& stats,
                                     std::size_t t_window, std::size_t lo, std::size_t hi) {
  std::vector<Window> out;
  const std::size_t n_cols = frame.n_cols();
  if (hi - lo <= t_window) return out;
  for (std::size_t i = lo; i + t_window < hi; ++i) {
    // all rows i..i+T must share a segment; tags are non-decreasing
    if (!frame.segment_of.empty() &&
        frame.segment_of[i] != frame.segment_of[i + t_window]) {
      continue;
    }
    Window w;
    w.x = Matrix(t_window, n_cols);
    for (std::size_t r = 0; r < t_window; ++r) {
      for (std::size_t c = 0; c < n_cols; ++c) {
        w.x(r, c) = (frame.values[c][i + r] - stats.mean[c]) / stats.stddev[c];
      }
    }
    const std::size_t tgt = frame.target_index();
    w.y = (frame.values[tgt][i + t_window] - stats.mean[tgt]) / stats.stddev[tgt];
    out.push_back(std::move(w));
  }
  return out;
}

void adam_step(MvLstmParams& params, const ParamGrads& grads, MvLstmParams& m,
               MvLstmParams& v, std::size_t t, double lr) {
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(t));

  auto ps = param_spans(params);
  auto gs = param_spans(grads);
  auto ms = param_spans(m);
  auto vs = param_spans(v);
  for (std::size_t b = 0; b < ps.size(); ++b) {
    for (std::size_t k = 0; k < ps[b].size(); ++k) {
      const double g = gs[b][k];
      ms[b][k] = kBeta1 * ms[b][k] + (1.0 - kBeta1) * g;
      vs[b][k] = kBeta2 * vs[b][k] + (1.0 - kBeta2) * g * g;
      const double m_hat = ms[b][k] / bc1;
      const double v_hat = vs[b][k] / bc2;
      ps[b][k] -= lr * m_hat / (std::sqrt(v_hat) + kEps);
    }
  }
}

}  // namespace

WindowedDataset make_windows(const SeriesFrame& frame, std::size_t t_window,
                             SplitFractions splits,
                             const std::optional<NormStats>& stats_override) {
  frame.validate();
  check_splits(splits);
  if (t_window < 1) throw std::invalid_argument("make_windows: window must be >= 1");
  const std::size_t rows = frame.n_rows();
  if (rows < t_window + 1) {
    throw std::invalid_argument("make_windows: " + std::to_string(rows) +
                                " rows cannot fit a window of " + std::to_string(t_window) +
                                " plus a target; need more rows");
  }

  const std::size_t n_train = static_cast<std::size_t>(
      std::floor(static_cast<double>(rows) * splits.train));
  const std::size_t n_val = static_cast<std::size_t>(
      std::floor(static_cast<double>(rows) * splits.val));
  const std::size_t n_test = rows - n_train - n_val;

  NormStats stats;
  if (stats_override.has_value()) {
    stats = *stats_override;
    if (stats.mean.size() != frame.n_cols() || stats.stddev.size() != frame.n_cols()) {
      throw std::invalid_argument("make_windows: override stats do not match column count");
    }
    for (double s : stats.stddev) {
      if (!(s > 0.0)) throw std::invalid_argument("make_windows: override stddev must be positive");
    }
  } else {
    if (n_train == 0) throw std::invalid_argument("make_windows: train split has no rows");
    stats.mean.resize(frame.n_cols());
    stats.stddev.resize(frame.n_cols());
    for (std::size_t c = 0; c < frame.n_cols(); ++c) {
      const Vec& col = frame.values[c];
      double sum = 0.0;
      for (std::size_t i = 0; i < n_train; ++i) sum += col[i];
      const double mean = sum / static_cast<double>(n_train);
      double sq = 0.0;
      for (std::size_t i = 0; i < n_train; ++i) {
        const double dev = col[i] - mean;
        sq += dev * dev;
      }
      const double sd = std::sqrt(sq / static_cast<double>(n_train));
      if (!(sd > 1e-12)) {
        throw std::invalid_argument("make_windows: column '" + frame.columns[c] +
                                    "' is constant over the train split");
      }
      stats.mean[c] = mean;
      stats.stddev[c] = sd;
    }
  }

  WindowedDataset ds;
  ds.stats = stats;
  ds.columns = frame.columns;
  ds.window_len = t_window;

  const SplitRange ranges[3] = {{"train", 0, n_train},
                                {"val", n_train, n_train + n_val},
                                {"test", n_train + n_val, rows}};
  std::vector<Window>* dests[3] = {&ds.train, &ds.val, &ds.test};
  for (int s = 0; s < 3; ++s) {
    *dests[s] = windows_in_range(frame, stats, t_window, ranges[s].lo, ranges[s].hi);
    if (dests[s]->empty()) {
      throw std::invalid_argument(
          "make_windows: " + std::string(ranges[s].name) + " split has " +
          std::to_string(ranges[s].hi - ranges[s].lo) + " rows and yields no window of " +
          std::to_string(t_window) + " plus a target; need more rows");
    }
  }
  (void)n_test;
  return ds;
}

void TrainConfig::validate() const {
  if (window < 1 || per_var_dim < 1 || batch_size < 1 || max_epochs < 1 || patience < 1) {
    throw std::invalid_argument("TrainConfig: counts must be positive");
  }
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("TrainConfig: learning rate must be finite and >= 0");
  }
  if (!(clip_norm > 0.0)) {
    throw std::invalid_argument("TrainConfig: clip norm must be positive");
  }
  check_splits(splits);
}

FitResult fit(const WindowedDataset& dataset, const TrainConfig& config) {
  config.validate();
  if (dataset.train.empty()) throw std::invalid_argument("fit: train split is empty");
  if (dataset.val.empty()) throw std::invalid_argument("fit: val split is empty");
  if (config.window != dataset.window_len) {
    throw std::invalid_argument("fit: config window " + std::to_string(config.window) +
                                " does not match dataset windows of " +
                                std::to_string(dataset.window_len));
  }

  const std::size_t n_vars = dataset.columns.size();
  const CellShape shape{n_vars, config.per_var_dim, dataset.window_len};
  shape.validate();

  MvLstmParams params = MvLstmParams::random(shape, config.seed);
  MvLstmParams adam_m = MvLstmParams::zeros(shape);
  MvLstmParams adam_v = MvLstmParams::zeros(shape);
  std::size_t adam_t = 0;

  const std::size_t n_train = dataset.train.size();
  Rng shuffle_rng(config.seed ^ 0xD1B54A32D192ED03ULL);
  std::vector<std::size_t> order(n_train);
  std::iota(order.begin(), order.end(), 0);

  FitResult result;
  result.params = params;
  double best_val = std::numeric_limits<double>::infinity();
  std::size_t bad_epochs = 0;

  std::vector<double> instance_loss(n_train, 0.0);
  std::vector<BackwardResult> slots(std::min(config.batch_size, n_train));

  for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    shuffle_rng.shuffle(order);

    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < n_train; start += config.batch_size, ++batch_index) {
      const std::size_t batch_n = std::min(config.batch_size, n_train - start);
      const std::string where =
          "epoch " + std::to_string(epoch) + " batch " + std::to_string(batch_index);
      try {
        parallel_for(batch_n, config.threads, [&](std::size_t b) {
          const Window& w = dataset.train[order[start + b]];
          ForwardResult fwd = network_forward(params, w.x);
          slots[b] = backward(params, fwd.tape, w.y);
        });
      } catch (const std::runtime_error& e) {
        throw std::runtime_error("fit: " + where + ": " + e.what());
      }

      ParamGrads grads = MvLstmParams::zeros(shape);
      for (std::size_t b = 0; b < batch_n; ++b) {
        if (!std::isfinite(slots[b].loss)) {
          throw std::runtime_error("fit: non-finite loss at " + where);
        }
        instance_loss[order[start + b]] = slots[b].loss;
        add_scaled(grads, slots[b].grads, 1.0 / static_cast<double>(batch_n));
      }

      const double norm = std::sqrt(squared_norm(grads));
      if (norm > config.clip_norm) {
        scale_params(grads, config.clip_norm / norm);
      }
      adam_step(params, grads, adam_m, adam_v, ++adam_t, config.learning_rate);
    }

    // summed in instance order so the value is independent of the shuffle
    double train_sum = 0.0;
    for (double l : instance_loss) train_sum += l;
    result.train_loss.push_back(train_sum / static_cast<double>(n_train));

    double val_sum = 0.0;
    for (const Window& w : dataset.val) {
      const double r = forward_predict(params, w.x) - w.y;
      val_sum += r * r;
    }
    const double val = val_sum / static_cast<double>(dataset.val.size());
    if (!std::isfinite(val)) {
      throw std::runtime_error("fit: non-finite validation loss at epoch " +
                               std::to_string(epoch));
    }
    result.val_loss.push_back(val);

    if (val < best_val) {
      best_val = val;
      result.params = params;
      result.best_epoch = epoch;
      bad_epochs = 0;
    } else {
      ++bad_epochs;
      if (bad_epochs >= config.patience) break;
    }
  }

  Vec preds, truth;
  preds.reserve(dataset.test.size());
  truth.reserve(dataset.test.size());
  result.test_alphas.reserve(dataset.test.size());
  for (const Window& w : dataset.test) {
    ForwardResult fwd = network_forward(result.params, w.x);
    preds.push_back(fwd.prediction);
    truth.push_back(w.y);
    result.test_alphas.push_back(std::move(fwd.alpha));
  }
  result.test_rmse = preds.empty() ? 0.0 : rmse(preds, truth);
  result.test_mae = preds.empty() ? 0.0 : mae(preds, truth);
  return result;
}

double rmse(const Vec& pred, const Vec& truth) {
  if (pred.empty() || pred.size() != truth.size()) {
    throw std::invalid_argument("rmse: inputs must be nonempty and equal length");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double r = pred[i] - truth[i];
    acc += r * r;
  }
  return std::sqrt(acc / static_cast<double>(pred.size()));
}

double mae(const Vec& pred, const Vec& truth) {
  if (pred.empty() || pred.size() != truth.size()) {
    throw std::invalid_argument("mae: inputs must be nonempty and equal length");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    acc += std::abs(pred[i] - truth[i]);
  }
  return acc / static_cast<double>(pred.size());
}

}  // namespace mvlstm
