#include "mvlstm/attention.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mvlstm {

AttentionOutput attention_forward(const MvLstmParams& params, const HiddenTensor& h_final) {
  const CellShape& shape = params.shape;
  if (h_final.n_vars != shape.n_vars || h_final.per_var_dim != shape.per_var_dim) {
    throw std::invalid_argument("attention_forward: hidden tensor shape mismatch");
  }

  const std::size_t n_vars = shape.n_vars;
  const std::size_t d = shape.per_var_dim;
  AttentionOutput out;
  out.logits.resize(n_vars);
  out.per_var_pred.resize(n_vars);
  for (std::size_t n = 0; n < n_vars; ++n) {
    auto h = h_final.block(n);
    double score = params.b_e;
    double pred = params.b_out[n];
    for (std::size_t k = 0; k < d; ++k) {
      score += params.w_e[k] * h[k];
      pred += params.w_out(n, k) * h[k];
    }
    out.logits[n] = std::tanh(score);
    out.per_var_pred[n] = pred;
  }
  out.weights = softmax(out.logits);
  out.prediction = dot(out.weights, out.per_var_pred);
  return out;
}

std::vector<VariableStats> rank_variables(const std::vector<Vec>& weights_per_instance,
                                          const std::vector<std::string>& names,
                                          std::size_t bins) {
  if (weights_per_instance.empty()) {
    throw std::invalid_argument("rank_variables: no attention instances");
  }
  if (bins == 0) {
    throw std::invalid_argument("rank_variables: bins must be >= 1");
  }
  const std::size_t n_vars = names.size();
  for (const Vec& w : weights_per_instance) {
    if (w.size() != n_vars) {
      throw std::invalid_argument("rank_variables: instance length " +
                                  std::to_string(w.size()) + " does not match " +
                                  std::to_string(n_vars) + " variable names");
    }
  }

  const double count = static_cast<double>(weights_per_instance.size());
  std::vector<VariableStats> stats(n_vars);
  for (std::size_t n = 0; n < n_vars; ++n) {
    VariableStats& s = stats[n];
    s.index = n;
    s.name = names[n];
    s.histogram.assign(bins, 0);
    double sum = 0.0;
    for (const Vec& w : weights_per_instance) sum += w[n];
    s.mean_alpha = sum / count;
    double sq = 0.0;
    for (const Vec& w : weights_per_instance) {
      const double dev = w[n] - s.mean_alpha;
      sq += dev * dev;
      double a = std::clamp(w[n], 0.0, 1.0);
      std::size_t bin = std::min(static_cast<std::size_t>(a * static_cast<double>(bins)),
                                 bins - 1);
      ++s.histogram[bin];
    }
    s.std_alpha = std::sqrt(sq / count);
  }

  std::stable_sort(stats.begin(), stats.end(), [](const VariableStats& a, const VariableStats& b) {
    if (a.mean_alpha != b.mean_alpha) return a.mean_alpha > b.mean_alpha;
    return a.index < b.index;
  });
  return stats;
}

}  // namespace mvlstm
