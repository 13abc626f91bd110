#pragma once

#include <string>
#include <vector>

#include "mvlstm/cell.hpp"

namespace mvlstm {

struct AttentionOutput {
  Vec logits;        // e_n = tanh(w_e . h^n + b_e)
  Vec weights;       // alpha = softmax(e)
  Vec per_var_pred;  // q_n = w_out^n . h^n + b_out_n
  double prediction = 0.0;
};

// Variable-level attention over the final hidden tensor; the prediction is
// the alpha-weighted mixture of per-variable readouts.
AttentionOutput attention_forward(const MvLstmParams& params, const HiddenTensor& h_final);

struct VariableStats {
  std::size_t index = 0;
  std::string name;
  double mean_alpha = 0.0;
  double std_alpha = 0.0;
  std::vector<std::size_t> histogram;  // counts over equal-width bins on [0, 1]
};

// Variables sorted by empirical mean attention, descending; ties broken by
// variable index ascending.
std::vector<VariableStats> rank_variables(const std::vector<Vec>& weights_per_instance,
                                          const std::vector<std::string>& names,
                                          std::size_t bins = 20);

}  // namespace mvlstm
