#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mvlstm/linalg.hpp"

namespace mvlstm {

// Network dimensions: N input variables (exogenous + target, target last),
// d hidden units reserved per variable, window length T. The recurrent layer
// is M = N*d wide.
struct CellShape {
  std::size_t n_vars = 0;
  std::size_t per_var_dim = 0;
  std::size_t window = 0;

  std::size_t flat_dim() const { return n_vars * per_var_dim; }
  std::size_t gate_rows() const { return 3 * flat_dim(); }
  std::size_t gate_cols() const { return n_vars + flat_dim(); }

  void validate() const;
  bool operator==(const CellShape&) const = default;
};

// Hidden state organized as N blocks of d values; block n holds the
// representation owned by variable n. Flattening concatenates blocks in
// variable order.
struct HiddenTensor {
  std::size_t n_vars = 0;
  std::size_t per_var_dim = 0;
  Vec data;

  HiddenTensor() = default;
  HiddenTensor(std::size_t n, std::size_t d)
      : n_vars(n), per_var_dim(d), data(n * d, 0.0) {}

  std::span<double> block(std::size_t n) {
    return {data.data() + n * per_var_dim, per_var_dim};
  }
  std::span<const double> block(std::size_t n) const {
    return {data.data() + n * per_var_dim, per_var_dim};
  }

  Vec flatten() const { return data; }
  static HiddenTensor unflatten(std::size_t n, std::size_t d, const Vec& flat);
};

// All trainable weights. The candidate path is per-variable (w_x, w_h, b_j);
// the gates mix every variable; the attention head scores each variable's
// final hidden block with a shared w_e and reads it out with a per-variable
// w_out row.
struct MvLstmParams {
  CellShape shape;
  Matrix w_x;                 // N x d, row n is the input weight for variable n
  std::vector<Matrix> w_h;    // N matrices, each d x d
  Vec b_j;                    // M, candidate bias in variable-block order
  Matrix w_gates;             // 3M x (N + M), rows ordered [i; f; o]
  Vec b_gates;                // 3M
  Vec w_e;                    // d, shared attention scorer
  double b_e = 0.0;
  Matrix w_out;               // N x d, row n is variable n's readout
  Vec b_out;                  // N

  static MvLstmParams zeros(const CellShape& shape);
  // Uniform init scaled by fan-in; forget-gate bias starts at 1.
  static MvLstmParams random(const CellShape& shape, std::uint64_t seed);

  std::size_t count() const;
  void validate() const;
};

// Parameter buffers in canonical order: w_x, w_h[0..N-1], b_j, w_gates,
// b_gates, w_e, b_e, w_out, b_out. This order is shared by the optimizer,
// the finite-difference checker, and the model file.
std::vector<std::span<double>> param_spans(MvLstmParams& p);
std::vector<std::span<const double>> param_spans(const MvLstmParams& p);
std::vector<std::string> param_block_names(const CellShape& shape);

Vec to_flat(const MvLstmParams& p);
void from_flat(MvLstmParams& p, const Vec& flat);
void add_scaled(MvLstmParams& dst, const MvLstmParams& src, double s);
void scale_params(MvLstmParams& p, double s);
double squared_norm(const MvLstmParams& p);

// Everything the backward pass needs, recorded during the forward pass.
struct TapeStep {
  Vec x;       // N
  Vec gate_i;  // M
  Vec gate_f;  // M
  Vec gate_o;  // M
  Vec j;       // M, flattened candidate tensor
  Vec c;       // M
  Vec h;       // M
};

struct ForwardTape {
  CellShape shape;
  std::vector<TapeStep> steps;
  Vec logits;        // N
  Vec alpha;         // N
  Vec per_var_pred;  // N
  double prediction = 0.0;
};

struct Gates {
  Vec i, f, o;
};

// Candidate update: block n = tanh(W_h^n h_prev^n + w_x^n x_n + b_j^n).
// Block n never reads another variable's input or hidden block.
HiddenTensor cell_candidate(const MvLstmParams& params, const HiddenTensor& h_prev,
                            const Vec& x_t);

// Input/forget/output gates from the full concatenation [x_t, h_prev].
Gates cell_gates(const MvLstmParams& params, const Vec& h_prev_flat, const Vec& x_t);

// One recurrence step: c = f*c_prev + i*flatten(j), h = o*tanh(c).
// Appends every intermediate to the tape; throws on non-finite state.
std::pair<HiddenTensor, Vec> cell_step(const MvLstmParams& params,
                                       const HiddenTensor& h_prev, const Vec& c_prev,
                                       const Vec& x_t, ForwardTape& tape);

struct ForwardResult {
  double prediction = 0.0;
  Vec alpha;
  ForwardTape tape;
};

// Unrolled forward pass over a T x N window (target variable in the last
// column), starting from zero states, ending in the attention readout.
ForwardResult network_forward(const MvLstmParams& params, const Matrix& window);

// Tape-free forward, prediction only.
double forward_predict(const MvLstmParams& params, const Matrix& window);

}  // namespace mvlstm
