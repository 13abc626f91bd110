#include "mvlstm/cell.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "mvlstm/attention.hpp"
#include "mvlstm/rng.hpp"

namespace mvlstm {

namespace {

void check_shape(const CellShape& shape, const HiddenTensor& h, const char* where) {
  if (h.n_vars != shape.n_vars || h.per_var_dim != shape.per_var_dim ||
      h.data.size() != shape.flat_dim()) {
    throw std::invalid_argument(std::string(where) + ": hidden tensor shape mismatch");
  }
}

void check_input(const CellShape& shape, const Vec& x, const char* where) {
  if (x.size() != shape.n_vars) {
    throw std::invalid_argument(std::string(where) + ": input has length " +
                                std::to_string(x.size()) + ", expected " +
                                std::to_string(shape.n_vars));
  }
}

}  // namespace

void CellShape::validate() const {
  if (n_vars < 2) throw std::invalid_argument("CellShape: n_vars must be >= 2");
  if (per_var_dim < 1) throw std::invalid_argument("CellShape: per_var_dim must be >= 1");
  if (window < 1) throw std::invalid_argument("CellShape: window must be >= 1");
}

HiddenTensor HiddenTensor::unflatten(std::size_t n, std::size_t d, const Vec& flat) {
  if (flat.size() != n * d) {
    throw std::invalid_argument("HiddenTensor::unflatten: length " +
                                std::to_string(flat.size()) + " does not match " +
                                std::to_string(n) + "x" + std::to_string(d));
  }
  HiddenTensor h(n, d);
  h.data = flat;
  return h;
}

MvLstmParams MvLstmParams::zeros(const CellShape& shape) {
  shape.validate();
  MvLstmParams p;
  p.shape = shape;
  const std::size_t n = shape.n_vars;
  const std::size_t d = shape.per_var_dim;
  p.w_x = Matrix(n, d);
  p.w_h.assign(n, Matrix(d, d));
  p.b_j.assign(shape.flat_dim(), 0.0);
  p.w_gates = Matrix(shape.gate_rows(), shape.gate_cols());
  p.b_gates.assign(shape.gate_rows(), 0.0);
  p.w_e.assign(d, 0.0);
  p.b_e = 0.0;
  p.w_out = Matrix(n, d);
  p.b_out.assign(n, 0.0);
  return p;
}

MvLstmParams MvLstmParams::random(const CellShape& shape, std::uint64_t seed) {
  MvLstmParams p = zeros(shape);
  Rng rng(seed);
  const double d = static_cast<double>(shape.per_var_dim);
  const double r_var = 1.0 / std::sqrt(d);
  const double r_gate = 1.0 / std::sqrt(static_cast<double>(shape.gate_cols()));

  for (double& w : p.w_x.data) w = rng.uniform(-r_var, r_var);
  for (Matrix& m : p.w_h)
    for (double& w : m.data) w = rng.uniform(-r_var, r_var);
  // gates and readouts start damped so the per-variable candidate paths are
  // the first thing training shapes; the score vector starts at full scale
  // so attention reacts to them from the beginning
  for (double& w : p.w_gates.data) w = rng.uniform(-r_gate, r_gate) * 0.01;
  for (double& w : p.w_e) w = rng.uniform(-r_var, r_var);
  for (double& w : p.w_out.data) w = rng.uniform(-r_var, r_var) * 0.01;
  // forget-gate bias starts at 1
  const std::size_t m_dim = shape.flat_dim();
  for (std::size_t k = m_dim; k < 2 * m_dim; ++k) p.b_gates[k] = 1.0;
  return p;
}

std::size_t MvLstmParams::count() const {
  std::size_t total = 0;
  for (const auto& s : param_spans(*this)) total += s.size();
  return total;
}

void MvLstmParams::validate() const {
  shape.validate();
  const std::size_t n = shape.n_vars;
  const std::size_t d = shape.per_var_dim;
  const std::size_t m = shape.flat_dim();
  bool ok = w_x.rows == n && w_x.cols == d && w_h.size() == n && b_j.size() == m &&
            w_gates.rows == 3 * m && w_gates.cols == n + m && b_gates.size() == 3 * m &&
            w_e.size() == d && w_out.rows == n && w_out.cols == d && b_out.size() == n;
  for (const Matrix& mat : w_h) ok = ok && mat.rows == d && mat.cols == d;
  if (!ok) throw std::invalid_argument("MvLstmParams: field shapes inconsistent with CellShape");
  for (const auto& s : param_spans(*this)) {
    for (double v : s) {
      if (!std::isfinite(v)) throw std::invalid_argument("MvLstmParams: non-finite entry");
    }
  }
}

namespace {

template <class P, class S>
std::vector<S> collect_spans(P& p) {
  std::vector<S> out;
  out.reserve(p.w_h.size() + 8);
  out.push_back(S(p.w_x.data));
  for (auto& m : p.w_h) out.push_back(S(m.data));
  out.push_back(S(p.b_j));
  out.push_back(S(p.w_gates.data));
  out.push_back(S(p.b_gates));
  out.push_back(S(p.w_e));
  out.push_back(S(&p.b_e, 1));
  out.push_back(S(p.w_out.data));
  out.push_back(S(p.b_out));
  return out;
}

}  // namespace

std::vector<std::span<double>> param_spans(MvLstmParams& p) {
  return collect_spans<MvLstmParams, std::span<double>>(p);
}

std::vector<std::span<const double>> param_spans(const MvLstmParams& p) {
  return collect_spans<const MvLstmParams, std::span<const double>>(p);
}

std::vector<std::string> param_block_names(const CellShape& shape) {
  std::vector<std::string> names;
  names.push_back("w_x");
  for (std::size_t n = 0; n < shape.n_vars; ++n) names.push_back("w_h[" + std::to_string(n) + "]");
  names.push_back("b_j");
  names.push_back("w_gates");
  names.push_back("b_gates");
  names.push_back("w_e");
  names.push_back("b_e");
  names.push_back("w_out");
  names.push_back("b_out");
  return names;
}

Vec to_flat(const MvLstmParams& p) {
  Vec flat;
  flat.reserve(p.count());
  for (const auto& s : param_spans(p)) flat.insert(flat.end(), s.begin(), s.end());
  return flat;
}

void from_flat(MvLstmParams& p, const Vec& flat) {
  if (flat.size() != p.count()) {
    throw std::invalid_argument("from_flat: expected " + std::to_string(p.count()) +
                                " values, got " + std::to_string(flat.size()));
  }
  std::size_t pos = 0;
  for (auto& s : param_spans(p)) {
    for (double& v : s) v = flat[pos++];
  }
}

void add_scaled(MvLstmParams& dst, const MvLstmParams& src, double s) {
  auto d = param_spans(dst);
  auto a = param_spans(src);
  if (d.size() != a.size()) throw std::invalid_argument("add_scaled: shape mismatch");
  for (std::size_t b = 0; b < d.size(); ++b) {
    if (d[b].size() != a[b].size()) throw std::invalid_argument("add_scaled: shape mismatch");
    for (std::size_t k = 0; k < d[b].size(); ++k) d[b][k] += s * a[b][k];
  }
}

void scale_params(MvLstmParams& p, double s) {
  for (auto& blk : param_spans(p))
    for (double& v : blk) v *= s;
}

double squared_norm(const MvLstmParams& p) {
  double acc = 0.0;
  for (const auto& blk : param_spans(p))
    for (double v : blk) acc += v * v;
  return acc;
}

HiddenTensor cell_candidate(const MvLstmParams& params, const HiddenTensor& h_prev,
                            const Vec& x_t) {
  const CellShape& shape = params.shape;
  check_shape(shape, h_prev, "cell_candidate");
  check_input(shape, x_t, "cell_candidate");

  const std::size_t d = shape.per_var_dim;
  HiddenTensor j(shape.n_vars, d);
  for (std::size_t n = 0; n < shape.n_vars; ++n) {
    const Matrix& wh = params.w_h[n];
    auto hp = h_prev.block(n);
    auto out = j.block(n);
    for (std::size_t k = 0; k < d; ++k) {
      double acc = params.b_j[n * d + k] + params.w_x(n, k) * x_t[n];
      const double* row = wh.data.data() + k * d;
      for (std::size_t l = 0; l < d; ++l) acc += row[l] * hp[l];
      out[k] = std::tanh(acc);
    }
  }
  return j;
}

Gates cell_gates(const MvLstmParams& params, const Vec& h_prev_flat, const Vec& x_t) {
  const CellShape& shape = params.shape;
  check_input(shape, x_t, "cell_gates");
  const std::size_t m = shape.flat_dim();
  if (h_prev_flat.size() != m) {
    throw std::invalid_argument("cell_gates: hidden state has length " +
                                std::to_string(h_prev_flat.size()) + ", expected " +
                                std::to_string(m));
  }

  // concatenation order is [x_t, h_prev], fixed
  Vec concat;
  concat.reserve(shape.gate_cols());
  concat.insert(concat.end(), x_t.begin(), x_t.end());
  concat.insert(concat.end(), h_prev_flat.begin(), h_prev_flat.end());

  Vec z = matvec(params.w_gates, concat);
  Gates g{Vec(m), Vec(m), Vec(m)};
  for (std::size_t k = 0; k < m; ++k) {
    g.i[k] = sigmoid(z[k] + params.b_gates[k]);
    g.f[k] = sigmoid(z[m + k] + params.b_gates[m + k]);
    g.o[k] = sigmoid(z[2 * m + k] + params.b_gates[2 * m + k]);
  }
  return g;
}

std::pair<HiddenTensor, Vec> cell_step(const MvLstmParams& params,
                                       const HiddenTensor& h_prev, const Vec& c_prev,
                                       const Vec& x_t, ForwardTape& tape) {
  const CellShape& shape = params.shape;
  check_shape(shape, h_prev, "cell_step");
  const std::size_t m = shape.flat_dim();
  if (c_prev.size() != m) {
    throw std::invalid_argument("cell_step: memory cell has length " +
                                std::to_string(c_prev.size()) + ", expected " +
                                std::to_string(m));
  }

  HiddenTensor j = cell_candidate(params, h_prev, x_t);
  Gates g = cell_gates(params, h_prev.data, x_t);

  HiddenTensor h(shape.n_vars, shape.per_var_dim);
  Vec c(m);
  for (std::size_t k = 0; k < m; ++k) {
    c[k] = g.f[k] * c_prev[k] + g.i[k] * j.data[k];
    h.data[k] = g.o[k] * std::tanh(c[k]);
  }

  const std::size_t step_index = tape.steps.size() + 1;
  for (std::size_t k = 0; k < m; ++k) {
    if (!std::isfinite(c[k]) || !std::isfinite(h.data[k])) {
      throw std::runtime_error("cell_step: non-finite state at step " +
                               std::to_string(step_index) + " (training divergence)");
    }
  }

  tape.steps.push_back(TapeStep{x_t, std::move(g.i), std::move(g.f), std::move(g.o),
                                j.data, c, h.data});
  return {std::move(h), std::move(c)};
}

ForwardResult network_forward(const MvLstmParams& params, const Matrix& window) {
  const CellShape& shape = params.shape;
  shape.validate();
  if (window.cols != shape.n_vars || window.rows != shape.window) {
    throw std::invalid_argument("network_forward: window is " + std::to_string(window.rows) +
                                "x" + std::to_string(window.cols) + ", expected " +
                                std::to_string(shape.window) + "x" +
                                std::to_string(shape.n_vars));
  }

  ForwardTape tape;
  tape.shape = shape;
  tape.steps.reserve(shape.window);

  HiddenTensor h(shape.n_vars, shape.per_var_dim);
  Vec c(shape.flat_dim(), 0.0);
  for (std::size_t t = 0; t < shape.window; ++t) {
    Vec x(window.data.begin() + t * window.cols,
          window.data.begin() + (t + 1) * window.cols);
    auto [h_next, c_next] = cell_step(params, h, c, x, tape);
    h = std::move(h_next);
    c = std::move(c_next);
  }

  AttentionOutput att = attention_forward(params, h);
  tape.logits = att.logits;
  tape.alpha = att.weights;
  tape.per_var_pred = att.per_var_pred;
  tape.prediction = att.prediction;
  return ForwardResult{att.prediction, att.weights, std::move(tape)};
}

double forward_predict(const MvLstmParams& params, const Matrix& window) {
  const CellShape& shape = params.shape;
  if (window.cols != shape.n_vars || window.rows != shape.window) {
    throw std::invalid_argument("forward_predict: window is " + std::to_string(window.rows) +
                                "x" + std::to_string(window.cols) + ", expected " +
                                std::to_string(shape.window) + "x" +
                                std::to_string(shape.n_vars));
  }
  const std::size_t m = shape.flat_dim();
  HiddenTensor h(shape.n_vars, shape.per_var_dim);
  Vec c(m, 0.0);
  for (std::size_t t = 0; t < shape.window; ++t) {
    Vec x(window.data.begin() + t * window.cols,
          window.data.begin() + (t + 1) * window.cols);
    HiddenTensor j = cell_candidate(params, h, x);
    Gates g = cell_gates(params, h.data, x);
    for (std::size_t k = 0; k < m; ++k) {
      c[k] = g.f[k] * c[k] + g.i[k] * j.data[k];
      h.data[k] = g.o[k] * std::tanh(c[k]);
    }
  }
  return attention_forward(params, h).prediction;
}

}  // namespace mvlstm
