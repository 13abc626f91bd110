#include "mvlstm/grad.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mvlstm {

BackwardResult backward(const MvLstmParams& params, const ForwardTape& tape, double target) {
  const CellShape& shape = params.shape;
  if (tape.shape != shape) {
    throw std::invalid_argument("backward: tape shape does not match parameters");
  }
  if (tape.steps.size() != shape.window || tape.alpha.size() != shape.n_vars) {
    throw std::invalid_argument("backward: tape is incomplete");
  }

  const std::size_t n_vars = shape.n_vars;
  const std::size_t d = shape.per_var_dim;
  const std::size_t m = shape.flat_dim();

  BackwardResult res;
  res.grads = MvLstmParams::zeros(shape);
  ParamGrads& g = res.grads;

  const double residual = tape.prediction - target;
  res.loss = residual * residual;
  const double d_pred = 2.0 * residual;

  const Vec& h_final = tape.steps.back().h;

  // Attention head: prediction = sum_n alpha_n * q_n.
  Vec d_h(m, 0.0);
  Vec d_alpha(n_vars);
  for (std::size_t n = 0; n < n_vars; ++n) {
    const double dq = d_pred * tape.alpha[n];
    g.b_out[n] += dq;
    for (std::size_t k = 0; k < d; ++k) {
      g.w_out(n, k) += dq * h_final[n * d + k];
      d_h[n * d + k] += dq * params.w_out(n, k);
    }
    d_alpha[n] = d_pred * tape.per_var_pred[n];
  }

  // Softmax: de_n = alpha_n * (d_alpha_n - sum_k alpha_k d_alpha_k).
  double mix = 0.0;
  for (std::size_t n = 0; n < n_vars; ++n) mix += tape.alpha[n] * d_alpha[n];
  for (std::size_t n = 0; n < n_vars; ++n) {
    const double de = tape.alpha[n] * (d_alpha[n] - mix);
    const double du = de * (1.0 - tape.logits[n] * tape.logits[n]);  // tanh'
    g.b_e += du;
    for (std::size_t k = 0; k < d; ++k) {
      g.w_e[k] += du * h_final[n * d + k];
      d_h[n * d + k] += du * params.w_e[k];
    }
  }

  // Backpropagation through time.
  const Vec zeros_m(m, 0.0);
  Vec d_c(m, 0.0);
  Vec dz(3 * m);
  for (std::size_t t = shape.window; t >= 1; --t) {
    const TapeStep& step = tape.steps[t - 1];
    const Vec& c_prev = (t > 1) ? tape.steps[t - 2].c : zeros_m;
    const Vec& h_prev = (t > 1) ? tape.steps[t - 2].h : zeros_m;

    // h = o * tanh(c); c = f * c_prev + i * j.
    for (std::size_t k = 0; k < m; ++k) {
      const double tc = std::tanh(step.c[k]);
      const double d_o = d_h[k] * tc;
      d_c[k] += d_h[k] * step.gate_o[k] * (1.0 - tc * tc);
      const double d_i = d_c[k] * step.j[k];
      const double d_f = d_c[k] * c_prev[k];
      dz[k] = d_i * step.gate_i[k] * (1.0 - step.gate_i[k]);
      dz[m + k] = d_f * step.gate_f[k] * (1.0 - step.gate_f[k]);
      dz[2 * m + k] = d_o * step.gate_o[k] * (1.0 - step.gate_o[k]);
    }

    // Gate pre-activation z = W [x, h_prev] + b.
    const std::size_t cols = shape.gate_cols();
    Vec d_h_prev(m, 0.0);
    for (std::size_t r = 0; r < 3 * m; ++r) {
      const double dzr = dz[r];
      g.b_gates[r] += dzr;
      double* wrow = g.w_gates.data.data() + r * cols;
      const double* prow = params.w_gates.data.data() + r * cols;
      for (std::size_t cdx = 0; cdx < n_vars; ++cdx) wrow[cdx] += dzr * step.x[cdx];
      for (std::size_t cdx = 0; cdx < m; ++cdx) {
        wrow[n_vars + cdx] += dzr * h_prev[cdx];
        d_h_prev[cdx] += prow[n_vars + cdx] * dzr;
      }
    }

    // Candidate j^n = tanh(W_h^n h_prev^n + w_x^n x_n + b_j^n) and the
    // carry d_c_prev = d_c * f.
    for (std::size_t k = 0; k < m; ++k) {
      const double dj = d_c[k] * step.gate_i[k];
      const double da = dj * (1.0 - step.j[k] * step.j[k]);
      const std::size_t n = k / d;
      const std::size_t row = k % d;
      g.b_j[k] += da;
      g.w_x(n, row) += da * step.x[n];
      Matrix& gwh = g.w_h[n];
      const Matrix& pwh = params.w_h[n];
      for (std::size_t l = 0; l < d; ++l) {
        gwh(row, l) += da * h_prev[n * d + l];
        d_h_prev[n * d + l] += pwh(row, l) * da;
      }
      d_c[k] *= step.gate_f[k];
    }

    d_h = std::move(d_h_prev);
  }

  return res;
}

double fd_max_rel_error(const MvLstmParams& params, const Matrix& window, double target,
                        double epsilon, const ParamGrads& analytic) {
  if (epsilon <= 0.0) {
    throw std::invalid_argument("fd_max_rel_error: epsilon must be positive");
  }
  MvLstmParams probe = params;
  auto spans = param_spans(probe);
  auto grad_spans = param_spans(analytic);
  if (spans.size() != grad_spans.size()) {
    throw std::invalid_argument("fd_max_rel_error: gradient shape mismatch");
  }
  const auto names = param_block_names(params.shape);

  auto loss_at = [&](std::size_t blk, std::size_t idx) {
    const double pred = forward_predict(probe, window);
    const double r = pred - target;
    const double loss = r * r;
    if (!std::isfinite(loss)) {
      throw std::runtime_error("fd_max_rel_error: non-finite loss while perturbing " +
                               names[blk] + "[" + std::to_string(idx) + "]");
    }
    return loss;
  };

  double worst = 0.0;
  for (std::size_t b = 0; b < spans.size(); ++b) {
    if (spans[b].size() != grad_spans[b].size()) {
      throw std::invalid_argument("fd_max_rel_error: gradient shape mismatch");
    }
    for (std::size_t k = 0; k < spans[b].size(); ++k) {
      double& slot = spans[b][k];
      const double saved = slot;
      slot = saved + epsilon;
      const double up = loss_at(b, k);
      slot = saved - epsilon;
      const double down = loss_at(b, k);
      slot = saved;
      const double numeric = (up - down) / (2.0 * epsilon);
      const double a = grad_spans[b][k];
      const double err = std::abs(a - numeric) /
                         std::max({1.0, std::abs(a), std::abs(numeric)});
      worst = std::max(worst, err);
    }
  }
  return worst;
}

double fd_check(const MvLstmParams& params, const Matrix& window, double target,
                double epsilon) {
  ForwardResult fwd = network_forward(params, window);
  BackwardResult back = backward(params, fwd.tape, target);
  return fd_max_rel_error(params, window, target, epsilon, back.grads);
}

}  // namespace mvlstm
