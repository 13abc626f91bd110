#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "mvlstm/grad.hpp"
#include "mvlstm/rng.hpp"

using namespace mvlstm;

namespace {

Matrix random_window(const CellShape& shape, std::uint64_t seed) {
  Rng rng(seed);
  Matrix w(shape.window, shape.n_vars);
  for (double& v : w.data) v = rng.gaussian();
  return w;
}

}  // namespace

TEST_CASE("zero residual gives zero loss and zero gradients") {
  const CellShape shape{3, 2, 4};
  const MvLstmParams p = MvLstmParams::random(shape, 9);
  const Matrix window = random_window(shape, 10);
  const ForwardResult fwd = network_forward(p, window);
  const BackwardResult back = backward(p, fwd.tape, fwd.prediction);
  CHECK(back.loss == 0.0);
  for (const auto& span : param_spans(back.grads)) {
    for (double g : span) CHECK(g == 0.0);
  }
}

TEST_CASE("tiny shape gradients match finite differences tightly") {
  const CellShape shape{2, 1, 1};
  const MvLstmParams p = MvLstmParams::random(shape, 71);
  const Matrix window = random_window(shape, 72);
  const double err = fd_check(p, window, 0.37, 1e-5);
  CHECK(err <= 1e-6);
}

TEST_CASE("N=3 d=2 T=10 gradients match finite differences") {
  const CellShape shape{3, 2, 10};
  const MvLstmParams p = MvLstmParams::random(shape, 42);
  const Matrix window = random_window(shape, 42);
  const double err = fd_check(p, window, -0.8, 1e-5);
  CHECK(err <= 1e-4);
}

TEST_CASE("flat point: zero parameters agree with finite differences") {
  const CellShape shape{3, 2, 3};
  const MvLstmParams p = MvLstmParams::zeros(shape);
  const Matrix window = random_window(shape, 5);
  const double err = fd_check(p, window, 1.5, 1e-5);
  CHECK(err <= 1e-8);
}

TEST_CASE("gradient check over a sample of the shape grid") {
  for (const auto& [n, d, t] : {std::tuple<std::size_t, std::size_t, std::size_t>{2, 1, 5},
                                {5, 4, 1},
                                {3, 4, 10},
                                {5, 2, 10}}) {
    const CellShape shape{n, d, t};
    const MvLstmParams p = MvLstmParams::random(shape, 100 + n * 10 + d);
    const Matrix window = random_window(shape, 200 + t);
    const double err = fd_check(p, window, 0.11, 1e-5);
    CAPTURE(n);
    CAPTURE(d);
    CAPTURE(t);
    CHECK(err <= 1e-4);
  }
}

TEST_CASE("the checker notices a corrupted gradient entry") {
  const CellShape shape{2, 2, 3};
  const MvLstmParams p = MvLstmParams::random(shape, 19);
  const Matrix window = random_window(shape, 20);
  const ForwardResult fwd = network_forward(p, window);
  BackwardResult back = backward(p, fwd.tape, 0.6);

  const double clean = fd_max_rel_error(p, window, 0.6, 1e-5, back.grads);
  CHECK(clean <= 1e-6);

  back.grads.w_gates(0, 0) += 1e-2;
  const double corrupted = fd_max_rel_error(p, window, 0.6, 1e-5, back.grads);
  CHECK(corrupted > 1e-3);
}

TEST_CASE("gate path carries gradient to a variable with a severed readout") {
  // cut variable 0 out of the readout entirely; its input weights still get
  // gradient because the gates mix every variable into every block
  const CellShape shape{3, 2, 5};
  MvLstmParams p = MvLstmParams::random(shape, 55);
  for (std::size_t k = 0; k < 2; ++k) p.w_out(0, k) = 0.0;
  p.b_out[0] = 0.0;
  const Matrix window = random_window(shape, 56);
  const ForwardResult fwd = network_forward(p, window);
  const BackwardResult back = backward(p, fwd.tape, 2.0);
  double wx0_norm = 0.0;
  for (std::size_t k = 0; k < 2; ++k) wx0_norm += std::abs(back.grads.w_x(0, k));
  CHECK(wx0_norm > 0.0);
}

TEST_CASE("backward is deterministic over the same tape") {
  const CellShape shape{3, 2, 6};
  const MvLstmParams p = MvLstmParams::random(shape, 2024);
  const Matrix window = random_window(shape, 2025);
  const ForwardResult fwd = network_forward(p, window);
  const BackwardResult a = backward(p, fwd.tape, 0.123);
  const BackwardResult b = backward(p, fwd.tape, 0.123);
  CHECK(a.loss == b.loss);
  CHECK(to_flat(a.grads) == to_flat(b.grads));
}

TEST_CASE("backward validates the tape") {
  const CellShape shape{2, 2, 3};
  const MvLstmParams p = MvLstmParams::random(shape, 1);
  const ForwardResult fwd = network_forward(p, random_window(shape, 2));

  const CellShape other{3, 2, 3};
  const MvLstmParams q = MvLstmParams::random(other, 1);
  CHECK_THROWS_AS(backward(q, fwd.tape, 0.0), std::invalid_argument);

  ForwardTape truncated = fwd.tape;
  truncated.steps.pop_back();
  CHECK_THROWS_AS(backward(p, truncated, 0.0), std::invalid_argument);
}

TEST_CASE("fd_max_rel_error reports perturbation coordinates on blowup") {
  const CellShape shape{2, 1, 1};
  MvLstmParams p = MvLstmParams::zeros(shape);
  p.b_out = {1e308, 0.0};  // +eps on b_out overflows the squared loss
  const Matrix window = random_window(shape, 3);
  const ParamGrads grads = MvLstmParams::zeros(shape);
  CHECK_THROWS_WITH_AS(fd_max_rel_error(p, window, -1e308, 1e300, grads),
                       doctest::Contains("non-finite loss while perturbing w_x[0]"),
                       std::runtime_error);
}

TEST_CASE("w_h gradients respect the per-variable block structure") {
  // freeze the gates (zero gate weights) and the attention scores (zero w_e)
  // so the only route from W_h^n to the loss is variable n's candidate path
  // into its own readout; severing that readout must zero the block exactly
  const CellShape shape{3, 2, 4};
  MvLstmParams p = MvLstmParams::random(shape, 321);
  for (double& v : p.w_gates.data) v = 0.0;
  for (double& v : p.w_e) v = 0.0;
  for (std::size_t k = 0; k < 2; ++k) p.w_out(1, k) = 0.0;

  const Matrix window = random_window(shape, 322);
  const ForwardResult fwd = network_forward(p, window);
  const BackwardResult back = backward(p, fwd.tape, 2.5);

  for (double g : back.grads.w_h[1].data) CHECK(g == 0.0);
  double other = 0.0;
  for (double g : back.grads.w_h[0].data) other += std::abs(g);
  for (double g : back.grads.w_h[2].data) other += std::abs(g);
  CHECK(other > 0.0);
}
