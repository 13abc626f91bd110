#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "mvlstm/linalg.hpp"
#include "mvlstm/rng.hpp"

using namespace mvlstm;

namespace {

// Independent scalar-loop reference for matrix-vector products.
Vec naive_matvec(const Matrix& m, const Vec& v) {
  Vec out(m.rows, 0.0);
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t j = 0; j < m.cols; ++j) {
      out[i] += m(i, j) * v[j];
    }
  }
  return out;
}

}  // namespace

TEST_CASE("matvec hand-checkable 2x2") {
  Matrix m(2, 2);
  m(0, 0) = 1; m(0, 1) = 2; m(1, 0) = 3; m(1, 1) = 4;
  const Vec out = matvec(m, {1.0, 1.0});
  CHECK(out == Vec{3.0, 7.0});
}

TEST_CASE("matvec identity") {
  Matrix eye(3, 3);
  for (std::size_t i = 0; i < 3; ++i) eye(i, i) = 1.0;
  const Vec out = matvec(eye, {5.0, -2.0, 0.0});
  CHECK(out == Vec{5.0, -2.0, 0.0});
}

TEST_CASE("matvec matches the naive oracle on random inputs") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix m(4, 3);
    for (double& v : m.data) v = rng.uniform(-5.0, 5.0);
    Vec x(3);
    for (double& v : x) v = rng.uniform(-5.0, 5.0);
    const Vec got = matvec(m, x);
    const Vec want = naive_matvec(m, x);
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("matvec rejects dimension mismatch") {
  Matrix m(2, 3);
  CHECK_THROWS_AS(matvec(m, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("matvec_transpose agrees with explicit transpose") {
  Rng rng(17);
  Matrix m(5, 3);
  for (double& v : m.data) v = rng.uniform(-2.0, 2.0);
  Vec x(5);
  for (double& v : x) v = rng.uniform(-2.0, 2.0);
  Matrix mt(3, 5);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 3; ++j) mt(j, i) = m(i, j);
  const Vec got = matvec_transpose(m, x);
  const Vec want = naive_matvec(mt, x);
  for (std::size_t i = 0; i < got.size(); ++i) {
    CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
  }
}

TEST_CASE("elementwise basics") {
  CHECK(vtanh({0.0, 0.0}) == Vec{0.0, 0.0});
  CHECK(vsigmoid({0.0})[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(vmul({1.0, 2.0}, {3.0, 4.0}) == Vec{3.0, 8.0});
  CHECK(vadd({1.0, 2.0}, {3.0, 4.0}) == Vec{4.0, 6.0});
  CHECK_THROWS_AS(vmul({1.0}, {1.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(vadd({1.0}, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("sigmoid symmetry sigmoid(x) + sigmoid(-x) = 1") {
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const double x = rng.uniform(-50.0, 50.0);
    CHECK(sigmoid(x) + sigmoid(-x) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("softmax uniform case") {
  const Vec out = softmax({0.0, 0.0, 0.0, 0.0});
  for (double v : out) CHECK(v == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("softmax shift invariance, pinned pair") {
  for (double c : {-100.0, 0.0, 3.5, 1000.0}) {
    const Vec out = softmax({c, c + std::log(3.0)});
    CHECK(out[0] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(out[1] == doctest::Approx(0.75).epsilon(1e-12));
  }
}

TEST_CASE("softmax survives huge logits") {
  const Vec out = softmax({1000.0, 1000.0});
  CHECK(out[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(out[1] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("softmax rejects empty input") {
  CHECK_THROWS_AS(softmax({}), std::invalid_argument);
}

TEST_CASE("softmax sums to one and is shift invariant on random logits") {
  Rng rng(29);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng.below(8));
    Vec logits(n);
    for (double& v : logits) v = rng.uniform(-30.0, 30.0);
    const Vec a = softmax(logits);
    double sum = 0.0;
    for (double v : a) {
      CHECK(v > 0.0);
      CHECK(v < 1.0 + 1e-12);
      sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));

    const double shift = rng.uniform(-100.0, 100.0);
    Vec shifted = logits;
    for (double& v : shifted) v += shift;
    const Vec b = softmax(shifted);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(std::abs(a[i] - b[i]) <= 1e-12);
    }
  }
}
