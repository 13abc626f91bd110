#include "mvlstm/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mvlstm {

namespace {

void check_equal_len(const char* op, const Vec& a, const Vec& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument(std::string(op) + ": length mismatch (" +
                                std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + ")");
  }
}

}  // namespace

Vec matvec(const Matrix& m, const Vec& v) {
  if (m.cols != v.size()) {
    throw std::invalid_argument("matvec: dimension mismatch (" + std::to_string(m.rows) +
                                "x" + std::to_string(m.cols) + " times vector of length " +
                                std::to_string(v.size()) + ")");
  }
  Vec out(m.rows, 0.0);
  for (std::size_t i = 0; i < m.rows; ++i) {
    const double* row = m.data.data() + i * m.cols;
    double acc = 0.0;
    for (std::size_t j = 0; j < m.cols; ++j) acc += row[j] * v[j];
    out[i] = acc;
  }
  return out;
}

Vec matvec_transpose(const Matrix& m, const Vec& v) {
  if (m.rows != v.size()) {
    throw std::invalid_argument("matvec_transpose: dimension mismatch (" +
                                std::to_string(m.rows) + "x" + std::to_string(m.cols) +
                                " transposed times vector of length " +
                                std::to_string(v.size()) + ")");
  }
  Vec out(m.cols, 0.0);
  for (std::size_t i = 0; i < m.rows; ++i) {
    const double* row = m.data.data() + i * m.cols;
    const double vi = v[i];
    for (std::size_t j = 0; j < m.cols; ++j) out[j] += row[j] * vi;
  }
  return out;
}

double dot(const Vec& a, const Vec& b) {
  check_equal_len("dot", a, b);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Vec vtanh(const Vec& a) {
  Vec out(a.size());
  std::transform(a.begin(), a.end(), out.begin(), [](double x) { return std::tanh(x); });
  return out;
}

Vec vsigmoid(const Vec& a) {
  Vec out(a.size());
  std::transform(a.begin(), a.end(), out.begin(), [](double x) { return sigmoid(x); });
  return out;
}

Vec vmul(const Vec& a, const Vec& b) {
  check_equal_len("vmul", a, b);
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

Vec vadd(const Vec& a, const Vec& b) {
  check_equal_len("vadd", a, b);
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

Vec softmax(const Vec& logits) {
  if (logits.empty()) {
    throw std::invalid_argument("softmax: empty input");
  }
  const double m = *std::max_element(logits.begin(), logits.end());
  Vec out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - m);
    sum += out[i];
  }
  for (double& x : out) x /= sum;
  return out;
}

}  // namespace mvlstm
