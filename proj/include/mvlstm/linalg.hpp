#pragma once

#include <cstddef>
#include <vector>

namespace mvlstm {

using Vec = std::vector<double>;

// Row-major dense matrix of 64-bit floats.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  Vec data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  bool operator==(const Matrix& other) const = default;
};

Vec matvec(const Matrix& m, const Vec& v);

// m^T * v without materializing the transpose.
Vec matvec_transpose(const Matrix& m, const Vec& v);

double dot(const Vec& a, const Vec& b);

double sigmoid(double x);

Vec vtanh(const Vec& a);
Vec vsigmoid(const Vec& a);
Vec vmul(const Vec& a, const Vec& b);
Vec vadd(const Vec& a, const Vec& b);

// Max-subtracted softmax. Rejects empty input.
Vec softmax(const Vec& logits);

}  // namespace mvlstm
