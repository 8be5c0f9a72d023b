#pragma once

#include <cstddef>
#include <vector>

namespace kappatune {

// Dense row-major matrix of doubles. Plain value type; all math helpers are
// free functions and single-threaded so results are bit-reproducible.
struct Matrix2D {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;  // rows * cols entries, row-major

  Matrix2D() = default;
  Matrix2D(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }

  double* row(std::size_t r) { return values.data() + r * cols; }
  const double* row(std::size_t r) const { return values.data() + r * cols; }

  bool same_shape(const Matrix2D& other) const {
    return rows == other.rows && cols == other.cols;
  }
};

bool all_finite(const Matrix2D& m);
bool all_finite(const std::vector<double>& v);

// c = a * b^T      a: m x k, b: n x k  ->  m x n
Matrix2D matmul_nt(const Matrix2D& a, const Matrix2D& b);

// c = a^T * b      a: m x n, b: m x k  ->  n x k
Matrix2D matmul_tn(const Matrix2D& a, const Matrix2D& b);

// c = a * b        a: m x n, b: n x k  ->  m x k
Matrix2D matmul_nn(const Matrix2D& a, const Matrix2D& b);

}  // namespace kappatune
