#include "kappatune/matrix.hpp"

#include <cmath>
#include <string>

#include "kappatune/errors.hpp"

namespace kappatune {

bool all_finite(const Matrix2D& m) {
  for (double v : m.values) {
    if (!std::isfinite(v)) {
      return false;
    }
  }
  return true;
}

bool all_finite(const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      return false;
    }
  }
  return true;
}

namespace {

[[noreturn]] void shape_fail(const char* op, const Matrix2D& a, const Matrix2D& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes (" + std::to_string(a.rows) + "x" +
                   std::to_string(a.cols) + ") and (" + std::to_string(b.rows) + "x" +
                   std::to_string(b.cols) + ")");
}

}  // namespace

Matrix2D matmul_nt(const Matrix2D& a, const Matrix2D& b) {
  if (a.cols != b.cols) {
    shape_fail("matmul_nt", a, b);
  }
  Matrix2D c(a.rows, b.rows);
  const std::size_t k = a.cols;
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* ai = a.row(i);
    double* ci = c.row(i);
    for (std::size_t j = 0; j < b.rows; ++j) {
      const double* bj = b.row(j);
      double acc = 0.0;
      for (std::size_t l = 0; l < k; ++l) {
        acc += ai[l] * bj[l];
      }
      ci[j] = acc;
    }
  }
  return c;
}

Matrix2D matmul_tn(const Matrix2D& a, const Matrix2D& b) {
  if (a.rows != b.rows) {
    shape_fail("matmul_tn", a, b);
  }
  Matrix2D c(a.cols, b.cols);
  for (std::size_t m = 0; m < a.rows; ++m) {
    const double* am = a.row(m);
    const double* bm = b.row(m);
    for (std::size_t i = 0; i < a.cols; ++i) {
      const double w = am[i];
      double* ci = c.row(i);
      for (std::size_t j = 0; j < b.cols; ++j) {
        ci[j] += w * bm[j];
      }
    }
  }
  return c;
}

Matrix2D matmul_nn(const Matrix2D& a, const Matrix2D& b) {
  if (a.cols != b.rows) {
    shape_fail("matmul_nn", a, b);
  }
  Matrix2D c(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* ai = a.row(i);
    double* ci = c.row(i);
    for (std::size_t l = 0; l < a.cols; ++l) {
      const double w = ai[l];
      const double* bl = b.row(l);
      for (std::size_t j = 0; j < b.cols; ++j) {
        ci[j] += w * bl[j];
      }
    }
  }
  return c;
}

}  // namespace kappatune
