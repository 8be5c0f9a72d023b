#include <cmath>
#include <limits>

#include "doctest.h"

#include "kappatune/errors.hpp"
#include "kappatune/matrix.hpp"

using namespace kappatune;

namespace {

Matrix2D make(std::size_t r, std::size_t c, std::initializer_list<double> vals) {
  Matrix2D m(r, c);
  std::size_t i = 0;
  for (double v : vals) {
    m.values[i++] = v;
  }
  return m;
}

}  // namespace

TEST_CASE("matrix shape and storage") {
  Matrix2D m(2, 3);
  CHECK(m.values.size() == 6);
  m.at(1, 2) = 5.0;
  CHECK(m.values[5] == 5.0);
  CHECK(m.row(1)[2] == 5.0);
  CHECK(m.same_shape(Matrix2D(2, 3)));
  CHECK_FALSE(m.same_shape(Matrix2D(3, 2)));
}

TEST_CASE("matmul_nt computes a * b^T") {
  // a: 2x3, b: 2x3 -> 2x2
  const Matrix2D a = make(2, 3, {1, 2, 3, 4, 5, 6});
  const Matrix2D b = make(2, 3, {1, 0, 1, 0, 1, 0});
  const Matrix2D c = matmul_nt(a, b);
  REQUIRE(c.rows == 2);
  REQUIRE(c.cols == 2);
  CHECK(c.at(0, 0) == 4.0);   // 1+3
  CHECK(c.at(0, 1) == 2.0);   // 2
  CHECK(c.at(1, 0) == 10.0);  // 4+6
  CHECK(c.at(1, 1) == 5.0);
}

TEST_CASE("matmul_tn computes a^T * b") {
  // a: 2x3, b: 2x2 -> 3x2
  const Matrix2D a = make(2, 3, {1, 2, 3, 4, 5, 6});
  const Matrix2D b = make(2, 2, {1, 0, 0, 1});
  const Matrix2D c = matmul_tn(a, b);
  REQUIRE(c.rows == 3);
  REQUIRE(c.cols == 2);
  CHECK(c.at(0, 0) == 1.0);
  CHECK(c.at(0, 1) == 4.0);
  CHECK(c.at(2, 0) == 3.0);
  CHECK(c.at(2, 1) == 6.0);
}

TEST_CASE("matmul_nn computes a * b") {
  const Matrix2D a = make(2, 2, {1, 2, 3, 4});
  const Matrix2D b = make(2, 2, {5, 6, 7, 8});
  const Matrix2D c = matmul_nn(a, b);
  CHECK(c.at(0, 0) == 19.0);
  CHECK(c.at(0, 1) == 22.0);
  CHECK(c.at(1, 0) == 43.0);
  CHECK(c.at(1, 1) == 50.0);
}

TEST_CASE("matmul rejects mismatched shapes") {
  CHECK_THROWS_AS(matmul_nt(Matrix2D(2, 3), Matrix2D(2, 4)), ShapeError);
  CHECK_THROWS_AS(matmul_tn(Matrix2D(2, 3), Matrix2D(3, 2)), ShapeError);
  CHECK_THROWS_AS(matmul_nn(Matrix2D(2, 3), Matrix2D(2, 3)), ShapeError);
}

TEST_CASE("non-finite values propagate through matmul instead of being masked") {
  // 0 * inf must become NaN; a zero-skipping fast path would hide divergence.
  Matrix2D a = make(1, 2, {0.0, 1.0});
  Matrix2D b = make(1, 2, {std::numeric_limits<double>::infinity(), 0.0});
  const Matrix2D c = matmul_nt(a, b);
  CHECK(std::isnan(c.at(0, 0)));
  CHECK_FALSE(all_finite(c));
}

TEST_CASE("all_finite") {
  Matrix2D m(1, 2);
  CHECK(all_finite(m));
  m.at(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_FALSE(all_finite(m));
  CHECK(all_finite(std::vector<double>{1.0, 2.0}));
  CHECK_FALSE(all_finite(std::vector<double>{1.0, std::numeric_limits<double>::infinity()}));
}
