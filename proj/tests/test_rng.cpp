#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"

#include "kappatune/rng.hpp"

using namespace kappatune;

TEST_CASE("mix64 is deterministic and stream-separating") {
  CHECK(mix64(1234, 0) == mix64(1234, 0));
  CHECK(mix64(1234, 0) != mix64(1234, 1));
  CHECK(mix64(1234, 0) != mix64(1235, 0));
}

TEST_CASE("uniform_unit stays in [0, 1) and is reproducible") {
  Rng a(42);
  Rng b(42);
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform_unit();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(u == b.uniform_unit());
  }
}

TEST_CASE("uniform respects bounds") {
  Rng rng(7);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.uniform(-0.25, 0.75);
    CHECK(v >= -0.25);
    CHECK(v < 0.75);
  }
}

TEST_CASE("normal has roughly standard moments") {
  Rng rng(11);
  const int n = 20000;
  double sum = 0.0;
  double sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sumsq += z * z;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(std::abs(mean) < 0.05);
  CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("bounded stays below its bound") {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    CHECK(rng.bounded(17) < 17);
  }
}

TEST_CASE("shuffle is a deterministic permutation") {
  std::vector<int> v(100);
  std::iota(v.begin(), v.end(), 0);
  std::vector<int> w = v;

  Rng a(99);
  a.shuffle(v);
  Rng b(99);
  b.shuffle(w);
  CHECK(v == w);  // same seed, same order

  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> expect(100);
  std::iota(expect.begin(), expect.end(), 0);
  CHECK(sorted == expect);  // still a permutation

  Rng c(100);
  std::vector<int> u = expect;
  c.shuffle(u);
  CHECK(u != v);  // different seed, (almost surely) different order
}
