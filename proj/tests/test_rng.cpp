#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "netdiag/rng.hpp"

using netdiag::Rng;

TEST_CASE("same seed reproduces the stream") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) CHECK(a.bits() == b.bits());
}

TEST_CASE("uniform stays in [0,1) and fills the range") {
  Rng rng(1);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo < 0.01);
  CHECK(hi > 0.99);
}

TEST_CASE("uniform(lo,hi) respects bounds") {
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform(-3.0, 7.0);
    CHECK(u >= -3.0);
    CHECK(u < 7.0);
  }
}

TEST_CASE("below covers every residue") {
  Rng rng(3);
  std::vector<int> seen(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const std::uint64_t v = rng.below(7);
    REQUIRE(v < 7);
    ++seen[v];
  }
  for (const int count : seen) CHECK(count > 500);
}

TEST_CASE("normal moments are roughly standard") {
  Rng rng(4);
  const int n = 50000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("poisson mean tracks lambda") {
  Rng rng(5);
  const int n = 20000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += static_cast<double>(rng.poisson(4.0));
  CHECK(std::abs(sum / n - 4.0) < 0.1);
}

TEST_CASE("poisson of zero lambda is zero") {
  Rng rng(6);
  for (int i = 0; i < 100; ++i) CHECK(rng.poisson(0.0) == 0);
}

TEST_CASE("shuffle permutes without loss") {
  Rng rng(7);
  std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  rng.shuffle(v);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 10; ++i) CHECK(sorted[i] == i);
}

TEST_CASE("mix separates streams and stays reproducible") {
  CHECK(Rng::mix(1, 0) == Rng::mix(1, 0));
  CHECK(Rng::mix(1, 0) != Rng::mix(1, 1));
  CHECK(Rng::mix(1, 0) != Rng::mix(2, 0));
  Rng a(Rng::mix(9, 3)), b(Rng::mix(9, 4));
  int same = 0;
  for (int i = 0; i < 64; ++i) same += a.bits() == b.bits() ? 1 : 0;
  CHECK(same < 4);
}
