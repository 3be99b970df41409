#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <vector>

#include "gaittrack/rng.hpp"

using gait::Rng;

TEST_CASE("a fixed seed reproduces the exact draw sequence") {
  Rng a(12345), b(12345), c(54321);
  bool all_same = true, any_diff = false;
  for (int i = 0; i < 64; ++i) {
    const std::uint64_t va = a.next_u64();
    all_same = all_same && va == b.next_u64();
    any_diff = any_diff || va != c.next_u64();
  }
  CHECK(all_same);
  CHECK(any_diff);
}

TEST_CASE("uniform draws cover [0,1) evenly") {
  Rng rng(7);
  const int n = 100000;
  double sum = 0.0, sum_sq = 0.0;
  int bins[10] = {};
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
    sum_sq += u * u;
    ++bins[static_cast<int>(u * 10.0)];
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  // mean 1/2 (sigma of the estimate ~ 1/sqrt(12n)), variance 1/12
  CHECK(std::abs(mean - 0.5) < 4.0 / std::sqrt(12.0 * n));
  CHECK(std::abs(var - 1.0 / 12.0) < 0.002);
  for (int b = 0; b < 10; ++b) {
    // each decile holds n/10 +- 4 sigma, sigma = sqrt(n p (1-p))
    CHECK(std::abs(bins[b] - n / 10) < 4.0 * std::sqrt(n * 0.1 * 0.9));
  }
}

TEST_CASE("normal draws have standard moments") {
  Rng rng(8);
  const int n = 100000;
  double sum = 0.0, sum_sq = 0.0, sum_cube = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sum_sq += x * x;
    sum_cube += x * x * x;
  }
  CHECK(std::abs(sum / n) < 4.0 / std::sqrt(double(n)));
  CHECK(std::abs(sum_sq / n - 1.0) < 4.0 * std::sqrt(2.0 / n));
  CHECK(std::abs(sum_cube / n) < 4.0 * std::sqrt(15.0 / n));

  // affine form
  Rng r1(9), r2(9);
  for (int i = 0; i < 10; ++i) CHECK(r1.normal(3.0, 0.25) == 3.0 + 0.25 * r2.normal());
}

TEST_CASE("uniform_index stays in range and is unbiased across residues") {
  Rng rng(10);
  const std::uint64_t n = 7;
  const int draws = 70000;
  std::vector<int> counts(n, 0);
  for (int i = 0; i < draws; ++i) {
    const std::uint64_t k = rng.uniform_index(n);
    REQUIRE(k < n);
    ++counts[static_cast<std::size_t>(k)];
  }
  const double expect = double(draws) / double(n);
  const double sigma = std::sqrt(expect * (1.0 - 1.0 / double(n)));
  for (std::uint64_t k = 0; k < n; ++k) CHECK(std::abs(counts[k] - expect) < 4.0 * sigma);

  for (int i = 0; i < 100; ++i) CHECK(rng.uniform_index(1) == 0);
}

TEST_CASE("shuffle emits every permutation with equal frequency") {
  Rng rng(11);
  std::map<std::vector<int>, int> hist;
  const int trials = 24000;
  for (int t = 0; t < trials; ++t) {
    std::vector<int> v = {0, 1, 2, 3};
    rng.shuffle(v);
    std::vector<int> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    REQUIRE(sorted == std::vector<int>({0, 1, 2, 3}));
    ++hist[v];
  }
  CHECK(hist.size() == 24);
  const double expect = trials / 24.0;
  const double sigma = std::sqrt(expect * (1.0 - 1.0 / 24.0));
  for (const auto& [perm, count] : hist) CHECK(std::abs(count - expect) < 4.5 * sigma);
}

TEST_CASE("split streams are reproducible, distinct, and leave the parent alone") {
  const Rng parent(99);  // split is const: usable on a const generator
  Rng a1 = parent.split(1);
  Rng a2 = parent.split(1);
  Rng b = parent.split(2);

  bool same = true, differ = false;
  for (int i = 0; i < 32; ++i) {
    const std::uint64_t v = a1.next_u64();
    same = same && v == a2.next_u64();
    differ = differ || v != b.next_u64();
  }
  CHECK(same);
  CHECK(differ);

  // Splitting does not advance the parent's own sequence.
  Rng p1(99), p2(99);
  (void)p1.split(17);
  (void)p1.split(18);
  CHECK(p1.next_u64() == p2.next_u64());

  // Children differ from the parent stream itself.
  Rng p3(99);
  CHECK(p3.next_u64() != Rng(99).split(1).next_u64());
}

TEST_CASE("seed accessor reports the construction seed") {
  CHECK(Rng(0).seed() == 0);
  CHECK(Rng(123456789).seed() == 123456789);
  CHECK(Rng(1).split(5).seed() != 1);  // children carry their own derived seed
}
