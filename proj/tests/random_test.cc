#include "termforge/random.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

namespace termforge {
namespace {

TEST(Random, MersenneTwisterReferenceValue) {
  // The standard pins the 10000th output of a default-seeded mt19937_64.
  Rng rng(5489u);
  rng.discard(9999);
  EXPECT_EQ(rng(), 9981545732273789042ull);
}

TEST(Random, UniformBelowStaysInRangeAndCoversIt) {
  Rng rng = make_rng(1);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) {
    auto v = uniform_below(rng, 7);
    ASSERT_LT(v, 7u);
    ++hits[v];
  }
  for (int h : hits) EXPECT_NEAR(h, 1000, 150);
}

TEST(Random, UniformUnitAndNormalMoments) {
  Rng rng = make_rng(2);
  double sum = 0, sq = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    double u = uniform_unit(rng);
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    double z = standard_normal(rng);
    sum += z;
    sq += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.05);
  EXPECT_NEAR(sq / n, 1.0, 0.05);
}

TEST(Random, SampleIndicesAreSortedDistinctAndCapped) {
  Rng rng = make_rng(3);
  auto s = sample_indices(10, 4, rng);
  ASSERT_EQ(s.size(), 4u);
  EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
  EXPECT_EQ(std::adjacent_find(s.begin(), s.end()), s.end());
  EXPECT_EQ(sample_indices(3, 10, rng), (std::vector<size_t>{0, 1, 2}));
}

TEST(Random, DerivedSeedsDiffer) {
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, "a"), derive_seed(1, "b"));
  EXPECT_EQ(derive_seed(9, "x"), derive_seed(9, "x"));
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ull);
}

}  // namespace
}  // namespace termforge
