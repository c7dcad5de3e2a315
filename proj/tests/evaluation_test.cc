#include "termforge/evaluation.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "oracles.h"
#include "termforge/error.h"

namespace termforge {
namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kIo;
}

TEST(Spearman, TextbookExample) {
  std::vector<double> x{1, 2, 3, 4, 5}, y{2, 1, 4, 3, 5};
  EXPECT_NEAR(spearman(x, y), 0.8, 1e-12);
  std::vector<double> rev{5, 4, 3, 2, 1};
  EXPECT_NEAR(spearman(x, rev), -1.0, 1e-12);
  EXPECT_NEAR(spearman(x, x), 1.0, 1e-12);
}

TEST(Spearman, AverageRanksForTies) {
  std::vector<double> v{10, 20, 10, 30, 20};
  EXPECT_EQ(average_ranks(v), (std::vector<double>{1.5, 3.5, 1.5, 5, 3.5}));
}

TEST(Spearman, MatchesOracleWithTies) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 300; ++t) {
    size_t n = 2 + rng() % 40;
    std::vector<double> x(n), y(n);
    for (size_t i = 0; i < n; ++i) {
      x[i] = static_cast<double>(rng() % 8);
      y[i] = static_cast<double>(rng() % 8);
    }
    if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; }) ||
        std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; })) {
      continue;
    }
    EXPECT_NEAR(spearman(x, y), oracle::spearman(x, y), 1e-9);
  }
}

TEST(Spearman, Errors) {
  std::vector<double> a{1, 2, 3}, b{1, 2}, c{4, 4, 4}, one{1};
  EXPECT_EQ(code_of([&] { spearman(a, b); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { spearman(one, one); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { spearman(a, c); }), ErrorCode::kUndefinedScore);
  std::vector<double> nan{1, NAN, 3};
  EXPECT_EQ(code_of([&] { spearman(a, nan); }), ErrorCode::kInvalidArgument);
}

ScoreTable table(Direction d, std::map<std::string, double> s) {
  return ScoreTable{Measure::kRelativeFrequency, d, std::move(s)};
}

TEST(AccuracyAtK, WorkedExample) {
  auto t = table(Direction::kHigherIsPositive, {{"a", 4}, {"b", 3}, {"c", 2}, {"d", 1}});
  std::map<std::string, bool> pos{{"a", true}, {"b", false}, {"c", true}, {"d", false}};
  auto conf = confusion_at_k(t, pos);
  EXPECT_EQ(conf, (Confusion{1, 1, 1, 1}));
  EXPECT_EQ(accuracy_at_k(t, pos), 0.5);
  EXPECT_EQ(confusion_at_k(t, pos, 0), (Confusion{0, 0, 2, 2}));
  EXPECT_EQ(confusion_at_k(t, pos, 4), (Confusion{2, 2, 0, 0}));
  EXPECT_EQ(top_k(t, 2), (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(code_of([&] { top_k(t, 5); }), ErrorCode::kInvalidArgument);
  std::map<std::string, bool> partial{{"a", true}};
  EXPECT_EQ(code_of([&] { confusion_at_k(t, partial); }), ErrorCode::kInvalidArgument);
}

TEST(AccuracyAtK, LowerIsPositiveEqualsNegatedHigher) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> ud(-5, 5);
  for (int trial = 0; trial < 50; ++trial) {
    std::map<std::string, double> s, neg;
    std::map<std::string, bool> pos;
    for (int i = 0; i < 30; ++i) {
      std::string name = "c" + std::to_string(i);
      double v = std::round(ud(rng));  // ties on purpose
      s[name] = v;
      neg[name] = -v;
      pos[name] = rng() % 2;
    }
    for (size_t k : {0u, 5u, 13u, 30u}) {
      EXPECT_EQ(confusion_at_k(table(Direction::kLowerIsPositive, s), pos, k),
                confusion_at_k(table(Direction::kHigherIsPositive, neg), pos, k));
    }
  }
}

TEST(AccuracyAtK, TiesBreakLexicographically) {
  auto t = table(Direction::kHigherIsPositive, {{"b", 1}, {"a", 1}, {"c", 1}});
  EXPECT_EQ(top_k(t, 2), (std::vector<std::string>{"a", "b"}));
}

TEST(Majority, Baseline) {
  EXPECT_NEAR(majority_baseline(59, 41), 0.59, 1e-15);
  EXPECT_NEAR(majority_baseline(41, 59), 0.59, 1e-15);
  std::map<std::string, bool> pos{{"a", true}, {"b", false}, {"c", false}};
  EXPECT_NEAR(majority_baseline(pos), 2.0 / 3.0, 1e-15);
}

TEST(Ari, KnownValues) {
  Partition one{{"a", "b", "c", "d"}};
  Partition singles{{"a"}, {"b"}, {"c"}, {"d"}};
  EXPECT_NEAR(adjusted_rand_index(one, singles), 0.0, 1e-12);
  EXPECT_NEAR(adjusted_rand_index(singles, singles), 1.0, 1e-12);
  Partition p{{"a", "b"}, {"c", "d"}};
  Partition q{{"d", "c"}, {"b", "a"}};
  EXPECT_NEAR(adjusted_rand_index(p, q), 1.0, 1e-12);
}

TEST(Ari, MatchesPairCountingOracle) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 200; ++t) {
    size_t n = 1 + rng() % 30;
    auto x = oracle::random_partition(n, rng);
    auto y = oracle::random_partition(n, rng);
    EXPECT_NEAR(adjusted_rand_index(oracle::to_partition(x), oracle::to_partition(y)), oracle::ari(x, y), 1e-9);
  }
}

TEST(Ari, SymmetricAndUniverseChecked) {
  std::mt19937_64 rng(4);
  auto x = oracle::to_partition(oracle::random_partition(20, rng));
  auto y = oracle::to_partition(oracle::random_partition(20, rng));
  EXPECT_NEAR(adjusted_rand_index(x, y), adjusted_rand_index(y, x), 1e-12);
  Partition a{{"a", "b"}}, b{{"a", "c"}}, dup{{"a", "b"}, {"a"}};
  EXPECT_EQ(code_of([&] { adjusted_rand_index(a, b); }), ErrorCode::kUniverseMismatch);
  EXPECT_EQ(code_of([&] { adjusted_rand_index(a, dup); }), ErrorCode::kUniverseMismatch);
  EXPECT_EQ(code_of([&] { bcubed(a, b); }), ErrorCode::kUniverseMismatch);
}

TEST(BCubedTest, OneClusterAgainstSingletons) {
  for (size_t n : {1u, 2u, 5u, 17u}) {
    Partition one(1), singles;
    for (size_t i = 0; i < n; ++i) {
      one[0].push_back("e" + std::to_string(i));
      singles.push_back({"e" + std::to_string(i)});
    }
    auto b = bcubed(one, singles);
    EXPECT_NEAR(b.precision, 1.0 / static_cast<double>(n), 1e-12);
    EXPECT_NEAR(b.recall, 1.0, 1e-12);
    EXPECT_NEAR(b.f1, 2.0 / static_cast<double>(n + 1), 1e-12);
  }
  EXPECT_EQ(code_of([] { bcubed(Partition{}, Partition{}); }), ErrorCode::kInvalidArgument);
}

TEST(BCubedTest, MatchesPerItemOracle) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 200; ++t) {
    size_t n = 1 + rng() % 30;
    auto x = oracle::random_partition(n, rng);
    auto y = oracle::random_partition(n, rng);
    auto got = bcubed(oracle::to_partition(x), oracle::to_partition(y));
    auto want = oracle::bcubed(x, y);
    EXPECT_NEAR(got.precision, want.p, 1e-9);
    EXPECT_NEAR(got.recall, want.r, 1e-9);
    EXPECT_NEAR(got.f1, want.f1, 1e-9);
    EXPECT_EQ(bcubed_f1(oracle::to_partition(x), oracle::to_partition(y)), got.f1);
  }
}

std::vector<EvalReport> sample_reports() {
  EvalReport a{"termhood", "RF", {{"accuracy", 0.6666666666666666}, {"tp", 3}}, 4, 4, 2, "abc"};
  EvalReport b{"termhood", "RF/majority", {{"accuracy", 0.5}}, std::nullopt, 4, 2, "abc"};
  EvalReport c{"clustering", "STATIC_HAR", {{"ari", 1.0}}, std::nullopt, 0, 0, "abc"};
  return {a, b, c};
}

TEST(Reports, JsonRoundTrip) {
  auto reports = sample_reports();
  std::stringstream ss;
  write_reports_json(ss, reports);
  auto back = read_reports_json(ss);
  ASSERT_EQ(back.size(), 3u);
  EXPECT_EQ(back[0].metrics, reports[0].metrics);
  EXPECT_EQ(back[0].k, 4u);
  EXPECT_FALSE(back[1].k.has_value());
  EXPECT_EQ(back[2].task, "clustering");
  EXPECT_EQ(back[0].config_digest, "abc");
}

TEST(Reports, TextTable) {
  std::ostringstream out;
  write_reports_text(out, sample_reports());
  EXPECT_EQ(out.str(),
            "termhood\n"
            "method       accuracy  tp\n"
            "-------------------------\n"
            "RF             0.6667   3\n"
            "RF/majority    0.5000   -\n"
            "\n"
            "clustering\n"
            "method         ari\n"
            "------------------\n"
            "STATIC_HAR  1.0000\n");
}

}  // namespace
}  // namespace termforge
