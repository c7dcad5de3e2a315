#include "termforge/set_classifier.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
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

std::vector<TermExample> separable_dataset(size_t terms_per_class, size_t contexts, size_t dim, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 0.5);
  std::vector<TermExample> out;
  for (int label : {1, 0}) {
    for (size_t t = 0; t < terms_per_class; ++t) {
      TermExample ex;
      ex.term = (label ? "awt" : "nawt") + std::to_string(t);
      ex.label = label;
      for (size_t c = 0; c < contexts; ++c) {
        std::vector<double> x(dim);
        for (auto& v : x) v = (label ? 1.0 : -1.0) + nd(rng);
        ex.contexts.push_back(x);
      }
      out.push_back(ex);
    }
  }
  return out;
}

TEST(Phi, ZeroNetworkScoresZero) {
  auto net = PhiNetwork::zeros(4, 3, Activation::kRelu);
  std::vector<double> x{1, -2, 3, 4};
  EXPECT_EQ(net.forward(x), 0.0);
  auto p = predict_term(net, std::vector<std::vector<double>>{x, x});
  EXPECT_EQ(p.mean_score, 0.0);
  EXPECT_FALSE(p.ambiguous);
  EXPECT_EQ(code_of([] { PhiNetwork::zeros(0, 3, Activation::kRelu); }), ErrorCode::kShape);
}

TEST(Phi, OneByOneNetwork) {
  auto net = PhiNetwork::zeros(1, 1, Activation::kRelu);
  net.w1 = {1.0};
  net.w2 = {2.0};
  EXPECT_EQ(net.forward(std::vector<double>{1.0}), 2.0);
  EXPECT_EQ(net.forward(std::vector<double>{-1.0}), 0.0);
  net.activation = Activation::kTanh;
  EXPECT_DOUBLE_EQ(net.forward(std::vector<double>{1.0}), 2.0 * std::tanh(1.0));
  EXPECT_EQ(code_of([&] { net.forward(std::vector<double>{1.0, 2.0}); }), ErrorCode::kShape);
}

TEST(Phi, ForwardMatchesOracle) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  for (auto act : {Activation::kRelu, Activation::kTanh}) {
    auto net = PhiNetwork::initialize(6, 5, act, 42);
    for (auto& b : net.b1) b = nd(rng);
    net.b2 = nd(rng);
    std::vector<std::vector<double>> W1(6, std::vector<double>(5));
    for (size_t i = 0; i < 6; ++i) {
      for (size_t j = 0; j < 5; ++j) W1[i][j] = net.w1[i * 5 + j];
    }
    for (int t = 0; t < 50; ++t) {
      std::vector<double> x(6);
      for (auto& v : x) v = nd(rng);
      EXPECT_NEAR(net.forward(x), oracle::mlp(W1, net.b1, net.w2, net.b2, x, act == Activation::kRelu), 1e-12);
    }
  }
}

TEST(Phi, InitializationBoundsAndDeterminism) {
  auto a = PhiNetwork::initialize(10, 20, Activation::kRelu, 7);
  auto b = PhiNetwork::initialize(10, 20, Activation::kRelu, 7);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, PhiNetwork::initialize(10, 20, Activation::kRelu, 8));
  const double l1 = std::sqrt(6.0 / 30.0), l2 = std::sqrt(6.0 / 21.0);
  for (double w : a.w1) EXPECT_LE(std::abs(w), l1);
  for (double w : a.w2) EXPECT_LE(std::abs(w), l2);
  EXPECT_EQ(a.parameter_count(), 10u * 20 + 20 + 20 + 1);
  auto flat = a.flat_parameters();
  auto c = PhiNetwork::zeros(10, 20, Activation::kRelu);
  c.set_flat_parameters(flat);
  EXPECT_EQ(c, a);
}

TEST(Pool, ExamplesAndInvariance) {
  std::vector<double> s{3, 1, 2};
  EXPECT_EQ(pool(s), 2.0);
  EXPECT_EQ(pool(s, Pooling::kSum), 6.0);
  EXPECT_EQ(code_of([] { pool(std::vector<double>{}); }), ErrorCode::kInvalidArgument);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ud(-1e6, 1e6);
  std::vector<double> v(200);
  for (auto& x : v) x = ud(rng);
  double ref = pool(v);
  for (int t = 0; t < 20; ++t) {
    std::shuffle(v.begin(), v.end(), rng);
    EXPECT_EQ(pool(v), ref);
  }
}

TEST(Predict, PermutationAndDuplicationInvariance) {
  auto net = PhiNetwork::initialize(3, 4, Activation::kTanh, 5);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> nd;
  std::vector<std::vector<double>> ctx(7, std::vector<double>(3));
  for (auto& c : ctx) {
    for (auto& x : c) x = nd(rng);
  }
  auto ref = predict_term(net, ctx);
  auto shuffled = ctx;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  EXPECT_EQ(predict_term(net, shuffled).mean_score, ref.mean_score);
  auto doubled = ctx;
  doubled.insert(doubled.end(), ctx.begin(), ctx.end());
  EXPECT_NEAR(predict_term(net, doubled).mean_score, ref.mean_score, 1e-12);
  EXPECT_EQ(code_of([&] { predict_term(net, std::vector<std::vector<double>>{}); }), ErrorCode::kNoContext);
}

TEST(Predict, ThresholdTieIsNotAmbiguous) {
  auto net = PhiNetwork::zeros(1, 1, Activation::kRelu);
  net.b2 = 0.5;
  std::vector<std::vector<double>> ctx{{1.0}};
  EXPECT_TRUE(predict_term(net, ctx, 0.0).ambiguous);
  EXPECT_FALSE(predict_term(net, ctx, 0.5).ambiguous);
}

TEST(Gradient, AnalyticMatchesNumeric) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd;
  std::vector<LabeledContext> batch;
  for (int i = 0; i < 16; ++i) {
    LabeledContext c;
    c.x.resize(5);
    for (auto& x : c.x) x = nd(rng);
    c.y = i % 2;
    batch.push_back(c);
  }
  for (auto act : {Activation::kRelu, Activation::kTanh}) {
    auto net = PhiNetwork::initialize(5, 8, act, 11);
    net.b2 = 0.3;
    EXPECT_LE(gradient_check(net, batch), 1e-4) << activation_name(act);
  }
  auto zero = PhiNetwork::zeros(5, 8, Activation::kTanh);
  EXPECT_LE(gradient_check(zero, batch), 1e-4);

  auto net = PhiNetwork::initialize(5, 8, Activation::kTanh, 11);
  GradientFn corrupted = [](const PhiNetwork& n, std::span<const LabeledContext> b) {
    auto g = loss_gradient(n, b);
    g[3] *= 1.5;
    return g;
  };
  EXPECT_GT(gradient_check(net, batch, 1e-5, corrupted), 1e-2);
}

TEST(Train, ZeroLearningRateLeavesInitialWeights) {
  auto data = separable_dataset(3, 4, 2, 1);
  TrainConfig cfg;
  cfg.learning_rate = 0;
  cfg.epochs = 3;
  cfg.hidden = 4;
  cfg.seed = 21;
  auto r = train(data, cfg);
  EXPECT_EQ(r.net, PhiNetwork::initialize(2, 4, Activation::kRelu, 21));
  ASSERT_EQ(r.loss_trace.size(), 3u);
  EXPECT_EQ(r.loss_trace[0], r.loss_trace[2]);
}

TEST(Train, FullBatchLossIsNonIncreasing) {
  auto data = separable_dataset(4, 5, 3, 2);
  TrainConfig cfg;
  cfg.learning_rate = 0.01;
  cfg.epochs = 40;
  cfg.batch_size = 1000;
  cfg.hidden = 6;
  cfg.seed = 3;
  auto r = train(data, cfg);
  for (size_t i = 1; i < r.loss_trace.size(); ++i) EXPECT_LE(r.loss_trace[i], r.loss_trace[i - 1] + 1e-12) << i;
  EXPECT_LT(r.loss_trace.back(), r.loss_trace.front());
}

TEST(Train, SeparableDataIsLearned) {
  auto data = separable_dataset(30, 10, 4, 3);
  auto split = split_terms(data.size(), 5, 0.6, 0.0);
  std::vector<TermExample> train_set;
  for (size_t i : split.train) train_set.push_back(data[i]);
  TrainConfig cfg;
  cfg.epochs = 30;
  cfg.seed = 1;
  auto r = train(train_set, cfg);
  EXPECT_GE(term_accuracy(r.net, data, split.test), 0.95);
}

TEST(Train, DeterministicForAFixedSeed) {
  auto data = separable_dataset(5, 4, 3, 4);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.batch_size = 3;
  cfg.seed = 8;
  cfg.momentum = 0.9;
  auto a = train(data, cfg);
  auto b = train(data, cfg);
  EXPECT_EQ(a.net, b.net);
  EXPECT_EQ(a.loss_trace, b.loss_trace);
}

TEST(Train, InputErrors) {
  TrainConfig cfg;
  cfg.epochs = 1;
  EXPECT_EQ(code_of([&] { train(std::vector<TermExample>{}, cfg); }), ErrorCode::kInvalidArgument);
  std::vector<TermExample> no_ctx{{"t", 1, {}}};
  EXPECT_EQ(code_of([&] { train(no_ctx, cfg); }), ErrorCode::kNoContext);
  std::vector<TermExample> bad_label{{"t", 2, {{1.0}}}};
  EXPECT_EQ(code_of([&] { train(bad_label, cfg); }), ErrorCode::kInvalidArgument);
  std::vector<TermExample> ragged{{"t", 1, {{1.0}}}, {"u", 0, {{1.0, 2.0}}}};
  EXPECT_EQ(code_of([&] { train(ragged, cfg); }), ErrorCode::kShape);
}

TEST(Train, DivergenceIsReported) {
  auto data = separable_dataset(3, 3, 2, 5);
  for (auto& t : data) {
    for (auto& c : t.contexts) {
      for (auto& x : c) x *= 1e150;
    }
  }
  TrainConfig cfg;
  cfg.learning_rate = 1e150;
  cfg.epochs = 5;
  cfg.activation = Activation::kRelu;
  EXPECT_EQ(code_of([&] { train(data, cfg); }), ErrorCode::kDivergence);
}

TEST(Model, JsonRoundTrip) {
  auto net = PhiNetwork::initialize(3, 4, Activation::kTanh, 99);
  net.b1[2] = 1.0 / 3.0;
  std::stringstream ss;
  net.write(ss);
  EXPECT_EQ(PhiNetwork::read(ss), net);
  std::istringstream bad("{\"input_dim\": 3}");
  EXPECT_THROW(PhiNetwork::read(bad), Error);
}

TEST(Split, PartitionsAllTermsDeterministically) {
  auto s = split_terms(50, 7);
  EXPECT_EQ(s.train.size(), 10u);
  EXPECT_EQ(s.dev.size(), 10u);
  EXPECT_EQ(s.test.size(), 30u);
  std::set<size_t> all;
  for (auto* part : {&s.train, &s.dev, &s.test}) {
    EXPECT_TRUE(std::is_sorted(part->begin(), part->end()));
    all.insert(part->begin(), part->end());
  }
  EXPECT_EQ(all.size(), 50u);
  auto again = split_terms(50, 7);
  EXPECT_EQ(again.train, s.train);
  EXPECT_NE(split_terms(50, 8).train, s.train);
}

TEST(LossTrace, Csv) {
  std::ostringstream out;
  std::vector<double> t{0.5, 0.25};
  write_loss_trace(out, t);
  EXPECT_EQ(out.str(), "epoch,loss\n1,0.5\n2,0.25\n");
}

}  // namespace
}  // namespace termforge
