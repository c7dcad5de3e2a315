#include "termforge/set_classifier.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>

#include "termforge/error.h"
#include "termforge/random.h"

namespace termforge {
namespace {

double activate(Activation a, double z) { return a == Activation::kRelu ? std::max(0.0, z) : std::tanh(z); }

double activate_grad(Activation a, double z, double out) {
  return a == Activation::kRelu ? (z > 0 ? 1.0 : 0.0) : 1.0 - out * out;
}

// log(1 + e^z) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

double neumaier_sum(std::span<const double> values) {
  double sum = 0, comp = 0;
  for (double v : values) {
    double t = sum + v;
    comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  return sum + comp;
}

void check_input(const PhiNetwork& net, std::span<const double> x) {
  if (x.size() != net.input_dim) {
    throw Error(ErrorCode::kShape, "input has dimension " + std::to_string(x.size()) + ", network expects " +
                                       std::to_string(net.input_dim));
  }
}

}  // namespace

std::string_view activation_name(Activation a) { return a == Activation::kRelu ? "relu" : "tanh"; }

Activation parse_activation(std::string_view name) {
  if (name == "relu" || name == "RELU") return Activation::kRelu;
  if (name == "tanh" || name == "TANH") return Activation::kTanh;
  throw Error(ErrorCode::kInvalidArgument, "unknown activation '" + std::string(name) + "'");
}

PhiNetwork PhiNetwork::zeros(size_t input_dim, size_t hidden, Activation activation) {
  if (input_dim == 0 || hidden == 0) throw Error(ErrorCode::kShape, "network dimensions must be positive");
  PhiNetwork net;
  net.input_dim = input_dim;
  net.hidden = hidden;
  net.activation = activation;
  net.w1.assign(input_dim * hidden, 0.0);
  net.b1.assign(hidden, 0.0);
  net.w2.assign(hidden, 0.0);
  return net;
}

PhiNetwork PhiNetwork::initialize(size_t input_dim, size_t hidden, Activation activation, uint64_t seed) {
  PhiNetwork net = zeros(input_dim, hidden, activation);
  Rng rng = make_rng(seed);
  double a1 = std::sqrt(6.0 / static_cast<double>(input_dim + hidden));
  for (auto& w : net.w1) w = (2.0 * uniform_unit(rng) - 1.0) * a1;
  double a2 = std::sqrt(6.0 / static_cast<double>(hidden + 1));
  for (auto& w : net.w2) w = (2.0 * uniform_unit(rng) - 1.0) * a2;
  return net;
}

double PhiNetwork::forward(std::span<const double> x) const {
  check_input(*this, x);
  double out = b2;
  for (size_t j = 0; j < hidden; ++j) {
    double z = b1[j];
    for (size_t i = 0; i < input_dim; ++i) z += w1[i * hidden + j] * x[i];
    out += w2[j] * activate(activation, z);
  }
  return out;
}

size_t PhiNetwork::parameter_count() const { return w1.size() + b1.size() + w2.size() + 1; }

std::vector<double> PhiNetwork::flat_parameters() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  flat.insert(flat.end(), w1.begin(), w1.end());
  flat.insert(flat.end(), b1.begin(), b1.end());
  flat.insert(flat.end(), w2.begin(), w2.end());
  flat.push_back(b2);
  return flat;
}

void PhiNetwork::set_flat_parameters(std::span<const double> flat) {
  if (flat.size() != parameter_count()) throw Error(ErrorCode::kShape, "parameter vector has wrong size");
  auto it = flat.begin();
  std::copy_n(it, w1.size(), w1.begin());
  it += static_cast<std::ptrdiff_t>(w1.size());
  std::copy_n(it, b1.size(), b1.begin());
  it += static_cast<std::ptrdiff_t>(b1.size());
  std::copy_n(it, w2.size(), w2.begin());
  it += static_cast<std::ptrdiff_t>(w2.size());
  b2 = *it;
}

void PhiNetwork::write(std::ostream& out) const {
  nlohmann::ordered_json j;
  j["input_dim"] = input_dim;
  j["hidden"] = hidden;
  j["activation"] = activation_name(activation);
  j["w1"] = w1;
  j["b1"] = b1;
  j["w2"] = w2;
  j["b2"] = b2;
  out << j.dump() << '\n';
}

void PhiNetwork::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  write(out);
}

PhiNetwork PhiNetwork::read(std::istream& in) {
  try {
    auto j = nlohmann::json::parse(in);
    PhiNetwork net = zeros(j.at("input_dim").get<size_t>(), j.at("hidden").get<size_t>(),
                           parse_activation(j.at("activation").get<std::string>()));
    auto w1 = j.at("w1").get<std::vector<double>>();
    auto b1 = j.at("b1").get<std::vector<double>>();
    auto w2 = j.at("w2").get<std::vector<double>>();
    if (w1.size() != net.w1.size() || b1.size() != net.b1.size() || w2.size() != net.w2.size()) {
      throw Error(ErrorCode::kShape, "model parameter arrays do not match declared shapes");
    }
    net.w1 = std::move(w1);
    net.b1 = std::move(b1);
    net.w2 = std::move(w2);
    net.b2 = j.at("b2").get<double>();
    for (double v : net.flat_parameters()) {
      if (!std::isfinite(v)) throw Error(ErrorCode::kFormat, "model has a non-finite parameter");
    }
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("model file: ") + e.what());
  }
}

PhiNetwork PhiNetwork::read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return read(in);
}

double pool(std::span<const double> scores, Pooling mode) {
  if (scores.empty()) throw Error(ErrorCode::kInvalidArgument, "cannot pool an empty score list");
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  double sum = neumaier_sum(sorted);
  return mode == Pooling::kSum ? sum : sum / static_cast<double>(sorted.size());
}

double batch_loss(const PhiNetwork& net, std::span<const LabeledContext> batch) {
  if (batch.empty()) throw Error(ErrorCode::kInvalidArgument, "empty batch");
  double total = 0;
  for (const auto& ex : batch) {
    double z = net.forward(ex.x);
    total += softplus(z) - ex.y * z;
  }
  return total / static_cast<double>(batch.size());
}

std::vector<double> loss_gradient(const PhiNetwork& net, std::span<const LabeledContext> batch) {
  if (batch.empty()) throw Error(ErrorCode::kInvalidArgument, "empty batch");
  const size_t d = net.input_dim, h = net.hidden;
  std::vector<double> grad(net.parameter_count(), 0.0);
  double* g_w1 = grad.data();
  double* g_b1 = g_w1 + d * h;
  double* g_w2 = g_b1 + h;
  double* g_b2 = g_w2 + h;
  std::vector<double> pre(h), act(h);
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (const auto& ex : batch) {
    check_input(net, ex.x);
    double z = net.b2;
    for (size_t j = 0; j < h; ++j) {
      double s = net.b1[j];
      for (size_t i = 0; i < d; ++i) s += net.w1[i * h + j] * ex.x[i];
      pre[j] = s;
      act[j] = activate(net.activation, s);
      z += net.w2[j] * act[j];
    }
    const double delta = (sigmoid(z) - ex.y) * scale;
    *g_b2 += delta;
    for (size_t j = 0; j < h; ++j) {
      g_w2[j] += delta * act[j];
      double dh = delta * net.w2[j] * activate_grad(net.activation, pre[j], act[j]);
      g_b1[j] += dh;
      for (size_t i = 0; i < d; ++i) g_w1[i * h + j] += dh * ex.x[i];
    }
  }
  return grad;
}

double gradient_check(const PhiNetwork& net, std::span<const LabeledContext> batch, double eps,
                      const GradientFn& analytic) {
  std::vector<double> g = analytic(net, batch);
  std::vector<double> params = net.flat_parameters();
  if (g.size() != params.size()) throw Error(ErrorCode::kShape, "analytic gradient has wrong size");
  PhiNetwork probe = net;
  double worst = 0;
  for (size_t p = 0; p < params.size(); ++p) {
    const double orig = params[p];
    params[p] = orig + eps;
    probe.set_flat_parameters(params);
    double up = batch_loss(probe, batch);
    params[p] = orig - eps;
    probe.set_flat_parameters(params);
    double down = batch_loss(probe, batch);
    params[p] = orig;
    double numeric = (up - down) / (2 * eps);
    double denom = std::max({std::abs(g[p]), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(g[p] - numeric) / denom);
  }
  return worst;
}

TrainResult train(std::span<const TermExample> dataset, const TrainConfig& config) {
  if (dataset.empty()) throw Error(ErrorCode::kInvalidArgument, "empty training set");
  if (!(config.learning_rate >= 0) || config.batch_size == 0 || config.contexts_per_term == 0) {
    throw Error(ErrorCode::kInvalidArgument, "invalid training configuration");
  }
  std::vector<LabeledContext> examples;
  size_t dim = 0;
  for (const auto& term : dataset) {
    if (term.contexts.empty()) {
      throw Error(ErrorCode::kNoContext, "term '" + term.term + "' has no context vector");
    }
    if (term.label != 0 && term.label != 1) {
      throw Error(ErrorCode::kInvalidArgument, "term '" + term.term + "' has a non-binary label");
    }
    for (size_t c = 0; c < term.contexts.size() && c < config.contexts_per_term; ++c) {
      if (dim == 0) dim = term.contexts[c].size();
      if (term.contexts[c].size() != dim || dim == 0) {
        throw Error(ErrorCode::kShape, "context vectors of '" + term.term + "' have inconsistent dimension");
      }
      examples.push_back({term.contexts[c], static_cast<double>(term.label)});
    }
  }

  TrainResult result;
  result.net = PhiNetwork::initialize(dim, config.hidden, config.activation, config.seed);
  Rng rng = make_rng(derive_seed(config.seed, 1));
  std::vector<size_t> order(examples.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<double> params = result.net.flat_parameters();
  std::vector<double> velocity(params.size(), 0.0);
  std::vector<LabeledContext> batch;

  for (size_t epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle(order, rng);
    for (size_t start = 0; start < order.size(); start += config.batch_size) {
      batch.clear();
      for (size_t i = start; i < std::min(order.size(), start + config.batch_size); ++i) {
        batch.push_back(examples[order[i]]);
      }
      std::vector<double> g = loss_gradient(result.net, batch);
      for (size_t p = 0; p < params.size(); ++p) {
        velocity[p] = config.momentum * velocity[p] + g[p];
        params[p] -= config.learning_rate * velocity[p];
      }
      result.net.set_flat_parameters(params);
    }
    double loss = batch_loss(result.net, examples);
    if (!std::isfinite(loss)) {
      throw Error(ErrorCode::kDivergence, "loss became non-finite at epoch " + std::to_string(epoch + 1));
    }
    result.loss_trace.push_back(loss);
  }
  return result;
}

TermPrediction predict_term(const PhiNetwork& net, std::span<const std::vector<double>> contexts,
                            double threshold, size_t max_contexts) {
  if (contexts.empty()) throw Error(ErrorCode::kNoContext, "no context vector to classify");
  std::vector<double> scores;
  for (size_t i = 0; i < contexts.size() && i < max_contexts; ++i) scores.push_back(net.forward(contexts[i]));
  TermPrediction p;
  p.mean_score = pool(scores, Pooling::kMean);
  p.ambiguous = p.mean_score > threshold;
  return p;
}

DatasetSplit split_terms(size_t n_terms, uint64_t seed, double train_fraction, double dev_fraction) {
  if (train_fraction < 0 || dev_fraction < 0 || train_fraction + dev_fraction > 1) {
    throw Error(ErrorCode::kInvalidArgument, "split fractions must be non-negative and sum to at most 1");
  }
  std::vector<size_t> order(n_terms);
  for (size_t i = 0; i < n_terms; ++i) order[i] = i;
  Rng rng = make_rng(seed);
  shuffle(order, rng);
  auto n_train = static_cast<size_t>(std::llround(train_fraction * static_cast<double>(n_terms)));
  auto n_dev = static_cast<size_t>(std::llround(dev_fraction * static_cast<double>(n_terms)));
  n_dev = std::min(n_dev, n_terms - n_train);
  DatasetSplit s;
  s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.dev.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
               order.begin() + static_cast<std::ptrdiff_t>(n_train + n_dev));
  s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_dev), order.end());
  for (auto* v : {&s.train, &s.dev, &s.test}) std::sort(v->begin(), v->end());
  return s;
}

double term_accuracy(const PhiNetwork& net, std::span<const TermExample> dataset,
                     std::span<const size_t> indices, double threshold, size_t max_contexts) {
  if (indices.empty()) throw Error(ErrorCode::kInvalidArgument, "no terms to evaluate");
  size_t correct = 0;
  for (size_t idx : indices) {
    const auto& t = dataset[idx];
    bool predicted = predict_term(net, t.contexts, threshold, max_contexts).ambiguous;
    if (predicted == (t.label == 1)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(indices.size());
}

void write_loss_trace(std::ostream& out, std::span<const double> trace) {
  out << "epoch,loss\n";
  char buf[64];
  for (size_t i = 0; i < trace.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", trace[i]);
    out << (i + 1) << ',' << buf << '\n';
  }
}

}  // namespace termforge
