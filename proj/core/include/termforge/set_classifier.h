#ifndef TERMFORGE_SET_CLASSIFIER_H_
#define TERMFORGE_SET_CLASSIFIER_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace termforge {

enum class Activation { kRelu, kTanh };
std::string_view activation_name(Activation a);
Activation parse_activation(std::string_view name);

// phi: input -> hidden (activation) -> one logit.
// w1 is input_dim x hidden, row-major: w1[i * hidden + j] feeds input i
// into hidden unit j.
struct PhiNetwork {
  size_t input_dim = 0;
  size_t hidden = 0;
  Activation activation = Activation::kRelu;
  std::vector<double> w1;
  std::vector<double> b1;
  std::vector<double> w2;
  double b2 = 0;

  static PhiNetwork zeros(size_t input_dim, size_t hidden, Activation activation);
  // Glorot-uniform weights, zero biases.
  static PhiNetwork initialize(size_t input_dim, size_t hidden, Activation activation, uint64_t seed);

  double forward(std::span<const double> x) const;

  size_t parameter_count() const;
  // Order: w1, b1, w2, b2.
  std::vector<double> flat_parameters() const;
  void set_flat_parameters(std::span<const double> flat);

  void write(std::ostream& out) const;
  void write(const std::filesystem::path& path) const;
  static PhiNetwork read(std::istream& in);
  static PhiNetwork read(const std::filesystem::path& path);

  bool operator==(const PhiNetwork&) const = default;
};

enum class Pooling { kSum, kMean };

// Order-independent: scores are summed in sorted order.
double pool(std::span<const double> scores, Pooling mode = Pooling::kMean);

struct LabeledContext {
  std::vector<double> x;
  double y = 0;  // 1 = ambiguous (AWT), 0 = NAWT
};

// Mean sigmoid cross-entropy over the batch.
double batch_loss(const PhiNetwork& net, std::span<const LabeledContext> batch);
// Gradient of batch_loss, flattened like flat_parameters().
std::vector<double> loss_gradient(const PhiNetwork& net, std::span<const LabeledContext> batch);

using GradientFn =
    std::function<std::vector<double>(const PhiNetwork&, std::span<const LabeledContext>)>;

// Max over parameters of |analytic - numeric| / max(|analytic|, |numeric|, 1e-6),
// numeric by central differences of step eps.
double gradient_check(const PhiNetwork& net, std::span<const LabeledContext> batch, double eps = 1e-5,
                      const GradientFn& analytic = loss_gradient);

struct TermExample {
  std::string term;
  int label = 0;  // 1 = AWT, 0 = NAWT
  std::vector<std::vector<double>> contexts;
};

struct TrainConfig {
  double learning_rate = 0.05;
  size_t epochs = 100;
  size_t batch_size = 32;
  uint64_t seed = 0;
  size_t contexts_per_term = 100;
  size_t hidden = 20;
  Activation activation = Activation::kRelu;
  double momentum = 0;
};

struct TrainResult {
  PhiNetwork net;
  std::vector<double> loss_trace;  // full-data loss after each epoch
};

// Every (context, term label) pair is one training example; mini-batch
// SGD on sigmoid cross-entropy. Non-finite loss raises kDivergence.
TrainResult train(std::span<const TermExample> dataset, const TrainConfig& config);

struct TermPrediction {
  bool ambiguous = false;
  double mean_score = 0;
};

// Averages per-context logits; ambiguous iff the mean exceeds threshold.
TermPrediction predict_term(const PhiNetwork& net, std::span<const std::vector<double>> contexts,
                            double threshold = 0.0, size_t max_contexts = 100);

struct DatasetSplit {
  std::vector<size_t> train;
  std::vector<size_t> dev;
  std::vector<size_t> test;
};

// Seeded shuffle of term indices into train/dev/test fractions.
DatasetSplit split_terms(size_t n_terms, uint64_t seed, double train_fraction = 0.2,
                         double dev_fraction = 0.2);

double term_accuracy(const PhiNetwork& net, std::span<const TermExample> dataset,
                     std::span<const size_t> indices, double threshold = 0.0,
                     size_t max_contexts = 100);

void write_loss_trace(std::ostream& out, std::span<const double> trace);

}  // namespace termforge

#endif  // TERMFORGE_SET_CLASSIFIER_H_
