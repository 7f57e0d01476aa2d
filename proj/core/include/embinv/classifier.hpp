#pragma once

#include <cstdint>
#include <vector>

#include "embinv/matrix.hpp"

namespace embinv {

// Embedding rows with integer class labels in [0, num_classes).
struct LabeledEmbeddings {
  Matrix embeddings;
  std::vector<int> labels;
  std::size_t num_classes = 0;

  void validate() const;  // throws std::invalid_argument on violations
};

struct MlpClassifierConfig {
  std::size_t hidden_dim = 256;
  double lr = 1e-3;
  double weight_decay = 0.0;
  std::size_t epochs = 6;
  std::size_t batch = 32;
  std::uint64_t seed = 0;
};

// Two-layer perceptron: dense n->h with tanh, dense h->C, softmax readout.
class MlpClassifier {
public:
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  std::size_t num_classes = 0;

  Matrix w1;  // h x n
  Vector b1;  // h
  Matrix w2;  // C x h
  Vector b2;  // C

  Vector class_distribution(const Vector& x) const;  // softmax, sums to 1
  int predict(const Vector& x) const;
};

struct MlpGradients {
  Matrix w1;
  Vector b1;
  Matrix w2;
  Vector b2;
};

// Cross-entropy of one labeled sample; accumulates analytic gradients when
// `grads` is non-null.
double classifier_loss(const MlpClassifier& model, const Vector& x, int label,
                       MlpGradients* grads = nullptr);

struct ClassifierTrainHistory {
  std::vector<double> train_loss;  // one entry per epoch
  std::vector<double> dev_acc;     // one checkpoint per epoch, x100
  std::size_t best_epoch = 0;
};

// Trains for config.epochs epochs and returns the epoch checkpoint with the
// highest dev accuracy. Throws std::invalid_argument when a class is absent
// from the training set.
MlpClassifier train_classifier(const LabeledEmbeddings& train, const LabeledEmbeddings& dev,
                               const MlpClassifierConfig& config,
                               ClassifierTrainHistory* history = nullptr);

struct PerClassResult {
  int cls = 0;
  double precision = 0.0;  // x100
  double recall = 0.0;     // x100
  double f1 = 0.0;         // x100
  std::size_t support = 0;
};

struct EvalResult {
  double acc = 0.0;       // x100
  double f1_macro = 0.0;  // x100
  std::vector<PerClassResult> per_class;
};

// Accuracy and macro-F1 (x100). Throws std::invalid_argument on an empty
// test set.
EvalResult evaluate_classifier(const MlpClassifier& model, const LabeledEmbeddings& test);

}  // namespace embinv
