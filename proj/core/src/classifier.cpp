#include "embinv/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "embinv/optim.hpp"
#include "embinv/rng.hpp"

namespace embinv {

void LabeledEmbeddings::validate() const {
  if (labels.size() != embeddings.rows) {
    throw std::invalid_argument("labeled embeddings: label count does not match rows");
  }
  if (num_classes < 1) throw std::invalid_argument("labeled embeddings: num_classes must be >= 1");
  if (embeddings.rows < num_classes) {
    throw std::invalid_argument("labeled embeddings: need at least one sample per class");
  }
  for (int label : labels) {
    if (label < 0 || static_cast<std::size_t>(label) >= num_classes) {
      throw std::invalid_argument("labeled embeddings: label out of range");
    }
  }
}

namespace {

struct MlpForward {
  std::vector<double> hidden;  // tanh activations
  Vector probs;
};

MlpForward mlp_forward(const MlpClassifier& model, const Vector& x) {
  MlpForward f;
  f.hidden.resize(model.hidden_dim);
  for (std::size_t i = 0; i < model.hidden_dim; ++i) {
    f.hidden[i] =
        std::tanh(dot(model.w1.row(i), std::span<const double>(x.data)) + model.b1[i]);
  }
  Vector logits(model.num_classes);
  for (std::size_t i = 0; i < model.num_classes; ++i) {
    logits[i] = dot(model.w2.row(i), std::span<const double>(f.hidden)) + model.b2[i];
  }
  const double max_logit = *std::max_element(logits.data.begin(), logits.data.end());
  double z = 0.0;
  f.probs = Vector(model.num_classes);
  for (std::size_t i = 0; i < model.num_classes; ++i) {
    f.probs[i] = std::exp(logits[i] - max_logit);
    z += f.probs[i];
  }
  for (double& p : f.probs.data) p /= z;
  return f;
}

MlpGradients zero_gradients(const MlpClassifier& model) {
  MlpGradients g;
  g.w1 = Matrix(model.w1.rows, model.w1.cols);
  g.b1 = Vector(model.b1.dim());
  g.w2 = Matrix(model.w2.rows, model.w2.cols);
  g.b2 = Vector(model.b2.dim());
  return g;
}

double accuracy(const MlpClassifier& model, const LabeledEmbeddings& data) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.embeddings.rows; ++i) {
    if (model.predict(data.embeddings.row_vector(i)) == data.labels[i]) ++correct;
  }
  return 100.0 * static_cast<double>(correct) / static_cast<double>(data.embeddings.rows);
}

}  // namespace

Vector MlpClassifier::class_distribution(const Vector& x) const {
  if (x.dim() != input_dim) throw std::invalid_argument("classifier: input dimension mismatch");
  return mlp_forward(*this, x).probs;
}

int MlpClassifier::predict(const Vector& x) const {
  const Vector probs = class_distribution(x);
  int best = 0;
  double best_p = probs[0];
  for (std::size_t i = 1; i < probs.dim(); ++i) {
    if (probs[i] > best_p) {
      best_p = probs[i];
      best = static_cast<int>(i);
    }
  }
  return best;
}

double classifier_loss(const MlpClassifier& model, const Vector& x, int label,
                       MlpGradients* grads) {
  const MlpForward f = mlp_forward(model, x);
  const double p = f.probs[static_cast<std::size_t>(label)];
  const double loss = -std::log(std::max(p, 1e-300));
  if (grads == nullptr) return loss;

  std::vector<double> dlogits(f.probs.data);
  dlogits[static_cast<std::size_t>(label)] -= 1.0;

  std::vector<double> dhidden(model.hidden_dim, 0.0);
  for (std::size_t i = 0; i < model.num_classes; ++i) {
    const double d = dlogits[i];
    grads->b2[i] += d;
    auto gw = grads->w2.row(i);
    const auto wrow = model.w2.row(i);
    for (std::size_t j = 0; j < model.hidden_dim; ++j) {
      gw[j] += d * f.hidden[j];
      dhidden[j] += d * wrow[j];
    }
  }
  for (std::size_t i = 0; i < model.hidden_dim; ++i) {
    const double dz = dhidden[i] * (1.0 - f.hidden[i] * f.hidden[i]);
    grads->b1[i] += dz;
    auto gw = grads->w1.row(i);
    for (std::size_t j = 0; j < model.input_dim; ++j) gw[j] += dz * x[j];
  }
  return loss;
}

MlpClassifier train_classifier(const LabeledEmbeddings& train, const LabeledEmbeddings& dev,
                               const MlpClassifierConfig& config,
                               ClassifierTrainHistory* history) {
  train.validate();
  dev.validate();
  if (train.embeddings.cols != dev.embeddings.cols) {
    throw std::invalid_argument("train_classifier: train/dev dimensions differ");
  }
  if (config.epochs < 1) throw std::invalid_argument("train_classifier: epochs must be >= 1");

  std::vector<std::size_t> class_counts(train.num_classes, 0);
  for (int label : train.labels) ++class_counts[static_cast<std::size_t>(label)];
  for (std::size_t c = 0; c < train.num_classes; ++c) {
    if (class_counts[c] == 0) {
      throw std::invalid_argument("train_classifier: class " + std::to_string(c) +
                                  " absent from the training set");
    }
  }

  MlpClassifier model;
  model.input_dim = train.embeddings.cols;
  model.hidden_dim = config.hidden_dim;
  model.num_classes = train.num_classes;

  PhiloxRng rng(config.seed);
  model.w1 = Matrix(model.hidden_dim, model.input_dim);
  const double w1_scale = 1.0 / std::sqrt(static_cast<double>(model.input_dim));
  for (double& x : model.w1.data) x = w1_scale * rng.next_gaussian();
  model.b1 = Vector(model.hidden_dim);
  model.w2 = Matrix(model.num_classes, model.hidden_dim);
  const double w2_scale = 1.0 / std::sqrt(static_cast<double>(model.hidden_dim));
  for (double& x : model.w2.data) x = w2_scale * rng.next_gaussian();
  model.b2 = Vector(model.num_classes);

  const AdamW::Config opt_config{config.lr, config.weight_decay, 0.9, 0.999, 1e-8};
  AdamW opt_w1(model.w1.data.size(), opt_config);
  AdamW opt_b1(model.b1.data.size(), opt_config);
  AdamW opt_w2(model.w2.data.size(), opt_config);
  AdamW opt_b2(model.b2.data.size(), opt_config);

  const std::size_t batch = std::max<std::size_t>(1, config.batch);
  std::vector<std::size_t> order(train.embeddings.rows);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  MlpClassifier best_model = model;
  double best_dev_acc = -1.0;
  std::size_t best_epoch = 0;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    PhiloxRng shuffle_rng(config.seed, epoch + 1);
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[shuffle_rng.next_below(i)]);
    }

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(start + batch, order.size());
      MlpGradients grads = zero_gradients(model);
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t idx = order[k];
        epoch_loss +=
            classifier_loss(model, train.embeddings.row_vector(idx), train.labels[idx], &grads);
      }
      const double inv = 1.0 / static_cast<double>(end - start);
      for (double& x : grads.w1.data) x *= inv;
      for (double& x : grads.b1.data) x *= inv;
      for (double& x : grads.w2.data) x *= inv;
      for (double& x : grads.b2.data) x *= inv;
      opt_w1.step(model.w1.data, grads.w1.data);
      opt_b1.step(model.b1.data, grads.b1.data);
      opt_w2.step(model.w2.data, grads.w2.data);
      opt_b2.step(model.b2.data, grads.b2.data);
    }

    const double dev_acc = accuracy(model, dev);
    if (history != nullptr) {
      history->train_loss.push_back(epoch_loss / static_cast<double>(order.size()));
      history->dev_acc.push_back(dev_acc);
    }
    if (dev_acc > best_dev_acc) {  // ties keep the earlier checkpoint
      best_dev_acc = dev_acc;
      best_model = model;
      best_epoch = epoch;
    }
  }
  if (history != nullptr) history->best_epoch = best_epoch;
  return best_model;
}

EvalResult evaluate_classifier(const MlpClassifier& model, const LabeledEmbeddings& test) {
  if (test.embeddings.rows == 0) {
    throw std::invalid_argument("evaluate_classifier: empty test set");
  }
  test.validate();
  if (test.embeddings.cols != model.input_dim) {
    throw std::invalid_argument("evaluate_classifier: dimension mismatch");
  }

  const std::size_t c = model.num_classes;
  std::vector<std::size_t> tp(c, 0), fp(c, 0), fn(c, 0), support(c, 0);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < test.embeddings.rows; ++i) {
    const int truth = test.labels[i];
    const int pred = model.predict(test.embeddings.row_vector(i));
    ++support[static_cast<std::size_t>(truth)];
    if (pred == truth) {
      ++correct;
      ++tp[static_cast<std::size_t>(truth)];
    } else {
      ++fp[static_cast<std::size_t>(pred)];
      ++fn[static_cast<std::size_t>(truth)];
    }
  }

  EvalResult result;
  result.acc = 100.0 * static_cast<double>(correct) / static_cast<double>(test.embeddings.rows);
  double f1_sum = 0.0;
  for (std::size_t k = 0; k < c; ++k) {
    PerClassResult pc;
    pc.cls = static_cast<int>(k);
    pc.support = support[k];
    const double denom_p = static_cast<double>(tp[k] + fp[k]);
    const double denom_r = static_cast<double>(tp[k] + fn[k]);
    const double precision = denom_p > 0.0 ? static_cast<double>(tp[k]) / denom_p : 0.0;
    const double recall = denom_r > 0.0 ? static_cast<double>(tp[k]) / denom_r : 0.0;
    const double f1 =
        precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    pc.precision = 100.0 * precision;
    pc.recall = 100.0 * recall;
    pc.f1 = 100.0 * f1;
    f1_sum += pc.f1;
    result.per_class.push_back(pc);
  }
  result.f1_macro = f1_sum / static_cast<double>(c);
  return result;
}

}  // namespace embinv
