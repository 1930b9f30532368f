#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "eeg/error.hpp"

namespace eeg {

struct MlpHyperparams {
  std::uint32_t hidden = 128;
  std::uint32_t epochs = 200;
  double learning_rate = 0.01;
  std::uint64_t seed = 0;

  bool operator==(const MlpHyperparams&) const = default;
};

/// One-hidden-layer ReLU network with a 2-way output, used to probe how
/// separable each layer is. Weights are row-major.
struct MlpClassifier {
  std::uint32_t layer_index = 0;
  std::uint32_t input_dim = 0;
  std::uint32_t hidden = 0;
  std::vector<double> w1;  // hidden x input_dim
  std::vector<double> b1;  // hidden
  std::vector<double> w2;  // 2 x hidden
  std::vector<double> b2;  // 2
  MlpHyperparams training;
  double training_accuracy = 0.0;

  bool operator==(const MlpClassifier&) const = default;
};

struct MlpExample {
  std::span<const float> features;
  int label = 0;
};

struct MlpPrediction {
  int label = 0;
  double logit_benign = 0.0;
  double logit_harmful = 0.0;
  double probability_harmful = 0.5;
};

inline void validate_mlp(const MlpClassifier& clf) {
  const std::size_t d = clf.input_dim;
  const std::size_t h = clf.hidden;
  if (d == 0 || h == 0 || clf.w1.size() != h * d || clf.b1.size() != h ||
      clf.w2.size() != 2 * h || clf.b2.size() != 2) {
    throw Error(ErrorKind::InvalidArgument, "mlp weights are dimensionally inconsistent");
  }
  auto finite = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  if (!finite(clf.w1) || !finite(clf.b1) || !finite(clf.w2) || !finite(clf.b2)) {
    throw Error(ErrorKind::InvalidArgument, "mlp parameters are not finite");
  }
}

namespace detail {

// Uniform in [-1, 1) from raw engine bits so the stream is identical across
// standard library implementations.
inline double symmetric_uniform(std::mt19937_64& rng) {
  const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return 2.0 * unit - 1.0;
}

template <typename T>
void mlp_forward(const MlpClassifier& clf, std::span<const T> x, std::vector<double>& hidden,
                 double logits[2]) {
  const std::size_t d = clf.input_dim;
  hidden.resize(clf.hidden);
  for (std::size_t j = 0; j < clf.hidden; ++j) {
    const double* row = clf.w1.data() + j * d;
    double acc = clf.b1[j];
    for (std::size_t i = 0; i < d; ++i) acc += row[i] * static_cast<double>(x[i]);
    hidden[j] = acc > 0.0 ? acc : 0.0;
  }
  for (std::size_t k = 0; k < 2; ++k) {
    const double* row = clf.w2.data() + k * clf.hidden;
    double acc = clf.b2[k];
    for (std::size_t j = 0; j < clf.hidden; ++j) acc += row[j] * hidden[j];
    logits[k] = acc;
  }
}

}  // namespace detail

template <typename T>
MlpPrediction mlp_predict(const MlpClassifier& clf, std::span<const T> embedding) {
  if (embedding.size() != clf.input_dim) {
    throw Error(ErrorKind::ShapeMismatch, "mlp input length " + std::to_string(embedding.size()) +
                                              " != " + std::to_string(clf.input_dim));
  }
  std::vector<double> hidden;
  double logits[2];
  detail::mlp_forward(clf, embedding, hidden, logits);
  MlpPrediction out;
  out.logit_benign = logits[0];
  out.logit_harmful = logits[1];
  out.label = logits[1] > logits[0] ? 1 : 0;
  out.probability_harmful = 1.0 / (1.0 + std::exp(logits[0] - logits[1]));
  return out;
}

template <typename T>
MlpPrediction mlp_predict(const MlpClassifier& clf, const std::vector<T>& embedding) {
  return mlp_predict(clf, std::span<const T>(embedding));
}

/// Full-batch gradient descent on mean softmax cross-entropy.
/// Deterministic for a fixed seed and example order.
inline MlpClassifier fit_mlp(std::uint32_t layer, std::span<const MlpExample> examples,
                             const MlpHyperparams& params = {}) {
  if (examples.empty()) throw Error(ErrorKind::InvalidArgument, "no training examples");
  if (params.hidden == 0 || params.epochs == 0 || !(params.learning_rate > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "invalid mlp hyperparameters");
  }
  const std::size_t d = examples.front().features.size();
  if (d == 0) throw Error(ErrorKind::InvalidArgument, "empty feature vector");
  std::size_t positives = 0;
  for (std::size_t n = 0; n < examples.size(); ++n) {
    const auto& ex = examples[n];
    if (ex.features.size() != d) {
      throw Error(ErrorKind::ShapeMismatch, "example " + std::to_string(n) + " has length " +
                                                std::to_string(ex.features.size()) +
                                                ", expected " + std::to_string(d));
    }
    if (ex.label != 0 && ex.label != 1) {
      throw Error(ErrorKind::InvalidArgument, "example " + std::to_string(n) + " label not in {0,1}");
    }
    for (float v : ex.features) {
      if (!std::isfinite(v)) {
        throw Error(ErrorKind::InvalidArgument, "example " + std::to_string(n) + " is not finite");
      }
    }
    positives += static_cast<std::size_t>(ex.label);
  }
  if (positives == 0 || positives == examples.size()) {
    throw Error(ErrorKind::EmptyClass, "single-class input");
  }

  const std::size_t h = params.hidden;
  MlpClassifier clf;
  clf.layer_index = layer;
  clf.input_dim = static_cast<std::uint32_t>(d);
  clf.hidden = params.hidden;
  clf.training = params;
  clf.w1.resize(h * d);
  clf.b1.assign(h, 0.0);
  clf.w2.resize(2 * h);
  clf.b2.assign(2, 0.0);

  std::mt19937_64 rng(params.seed);
  const double scale1 = 1.0 / std::sqrt(static_cast<double>(d));
  const double scale2 = 1.0 / std::sqrt(static_cast<double>(h));
  for (auto& w : clf.w1) w = scale1 * detail::symmetric_uniform(rng);
  for (auto& w : clf.w2) w = scale2 * detail::symmetric_uniform(rng);

  std::vector<double> g_w1(h * d), g_b1(h), g_w2(2 * h), g_b2(2);
  std::vector<double> hidden(h), d_hidden(h);
  const double inv_n = 1.0 / static_cast<double>(examples.size());

  for (std::uint32_t epoch = 0; epoch < params.epochs; ++epoch) {
    std::fill(g_w1.begin(), g_w1.end(), 0.0);
    std::fill(g_b1.begin(), g_b1.end(), 0.0);
    std::fill(g_w2.begin(), g_w2.end(), 0.0);
    std::fill(g_b2.begin(), g_b2.end(), 0.0);

    for (const auto& ex : examples) {
      double logits[2];
      detail::mlp_forward(clf, ex.features, hidden, logits);
      const double m = std::max(logits[0], logits[1]);
      const double e0 = std::exp(logits[0] - m);
      const double e1 = std::exp(logits[1] - m);
      const double p1 = e1 / (e0 + e1);
      const double dz[2] = {(1.0 - p1) - (ex.label == 0 ? 1.0 : 0.0),
                            p1 - (ex.label == 1 ? 1.0 : 0.0)};
      for (std::size_t k = 0; k < 2; ++k) {
        g_b2[k] += dz[k];
        double* row = g_w2.data() + k * h;
        for (std::size_t j = 0; j < h; ++j) row[j] += dz[k] * hidden[j];
      }
      for (std::size_t j = 0; j < h; ++j) {
        d_hidden[j] = hidden[j] > 0.0 ? dz[0] * clf.w2[j] + dz[1] * clf.w2[h + j] : 0.0;
      }
      for (std::size_t j = 0; j < h; ++j) {
        if (d_hidden[j] == 0.0) continue;
        g_b1[j] += d_hidden[j];
        double* row = g_w1.data() + j * d;
        for (std::size_t i = 0; i < d; ++i) row[i] += d_hidden[j] * ex.features[i];
      }
    }

    const double step = params.learning_rate * inv_n;
    for (std::size_t i = 0; i < clf.w1.size(); ++i) clf.w1[i] -= step * g_w1[i];
    for (std::size_t i = 0; i < h; ++i) clf.b1[i] -= step * g_b1[i];
    for (std::size_t i = 0; i < clf.w2.size(); ++i) clf.w2[i] -= step * g_w2[i];
    for (std::size_t k = 0; k < 2; ++k) clf.b2[k] -= step * g_b2[k];
  }

  std::size_t correct = 0;
  for (const auto& ex : examples) {
    correct += mlp_predict(clf, ex.features).label == ex.label ? 1 : 0;
  }
  clf.training_accuracy = static_cast<double>(correct) * inv_n;
  validate_mlp(clf);
  return clf;
}

inline MlpClassifier fit_mlp(std::uint32_t layer, const std::vector<MlpExample>& examples,
                             const MlpHyperparams& params = {}) {
  return fit_mlp(layer, std::span<const MlpExample>(examples), params);
}

}  // namespace eeg
