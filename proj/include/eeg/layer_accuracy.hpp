#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eeg/error.hpp"
#include "eeg/mlp.hpp"
#include "eeg/prototype.hpp"
#include "eeg/types.hpp"

namespace eeg {

/// Benign -> 0, Harmful/Jailbreak -> 1, Unknown -> no class.
inline std::optional<int> binary_class(PromptLabel label) {
  switch (label) {
    case PromptLabel::Benign: return 0;
    case PromptLabel::Harmful:
    case PromptLabel::Jailbreak: return 1;
    case PromptLabel::Unknown: return std::nullopt;
  }
  return std::nullopt;
}

struct LayerAccuracyCurve {
  std::string dataset;
  std::vector<double> prototype;  // index k -> block k+1
  std::vector<double> mlp;        // empty when no MLPs were supplied
};

/// Per-layer accuracy of the prototype vote (and optionally one MLP per
/// layer) against `true_classes`. A zero-norm hidden state counts as a
/// benign prediction, as in the guard.
inline LayerAccuracyCurve layer_accuracy_curve(const PrototypeSet& proto,
                                               std::span<const MlpClassifier> mlps,
                                               std::span<const EmbeddingTrace> traces,
                                               std::span<const int> true_classes,
                                               std::string dataset = {}) {
  if (traces.empty()) throw Error(ErrorKind::InvalidArgument, "no labeled traces");
  if (traces.size() != true_classes.size()) {
    throw Error(ErrorKind::ShapeMismatch, "trace count does not match label count");
  }
  const std::uint32_t n = proto.n_layers;
  std::vector<const MlpClassifier*> by_layer;
  if (!mlps.empty()) {
    by_layer.assign(n, nullptr);
    for (const auto& clf : mlps) {
      if (clf.layer_index < 1 || clf.layer_index > n || by_layer[clf.layer_index - 1]) {
        throw Error(ErrorKind::InvalidArgument,
                    "mlp layer index " + std::to_string(clf.layer_index) + " invalid or repeated");
      }
      if (clf.input_dim != proto.dim) {
        throw Error(ErrorKind::ShapeMismatch, "mlp input dim does not match prototypes");
      }
      by_layer[clf.layer_index - 1] = &clf;
    }
    for (std::uint32_t l = 0; l < n; ++l) {
      if (!by_layer[l]) {
        throw Error(ErrorKind::InvalidArgument, "no mlp for layer " + std::to_string(l + 1));
      }
    }
  }

  std::vector<std::size_t> proto_hits(n, 0), mlp_hits(n, 0);
  for (std::size_t t = 0; t < traces.size(); ++t) {
    const auto& trace = traces[t];
    const int truth = true_classes[t];
    if (truth != 0 && truth != 1) throw Error(ErrorKind::InvalidArgument, "class must be 0 or 1");
    if (trace.n_layers != n || trace.dim != proto.dim || trace.layers.size() != n) {
      throw Error(ErrorKind::ShapeMismatch, "trace '" + trace.prompt_id + "' shape mismatch");
    }
    for (std::uint32_t l = 1; l <= n; ++l) {
      const std::span<const float> e = trace.layer(l - 1);
      int vote = 0;
      try {
        vote = classify_layer(e, proto, l).vote;
      } catch (const Error& err) {
        if (err.kind() != ErrorKind::Degenerate) throw;
      }
      proto_hits[l - 1] += vote == truth ? 1 : 0;
      if (!by_layer.empty()) mlp_hits[l - 1] += mlp_predict(*by_layer[l - 1], e).label == truth;
    }
  }

  LayerAccuracyCurve curve;
  curve.dataset = std::move(dataset);
  const double total = static_cast<double>(traces.size());
  for (std::uint32_t l = 0; l < n; ++l) {
    curve.prototype.push_back(static_cast<double>(proto_hits[l]) / total);
    if (!by_layer.empty()) curve.mlp.push_back(static_cast<double>(mlp_hits[l]) / total);
  }
  return curve;
}

/// Fits one MLP per block on labeled traces.
inline std::vector<MlpClassifier> fit_layer_mlps(std::span<const EmbeddingTrace> traces,
                                                 std::span<const int> classes,
                                                 const MlpHyperparams& params = {}) {
  if (traces.empty()) throw Error(ErrorKind::InvalidArgument, "no labeled traces");
  if (traces.size() != classes.size()) {
    throw Error(ErrorKind::ShapeMismatch, "trace count does not match label count");
  }
  const std::uint32_t n = traces.front().n_layers;
  std::vector<MlpClassifier> out;
  out.reserve(n);
  std::vector<MlpExample> examples(traces.size());
  for (std::uint32_t l = 1; l <= n; ++l) {
    for (std::size_t t = 0; t < traces.size(); ++t) {
      if (traces[t].layers.size() != n) {
        throw Error(ErrorKind::ShapeMismatch, "trace '" + traces[t].prompt_id + "' shape mismatch");
      }
      examples[t] = {traces[t].layer(l - 1), classes[t]};
    }
    out.push_back(fit_mlp(l, std::span<const MlpExample>(examples), params));
  }
  return out;
}

}  // namespace eeg
