#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "eeg/error.hpp"
#include "eeg/prototype.hpp"
#include "eeg/types.hpp"

namespace eeg {

inline constexpr const char* kDefaultRefusalText = "Sorry, but I cannot help that.";

struct GuardConfig {
  double alpha = 0.75;          // fraction of blocks, counted from the input side, that vote
  std::uint32_t threshold = 12;  // refuse when the vote count strictly exceeds this
  std::string refusal_text = kDefaultRefusalText;
  std::string prototype_ref;

  static GuardConfig vicuna_like() { return {0.75, 12, kDefaultRefusalText, {}}; }
  static GuardConfig guanaco_like() { return {0.75, 12, kDefaultRefusalText, {}}; }
  static GuardConfig llama2_like() { return {0.75, 11, kDefaultRefusalText, {}}; }

  bool operator==(const GuardConfig&) const = default;
};

/// floor(alpha * n). The product gets a relative nudge of 1e-9 so that
/// decimal ratios such as 0.29 * 100 land on 29 rather than 28.
inline std::uint32_t layers_used(double alpha, std::uint32_t n_layers) {
  const double product = alpha * static_cast<double>(n_layers);
  return static_cast<std::uint32_t>(std::floor(product + 1e-9 * std::max(1.0, product)));
}

inline void validate_config(const GuardConfig& config) {
  if (!(config.alpha > 0.0 && config.alpha <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "alpha must lie in (0, 1]");
  }
}

inline void validate_config(const GuardConfig& config, const PrototypeSet& proto) {
  validate_config(config);
  if (layers_used(config.alpha, proto.n_layers) < 1) {
    throw Error(ErrorKind::InvalidArgument,
                "alpha * n_layers selects no layers (n_layers = " + std::to_string(proto.n_layers) +
                    ")");
  }
}

enum class Decision : std::uint8_t { Allow = 0, Refuse = 1 };

inline std::string_view to_string(Decision d) { return d == Decision::Refuse ? "refuse" : "allow"; }

struct LayerDiagnostic {
  std::uint32_t layer = 0;  // 1-based block number
  int vote = 0;
  double distance_benign = 0.0;
  double distance_harmful = 0.0;
  bool evaluated = false;   // false when scoring stopped early
  bool degenerate = false;  // zero-norm hidden state; voted benign

  bool operator==(const LayerDiagnostic&) const = default;
};

struct GuardVerdict {
  std::string prompt_id;
  Decision decision = Decision::Allow;
  std::uint32_t harmfulness_score = 0;
  std::uint32_t layers_used = 0;
  std::vector<LayerDiagnostic> per_layer;
  GuardConfig config;

  bool refused() const { return decision == Decision::Refuse; }

  bool operator==(const GuardVerdict&) const = default;
};

struct ScoreOptions {
  // Stop classifying once the score exceeds the threshold. Never changes
  // the decision; remaining layers are reported as not evaluated.
  bool short_circuit = false;
};

/// Counts harmful votes over blocks 1..floor(alpha * n) and refuses when the
/// count is strictly greater than the threshold.
inline GuardVerdict score_prompt(const EmbeddingTrace& trace, const PrototypeSet& proto,
                                 const GuardConfig& config, const ScoreOptions& options = {}) {
  validate_config(config, proto);
  if (trace.n_layers != proto.n_layers || trace.dim != proto.dim) {
    throw Error(ErrorKind::ShapeMismatch,
                "trace '" + trace.prompt_id + "' shape (" + std::to_string(trace.n_layers) + ", " +
                    std::to_string(trace.dim) + ") != prototypes (" +
                    std::to_string(proto.n_layers) + ", " + std::to_string(proto.dim) + ")");
  }
  const std::uint32_t used = layers_used(config.alpha, proto.n_layers);
  if (trace.layers.size() < used) {
    throw Error(ErrorKind::InvalidArgument, "trace '" + trace.prompt_id + "' carries only " +
                                                std::to_string(trace.layers.size()) + " layers");
  }

  GuardVerdict verdict;
  verdict.prompt_id = trace.prompt_id;
  verdict.layers_used = used;
  verdict.config = config;
  verdict.per_layer.resize(used);

  bool stopped = false;
  for (std::uint32_t l = 1; l <= used; ++l) {
    auto& diag = verdict.per_layer[l - 1];
    diag.layer = l;
    if (stopped) continue;

    const auto& values = trace.layers[l - 1];
    if (values.size() != proto.dim) {
      throw Error(ErrorKind::ShapeMismatch, "trace '" + trace.prompt_id + "' layer " +
                                                std::to_string(l) + " has length " +
                                                std::to_string(values.size()));
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!std::isfinite(values[i])) {
        throw Error(ErrorKind::InvalidArgument, "trace '" + trace.prompt_id + "' layer " +
                                                    std::to_string(l) + " index " +
                                                    std::to_string(i) + " is not finite");
      }
    }

    diag.evaluated = true;
    try {
      const LayerVote vote = classify_layer(std::span<const float>(values), proto, l);
      diag.vote = vote.vote;
      diag.distance_benign = vote.distance_benign;
      diag.distance_harmful = vote.distance_harmful;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Degenerate) throw;
      diag.degenerate = true;
      diag.vote = 0;
    }
    verdict.harmfulness_score += static_cast<std::uint32_t>(diag.vote);
    if (options.short_circuit && verdict.harmfulness_score > config.threshold) stopped = true;
  }

  verdict.decision =
      verdict.harmfulness_score > config.threshold ? Decision::Refuse : Decision::Allow;
  return verdict;
}

using ScoreOutcome = std::variant<GuardVerdict, Error>;

/// Scores every trace independently. Per-trace failures land in the
/// matching slot; the batch always completes. `workers` > 1 splits the
/// batch into contiguous chunks scored on separate threads.
inline std::vector<ScoreOutcome> batch_score(std::span<const EmbeddingTrace> traces,
                                             const PrototypeSet& proto, const GuardConfig& config,
                                             const ScoreOptions& options = {},
                                             unsigned workers = 1) {
  std::vector<ScoreOutcome> out(traces.size(), Error(ErrorKind::Internal, "not scored"));
  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      try {
        out[i] = score_prompt(traces[i], proto, config, options);
      } catch (const Error& e) {
        out[i] = e;
      } catch (const std::exception& e) {
        out[i] = Error(ErrorKind::Internal, e.what());
      }
    }
  };

  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(traces.size())));
  if (workers <= 1) {
    run(0, traces.size());
    return out;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (traces.size() + workers - 1) / workers;
  for (std::size_t begin = 0; begin < traces.size(); begin += chunk) {
    pool.emplace_back(run, begin, std::min(traces.size(), begin + chunk));
  }
  for (auto& t : pool) t.join();
  return out;
}

inline std::vector<ScoreOutcome> batch_score(const std::vector<EmbeddingTrace>& traces,
                                             const PrototypeSet& proto, const GuardConfig& config,
                                             const ScoreOptions& options = {},
                                             unsigned workers = 1) {
  return batch_score(std::span<const EmbeddingTrace>(traces), proto, config, options, workers);
}

}  // namespace eeg
