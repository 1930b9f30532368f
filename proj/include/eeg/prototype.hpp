#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "eeg/error.hpp"
#include "eeg/types.hpp"

namespace eeg {

enum class FitMode : std::uint8_t {
  Standard,  // benign prompts vs harmful prompts the model already refuses
  JPS,       // benign vs every harmful or jailbreak prompt, no refusal filter
};

namespace detail {

struct DotSums {
  double dot = 0.0;
  double norm_a = 0.0;
  double norm_b = 0.0;
};

inline double distance_from_sums(double dot, double norm_a_sq, double norm_b_sq) {
  if (norm_a_sq == 0.0 || norm_b_sq == 0.0) {
    throw Error(ErrorKind::Degenerate, "degenerate vector");
  }
  return 1.0 - dot / (std::sqrt(norm_a_sq) * std::sqrt(norm_b_sq));
}

}  // namespace detail

/// 1 - cos(a, b), accumulated in double. Scale-invariant in both arguments.
template <typename T, typename U>
double cosine_distance(std::span<const T> a, std::span<const U> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::ShapeMismatch, "cosine_distance: length " + std::to_string(a.size()) +
                                              " vs " + std::to_string(b.size()));
  }
  detail::DotSums s;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a[i];
    const double y = b[i];
    s.dot += x * y;
    s.norm_a += x * x;
    s.norm_b += y * y;
  }
  return detail::distance_from_sums(s.dot, s.norm_a, s.norm_b);
}

template <typename T, typename U>
double cosine_distance(const std::vector<T>& a, const std::vector<U>& b) {
  return cosine_distance(std::span<const T>(a), std::span<const U>(b));
}

struct LayerPrototypes {
  std::vector<float> benign;
  std::vector<float> harmful;

  bool operator==(const LayerPrototypes&) const = default;
};

struct ClassCounts {
  std::uint32_t benign = 0;
  std::uint32_t harmful = 0;

  bool operator==(const ClassCounts&) const = default;
};

/// Per-layer class centroids. `layers[k]` belongs to transformer block k+1.
struct PrototypeSet {
  std::string model_id;
  std::uint32_t n_layers = 0;
  std::uint32_t dim = 0;
  std::vector<LayerPrototypes> layers;
  ClassCounts counts;
  FitMode fit_mode = FitMode::Standard;

  bool operator==(const PrototypeSet&) const = default;
};

inline ValidationResult validate_prototypes(const PrototypeSet& proto) {
  ValidationResult result;
  auto add = [&](std::string message, std::optional<std::size_t> layer = std::nullopt) {
    result.violations.push_back({std::move(message), layer, std::nullopt});
  };
  if (proto.n_layers < 1) add("n_layers must be >= 1");
  if (proto.dim < 1) add("dim must be >= 1");
  if (proto.layers.size() != proto.n_layers) {
    add("prototype pair count " + std::to_string(proto.layers.size()) + " != n_layers " +
        std::to_string(proto.n_layers));
  }
  for (std::size_t l = 0; l < proto.layers.size(); ++l) {
    for (const auto* side : {&proto.layers[l].benign, &proto.layers[l].harmful}) {
      const char* name = side == &proto.layers[l].benign ? "benign" : "harmful";
      if (side->size() != proto.dim) {
        add("layer " + std::to_string(l) + " " + name + " prototype length " +
                std::to_string(side->size()) + " != dim " + std::to_string(proto.dim),
            l);
        continue;
      }
      bool all_zero = true;
      for (float v : *side) {
        if (!std::isfinite(v)) {
          add("layer " + std::to_string(l) + " " + name + " prototype is not finite", l);
          break;
        }
        all_zero = all_zero && v == 0.0f;
      }
      if (all_zero) add("layer " + std::to_string(l) + " " + name + " prototype is all-zero", l);
    }
  }
  return result;
}

namespace detail {

struct ClassAccumulator {
  std::vector<std::vector<double>> sums;  // [layer][component]
  std::uint32_t count = 0;
};

template <typename TraceMap>
const EmbeddingTrace& lookup_trace(const TraceMap& traces, const std::string& id) {
  auto it = traces.find(id);
  if (it == traces.end()) {
    throw Error(ErrorKind::InvalidArgument, "no trace for prompt '" + id + "'");
  }
  return it->second;
}

}  // namespace detail

/// Fits per-layer class means. `traces` is any map-like container keyed by
/// prompt_id (std::map, std::unordered_map). Summation runs in double in
/// pool iteration order.
template <typename TraceMap>
PrototypeSet fit_prototypes(const PromptPool& pool, const TraceMap& traces, FitMode mode) {
  std::vector<const std::string*> benign_ids;
  std::vector<const std::string*> harmful_ids;
  if (mode == FitMode::Standard) {
    for (const auto& id : pool.benign) benign_ids.push_back(&id);
    for (const auto& id : pool.rejected_harmful) harmful_ids.push_back(&id);
  } else {
    for (const auto& [id, record] : pool.all) {
      if (record.label == PromptLabel::Benign) {
        benign_ids.push_back(&id);
      } else if (record.label == PromptLabel::Harmful || record.label == PromptLabel::Jailbreak) {
        harmful_ids.push_back(&id);
      }
    }
  }
  if (benign_ids.empty()) throw Error(ErrorKind::EmptyClass, "benign class is empty");
  if (harmful_ids.empty()) throw Error(ErrorKind::EmptyClass, "harmful class is empty");

  const EmbeddingTrace& first = detail::lookup_trace(traces, *benign_ids.front());
  const std::uint32_t n_layers = first.n_layers;
  const std::uint32_t dim = first.dim;

  auto accumulate = [&](const std::vector<const std::string*>& ids) {
    detail::ClassAccumulator acc;
    acc.sums.assign(n_layers, std::vector<double>(dim, 0.0));
    for (const std::string* id : ids) {
      const EmbeddingTrace& trace = detail::lookup_trace(traces, *id);
      if (trace.n_layers != n_layers || trace.dim != dim) {
        throw Error(ErrorKind::ShapeMismatch,
                    "trace '" + *id + "' has shape (" + std::to_string(trace.n_layers) + ", " +
                        std::to_string(trace.dim) + "), expected (" + std::to_string(n_layers) +
                        ", " + std::to_string(dim) + ")");
      }
      auto check = validate_trace(trace);
      if (!check.ok()) {
        throw Error(ErrorKind::InvalidArgument,
                    "trace '" + *id + "': " + check.violations.front().message);
      }
      for (std::uint32_t l = 0; l < n_layers; ++l) {
        auto& sum = acc.sums[l];
        const auto& values = trace.layers[l];
        for (std::uint32_t i = 0; i < dim; ++i) sum[i] += values[i];
      }
      ++acc.count;
    }
    return acc;
  };

  const auto benign = accumulate(benign_ids);
  const auto harmful = accumulate(harmful_ids);

  PrototypeSet proto;
  proto.model_id = first.model_id;
  proto.n_layers = n_layers;
  proto.dim = dim;
  proto.counts = {benign.count, harmful.count};
  proto.fit_mode = mode;
  proto.layers.resize(n_layers);
  auto mean_of = [dim](const std::vector<double>& sum, std::uint32_t count) {
    std::vector<float> out(dim);
    for (std::uint32_t i = 0; i < dim; ++i) {
      out[i] = static_cast<float>(sum[i] / static_cast<double>(count));
    }
    return out;
  };
  for (std::uint32_t l = 0; l < n_layers; ++l) {
    proto.layers[l].benign = mean_of(benign.sums[l], benign.count);
    proto.layers[l].harmful = mean_of(harmful.sums[l], harmful.count);
  }

  auto check = validate_prototypes(proto);
  if (!check.ok()) throw Error(ErrorKind::Degenerate, check.violations.front().message);
  return proto;
}

struct LayerVote {
  std::uint32_t layer = 0;  // 1-based block number
  int vote = 0;             // 0 benign, 1 harmful
  double distance_benign = 0.0;
  double distance_harmful = 0.0;
};

/// Nearest-prototype vote at block `layer` (1-based). Ties go to benign.
template <typename T>
LayerVote classify_layer(std::span<const T> embedding, const PrototypeSet& proto,
                         std::uint32_t layer) {
  if (layer < 1 || layer > proto.n_layers || layer > proto.layers.size()) {
    throw Error(ErrorKind::InvalidArgument, "layer " + std::to_string(layer) +
                                                " outside 1.." + std::to_string(proto.n_layers));
  }
  if (embedding.size() != proto.dim) {
    throw Error(ErrorKind::ShapeMismatch, "embedding length " + std::to_string(embedding.size()) +
                                              " != prototype dim " + std::to_string(proto.dim));
  }
  const auto& pair = proto.layers[layer - 1];
  // One pass over the three vectors; same accumulation order as cosine_distance.
  double dot_b = 0.0, dot_h = 0.0, norm_e = 0.0, norm_b = 0.0, norm_h = 0.0;
  for (std::size_t i = 0; i < embedding.size(); ++i) {
    const double e = embedding[i];
    const double b = pair.benign[i];
    const double h = pair.harmful[i];
    dot_b += e * b;
    dot_h += e * h;
    norm_e += e * e;
    norm_b += b * b;
    norm_h += h * h;
  }
  LayerVote out;
  out.layer = layer;
  out.distance_benign = detail::distance_from_sums(dot_b, norm_e, norm_b);
  out.distance_harmful = detail::distance_from_sums(dot_h, norm_e, norm_h);
  out.vote = out.distance_harmful < out.distance_benign ? 1 : 0;
  return out;
}

template <typename T>
LayerVote classify_layer(const std::vector<T>& embedding, const PrototypeSet& proto,
                         std::uint32_t layer) {
  return classify_layer(std::span<const T>(embedding), proto, layer);
}

}  // namespace eeg
