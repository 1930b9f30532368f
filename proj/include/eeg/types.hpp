#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eeg/error.hpp"

namespace eeg {

enum class PromptLabel : std::uint8_t { Benign, Harmful, Jailbreak, Unknown };

inline std::string_view to_string(PromptLabel label) {
  switch (label) {
    case PromptLabel::Benign: return "benign";
    case PromptLabel::Harmful: return "harmful";
    case PromptLabel::Jailbreak: return "jailbreak";
    case PromptLabel::Unknown: return "unknown";
  }
  return "unknown";
}

inline std::optional<PromptLabel> parse_label(std::string_view text) {
  if (text == "benign") return PromptLabel::Benign;
  if (text == "harmful") return PromptLabel::Harmful;
  if (text == "jailbreak") return PromptLabel::Jailbreak;
  if (text == "unknown") return PromptLabel::Unknown;
  return std::nullopt;
}

/// Per-prompt stack of hidden states, one vector per transformer block.
///
/// `layers[k]` holds the output of block k+1 at the final prompt-token
/// position, captured before the first generated token is sampled. The
/// pre-block input embedding is not part of the stack. Guard-facing APIs
/// number layers 1..n_layers; storage is zero-based.
struct EmbeddingTrace {
  std::string prompt_id;
  std::string model_id;
  std::uint32_t n_layers = 0;
  std::uint32_t dim = 0;
  std::vector<std::vector<float>> layers;
  PromptLabel label = PromptLabel::Unknown;

  std::span<const float> layer(std::size_t index) const { return layers.at(index); }

  bool operator==(const EmbeddingTrace&) const = default;
};

struct PromptRecord {
  std::string prompt_id;
  std::string text;
  PromptLabel label = PromptLabel::Unknown;
  std::optional<std::string> response_text;
  std::optional<std::string> attack_name;

  bool operator==(const PromptRecord&) const = default;
};

/// Training pool P' = R u B plus every record it was built from.
struct PromptPool {
  std::set<std::string> benign;
  std::set<std::string> rejected_harmful;
  std::map<std::string, PromptRecord> all;

  bool operator==(const PromptPool&) const = default;
};

struct Violation {
  std::string message;
  std::optional<std::size_t> layer;
  std::optional<std::size_t> index;
};

struct ValidationResult {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
};

/// Checks every EmbeddingTrace invariant. Layer numbers in messages are
/// zero-based storage indices.
inline ValidationResult validate_trace(const EmbeddingTrace& trace) {
  ValidationResult result;
  auto add = [&](std::string message, std::optional<std::size_t> layer = std::nullopt,
                 std::optional<std::size_t> index = std::nullopt) {
    result.violations.push_back({std::move(message), layer, index});
  };

  if (trace.n_layers < 1) add("n_layers must be >= 1");
  if (trace.dim < 1) add("dim must be >= 1");
  if (trace.layers.size() != trace.n_layers) {
    add("layer count " + std::to_string(trace.layers.size()) + " \xE2\x89\xA0 n_layers " +
        std::to_string(trace.n_layers));
  }
  for (std::size_t l = 0; l < trace.layers.size(); ++l) {
    const auto& values = trace.layers[l];
    if (values.size() != trace.dim) {
      add("layer " + std::to_string(l) + " length " + std::to_string(values.size()) +
              " \xE2\x89\xA0 dim " + std::to_string(trace.dim),
          l);
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!std::isfinite(values[i])) {
        add("layer " + std::to_string(l) + " index " + std::to_string(i) + " is not finite", l,
            i);
      }
    }
  }
  return result;
}

inline void require_valid(const EmbeddingTrace& trace) {
  auto result = validate_trace(trace);
  if (!result.ok()) {
    throw Error(ErrorKind::InvalidArgument,
                "trace '" + trace.prompt_id + "': " + result.violations.front().message);
  }
}

}  // namespace eeg
