#pragma once

#include <string>

#include <json.hpp>

#include "eeg/budget.hpp"
#include "eeg/guard.hpp"
#include "eeg/layer_accuracy.hpp"
#include "eeg/metrics.hpp"
#include "eeg/pca.hpp"
#include "eeg/pool.hpp"

// JSON and CSV renderings of library results, shared by the CLI and tests.

namespace eeg::report {

using nlohmann::json;

inline json to_json(const GuardVerdict& v, bool include_layers = true) {
  json j = {{"prompt_id", v.prompt_id},
            {"decision", std::string(to_string(v.decision))},
            {"harmfulness_score", v.harmfulness_score},
            {"layers_used", v.layers_used},
            {"alpha", v.config.alpha},
            {"threshold", v.config.threshold}};
  if (v.refused()) j["refusal_text"] = v.config.refusal_text;
  if (include_layers) {
    json layers = json::array();
    for (const auto& d : v.per_layer) {
      json entry = {{"layer", d.layer}, {"evaluated", d.evaluated}};
      if (d.evaluated) {
        entry["vote"] = d.vote;
        entry["distance_benign"] = d.distance_benign;
        entry["distance_harmful"] = d.distance_harmful;
        if (d.degenerate) entry["degenerate"] = true;
      }
      layers.push_back(std::move(entry));
    }
    j["per_layer"] = std::move(layers);
  }
  return j;
}

inline json to_json(const Error& e) {
  return {{"kind", to_string(e.kind())}, {"message", e.what()}};
}

inline json to_json(const AsrReport& r) {
  return {{"per_attack_asr", r.per_attack}, {"avg_asr", r.average}};
}

inline json to_json(const PrecisionRecallF1& m) {
  return {{"precision", m.precision},
          {"recall", m.recall},
          {"f1", m.f1},
          {"true_positives", m.true_positives},
          {"false_positives", m.false_positives},
          {"false_negatives", m.false_negatives},
          {"true_negatives", m.true_negatives}};
}

inline json to_json(const EvalReport& r) {
  json j = {{"per_attack_asr", r.per_attack_asr}, {"avg_asr", r.avg_asr}, {"bar", r.bar}};
  if (r.baseline_avg_asr) j["baseline_avg_asr"] = *r.baseline_avg_asr;
  if (r.asr_reduction_rate) j["asr_reduction_rate"] = *r.asr_reduction_rate;
  return j;
}

inline json to_json(const BudgetReport& b) {
  return {{"mean_prompt_tokens", b.mean_prompt_tokens},
          {"mean_response_tokens", b.mean_response_tokens},
          {"n_layers", b.n_layers},
          {"dim", b.dim},
          {"no", b.no_ops},
          {"ano", b.ano_ops},
          {"aor", b.aor},
          {"rejection_rate", b.rejection_rate},
          {"net_overhead", b.net_overhead},
          {"note", b.note}};
}

inline json to_json(const PoolSummary& s, const PromptPool& pool) {
  return {{"total", s.total},
          {"benign", s.benign},
          {"harmful", s.harmful},
          {"rejected_harmful", s.rejected_harmful},
          {"jailbreak", s.jailbreak},
          {"unknown", s.unknown},
          {"benign_ids", pool.benign},
          {"rejected_harmful_ids", pool.rejected_harmful}};
}

inline std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::string format_number(double v) { return json(v).dump(); }

/// Columns: layer,family,accuracy
inline std::string to_csv(const LayerAccuracyCurve& curve) {
  std::string out = "layer,family,accuracy\n";
  for (std::size_t l = 0; l < curve.prototype.size(); ++l) {
    out += std::to_string(l + 1) + ",prototype," + format_number(curve.prototype[l]) + "\n";
  }
  for (std::size_t l = 0; l < curve.mlp.size(); ++l) {
    out += std::to_string(l + 1) + ",mlp," + format_number(curve.mlp[l]) + "\n";
  }
  return out;
}

/// Columns: x,y,label
inline std::string to_csv(const PcaProjection& p) {
  std::string out = "x,y,label\n";
  for (std::size_t i = 0; i < p.points.size(); ++i) {
    const std::string_view label = i < p.labels.size() ? to_string(p.labels[i]) : "unknown";
    out += format_number(p.points[i][0]) + "," + format_number(p.points[i][1]) + "," +
           csv_escape(label) + "\n";
  }
  return out;
}

}  // namespace eeg::report
