#pragma once

#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "eeg/budget.hpp"
#include "eeg/guard.hpp"
#include "eeg/io/binary.hpp"
#include "eeg/io/config_file.hpp"
#include "eeg/io/prompt_file.hpp"
#include "eeg/io/prototype_file.hpp"
#include "eeg/io/trace_file.hpp"
#include "eeg/layer_accuracy.hpp"
#include "eeg/metrics.hpp"
#include "eeg/pca.hpp"
#include "eeg/pool.hpp"
#include "eeg/report_json.hpp"
#include "eeg/server.hpp"

// Command-line front end. Every subcommand is a thin adapter over the
// library: parse files, call one operation, print JSON or CSV.
// Exit status: 0 success, 1 usage error, 2 data error.

namespace eeg::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

namespace detail {

using nlohmann::json;

inline std::vector<json> read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  std::vector<json> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      rows.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::DataFormat, path + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return rows;
}

template <typename T>
T field(const json& row, const char* key, std::size_t index) {
  auto it = row.find(key);
  if (it == row.end()) {
    throw Error(ErrorKind::DataFormat,
                "record " + std::to_string(index) + " lacks field '" + key + "'");
  }
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorKind::DataFormat,
                "record " + std::to_string(index) + " field '" + key + "' has the wrong type");
  }
}

inline std::vector<std::string> read_keywords(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

struct MatcherOptions {
  std::string keywords_file;
  bool case_insensitive = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--keywords", keywords_file, "Refusal keyword file, one per line");
    cmd->add_flag("--case-insensitive", case_insensitive, "Fold ASCII case when matching");
  }

  RefusalMatcher build() const {
    if (keywords_file.empty()) {
      return RefusalMatcher(default_refusal_keywords(), !case_insensitive);
    }
    return RefusalMatcher(read_keywords(keywords_file), !case_insensitive);
  }
};

struct GuardOptions {
  std::optional<double> alpha;
  std::optional<std::uint32_t> threshold;
  std::optional<std::string> refusal_text;
  std::string config_file;
  bool short_circuit = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--alpha", alpha, "Fraction of blocks that vote, in (0, 1]");
    cmd->add_option("--threshold", threshold, "Refuse when harmful votes exceed this");
    cmd->add_option("--refusal-text", refusal_text, "Text returned with a refusal");
    cmd->add_option("--config", config_file, "key=value defaults file (overrides EEG_CONFIG)");
    cmd->add_flag("--short-circuit", short_circuit, "Stop scoring once the threshold is exceeded");
  }

  // Built-in defaults < EEG_CONFIG < --config < flags.
  GuardConfig resolve(const std::string& prototype_ref) const {
    GuardConfig config;
    io::guard_defaults_from_env().apply_to(config);
    if (!config_file.empty()) io::read_guard_defaults(config_file).apply_to(config);
    if (alpha) config.alpha = *alpha;
    if (threshold) config.threshold = *threshold;
    if (refusal_text) config.refusal_text = *refusal_text;
    config.prototype_ref = prototype_ref;
    validate_config(config);
    return config;
  }
};

class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::trunc);
      if (!file_) throw Error(ErrorKind::Io, "cannot open '" + path + "' for writing");
    }
    stream_ = path.empty() ? &fallback : &file_;
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_ = nullptr;
};

inline std::vector<int> classes_of(const std::vector<EmbeddingTrace>& traces) {
  std::vector<int> classes;
  classes.reserve(traces.size());
  for (const auto& t : traces) {
    auto c = binary_class(t.label);
    if (!c) {
      throw Error(ErrorKind::DataFormat, "trace '" + t.prompt_id + "' has label unknown");
    }
    classes.push_back(*c);
  }
  return classes;
}

inline json validate_file(const std::string& path) {
  json report = {{"file", path}};
  json violations = json::array();
  const io::Bytes data = io::read_file(path);
  auto starts_with = [&](std::string_view magic) {
    return data.size() >= magic.size() &&
           std::equal(magic.begin(), magic.end(), data.begin(),
                      [](char a, std::uint8_t b) { return static_cast<std::uint8_t>(a) == b; });
  };
  try {
    if (starts_with(io::kTraceMagic)) {
      report["kind"] = "trace";
      const auto traces = io::decode_traces(data);
      for (std::size_t i = 0; i < traces.size(); ++i) {
        for (const auto& v : validate_trace(traces[i]).violations) {
          violations.push_back("record " + std::to_string(i) + ": " + v.message);
        }
      }
      report["records"] = traces.size();
    } else if (starts_with(io::kPrototypeMagic)) {
      report["kind"] = "prototype";
      const auto proto = io::decode_prototypes(data);
      report["n_layers"] = proto.n_layers;
      report["dim"] = proto.dim;
      report["records"] = 1;
    } else {
      report["kind"] = "prompt";
      std::ifstream in(path);
      report["records"] = io::parse_prompts(in).size();
    }
  } catch (const Error& e) {
    violations.push_back(e.what());
  }
  report["ok"] = violations.empty();
  report["violations"] = std::move(violations);
  return report;
}

}  // namespace detail

/// Runs the `eeg` command line. Output goes to `out`, diagnostics to `err`.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  using detail::json;

  CLI::App app{"Early-exit jailbreak guard: fit, score, serve, evaluate"};
  app.name("eeg");
  app.require_subcommand(1);
  std::function<void()> action;
  std::optional<int> exit_override;

  // pool build
  auto* pool_cmd = app.add_subcommand("pool", "Prompt pool construction");
  pool_cmd->require_subcommand(1);
  auto* pool_build = pool_cmd->add_subcommand("build", "Summarize the training pool of a prompt file");
  std::string pool_prompts, pool_out;
  detail::MatcherOptions pool_matcher;
  pool_build->add_option("--prompts", pool_prompts, "JSON-lines prompt file")->required();
  pool_build->add_option("--out", pool_out, "Write JSON here instead of stdout");
  pool_matcher.attach(pool_build);
  pool_build->callback([&] {
    action = [&] {
      const auto records = io::read_prompts(pool_prompts);
      const auto pool = build_pool(records, pool_matcher.build());
      detail::Output o(pool_out, out);
      *o << report::to_json(summarize(pool), pool).dump(2) << '\n';
    };
  });

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "Fit per-layer prototypes");
  std::string fit_prompts, fit_traces, fit_out, fit_mode = "standard";
  detail::MatcherOptions fit_matcher;
  fit_cmd->add_option("--prompts", fit_prompts, "JSON-lines prompt file")->required();
  fit_cmd->add_option("--traces", fit_traces, "Trace file")->required();
  fit_cmd->add_option("--out", fit_out, "Prototype file to write")->required();
  fit_cmd->add_option("--mode", fit_mode, "standard | jps")
      ->check(CLI::IsMember({"standard", "jps"}));
  fit_matcher.attach(fit_cmd);
  fit_cmd->callback([&] {
    action = [&] {
      const auto records = io::read_prompts(fit_prompts);
      const auto pool = build_pool(records, fit_matcher.build());
      std::map<std::string, EmbeddingTrace> traces;
      for (auto& t : io::read_traces(fit_traces)) {
        const std::string id = t.prompt_id;
        if (!traces.emplace(id, std::move(t)).second) {
          throw Error(ErrorKind::DataFormat, "duplicate trace for prompt '" + id + "'");
        }
      }
      const FitMode mode = fit_mode == "jps" ? FitMode::JPS : FitMode::Standard;
      const auto proto = fit_prototypes(pool, traces, mode);
      io::write_prototypes(proto, fit_out);
      out << json{{"prototypes", fit_out},
                  {"model_id", proto.model_id},
                  {"n_layers", proto.n_layers},
                  {"dim", proto.dim},
                  {"mode", fit_mode},
                  {"benign_count", proto.counts.benign},
                  {"harmful_count", proto.counts.harmful}}
                 .dump(2)
          << '\n';
    };
  });

  // score
  auto* score_cmd = app.add_subcommand("score", "Score traces against prototypes");
  std::string score_traces, score_protos, score_out;
  unsigned score_workers = 1;
  bool score_summary = false;
  detail::GuardOptions score_guard;
  score_cmd->add_option("--traces", score_traces, "Trace file")->required();
  score_cmd->add_option("--prototypes", score_protos, "Prototype file")->required();
  score_cmd->add_option("--workers", score_workers, "Scoring threads")->check(CLI::Range(1u, 256u));
  score_cmd->add_flag("--summary", score_summary, "Omit per-layer diagnostics");
  score_cmd->add_option("--out", score_out, "Write JSON here instead of stdout");
  score_guard.attach(score_cmd);
  score_cmd->callback([&] {
    action = [&] {
      const auto proto = io::read_prototypes(score_protos);
      const auto config = score_guard.resolve(score_protos);
      validate_config(config, proto);
      const auto traces = io::read_traces(score_traces);
      ScoreOptions options;
      options.short_circuit = score_guard.short_circuit;
      const auto outcomes = batch_score(traces, proto, config, options, score_workers);
      json verdicts = json::array();
      bool failed = false;
      for (std::size_t i = 0; i < outcomes.size(); ++i) {
        if (const auto* v = std::get_if<GuardVerdict>(&outcomes[i])) {
          verdicts.push_back(report::to_json(*v, !score_summary));
        } else {
          failed = true;
          verdicts.push_back({{"index", i},
                              {"prompt_id", traces[i].prompt_id},
                              {"error", report::to_json(std::get<Error>(outcomes[i]))}});
        }
      }
      detail::Output o(score_out, out);
      *o << json{{"verdicts", std::move(verdicts)}}.dump(2) << '\n';
      if (failed) exit_override = kExitData;
    };
  });

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "Run the guard sidecar");
  std::string serve_listen = "127.0.0.1:7878", serve_protos;
  detail::GuardOptions serve_guard_opts;
  serve_cmd->add_option("--listen", serve_listen, "host:port to listen on");
  serve_cmd->add_option("--prototypes", serve_protos, "Prototype file")->required();
  serve_guard_opts.attach(serve_cmd);
  serve_cmd->callback([&] {
    action = [&] {
      auto proto = io::read_prototypes(serve_protos);
      auto config = serve_guard_opts.resolve(serve_protos);
      ScoreOptions options;
      options.short_circuit = serve_guard_opts.short_circuit;
      GuardServer server(std::move(proto), std::move(config), options);
      const auto port = server.listen(serve_listen);
      err << "listening on port " << port << std::endl;
      server.serve();
    };
  });

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Evaluation metrics from JSON-lines outcomes");
  eval_cmd->require_subcommand(1);
  std::string eval_input, eval_out;
  auto add_eval = [&](const char* name, const char* help) {
    auto* cmd = eval_cmd->add_subcommand(name, help);
    cmd->add_option("--input,input", eval_input, "JSON-lines input")->required();
    cmd->add_option("--out", eval_out, "Write JSON here instead of stdout");
    return cmd;
  };
  auto* eval_asr = add_eval("asr", "Rows {\"attack\": str, \"bypassed\": bool}");
  std::optional<double> eval_baseline;
  eval_asr->add_option("--baseline", eval_baseline, "Undefended average ASR for the reduction rate");
  eval_asr->callback([&] {
    action = [&] {
      std::vector<AttackOutcome> outcomes;
      const auto rows = detail::read_jsonl(eval_input);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        outcomes.push_back({detail::field<std::string>(rows[i], "attack", i),
                            detail::field<bool>(rows[i], "bypassed", i)});
      }
      const auto report = compute_asr(outcomes);
      json j = report::to_json(report);
      if (eval_baseline) {
        const AsrPair pair{*eval_baseline, report.average};
        j["baseline_avg_asr"] = *eval_baseline;
        j["asr_reduction_rate"] = asr_reduction_rate(std::span<const AsrPair>(&pair, 1));
      }
      detail::Output o(eval_out, out);
      *o << j.dump(2) << '\n';
    };
  });
  auto* eval_bar = add_eval("bar", "Rows {\"answered\": bool}");
  eval_bar->callback([&] {
    action = [&] {
      std::vector<bool> answered;
      const auto rows = detail::read_jsonl(eval_input);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        answered.push_back(detail::field<bool>(rows[i], "answered", i));
      }
      const double bar = compute_bar(answered);
      const auto yes = static_cast<std::size_t>(std::count(answered.begin(), answered.end(), true));
      detail::Output o(eval_out, out);
      *o << json{{"bar", bar}, {"answered", yes}, {"total", answered.size()}}.dump(2) << '\n';
    };
  });
  auto* eval_reduction = add_eval("reduction", "Rows {\"no_defense\": num, \"defended\": num}");
  eval_reduction->callback([&] {
    action = [&] {
      std::vector<AsrPair> pairs;
      const auto rows = detail::read_jsonl(eval_input);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        pairs.push_back({detail::field<double>(rows[i], "no_defense", i),
                         detail::field<double>(rows[i], "defended", i)});
      }
      detail::Output o(eval_out, out);
      *o << json{{"asr_reduction_rate", asr_reduction_rate(pairs)}, {"pairs", pairs.size()}}.dump(2)
         << '\n';
    };
  });
  auto* eval_f1 = add_eval("f1", "Rows {\"predicted\": 0|1, \"actual\": 0|1}");
  eval_f1->callback([&] {
    action = [&] {
      std::vector<BinaryPrediction> preds;
      const auto rows = detail::read_jsonl(eval_input);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        preds.push_back({detail::field<int>(rows[i], "predicted", i),
                         detail::field<int>(rows[i], "actual", i)});
      }
      detail::Output o(eval_out, out);
      *o << report::to_json(precision_recall_f1(preds)).dump(2) << '\n';
    };
  });

  // analyze
  auto* analyze_cmd = app.add_subcommand("analyze", "Embedding analysis, CSV output");
  analyze_cmd->require_subcommand(1);
  std::string an_traces, an_out, an_protos, an_mlp_train;
  std::uint32_t an_layer = 1;
  MlpHyperparams an_mlp;
  auto* pca_cmd = analyze_cmd->add_subcommand("pca", "2-D PCA of one layer (x,y,label)");
  pca_cmd->add_option("--traces", an_traces, "Trace file")->required();
  pca_cmd->add_option("--layer", an_layer, "Block number, 1-based")->required()->check(CLI::PositiveNumber);
  pca_cmd->add_option("--out", an_out, "Write CSV here instead of stdout");
  pca_cmd->callback([&] {
    action = [&] {
      const auto traces = io::read_traces(an_traces);
      std::vector<std::vector<float>> points;
      std::vector<PromptLabel> labels;
      for (const auto& t : traces) {
        if (an_layer > t.layers.size()) {
          throw Error(ErrorKind::ShapeMismatch, "trace '" + t.prompt_id + "' has no layer " +
                                                    std::to_string(an_layer));
        }
        points.push_back(t.layers[an_layer - 1]);
        labels.push_back(t.label);
      }
      detail::Output o(an_out, out);
      *o << report::to_csv(pca_project(points, labels));
    };
  });
  auto* acc_cmd = analyze_cmd->add_subcommand("layer-acc", "Per-layer accuracy (layer,family,accuracy)");
  acc_cmd->add_option("--traces", an_traces, "Labeled evaluation traces")->required();
  acc_cmd->add_option("--prototypes", an_protos, "Prototype file")->required();
  acc_cmd->add_option("--mlp-train", an_mlp_train, "Labeled traces to fit one MLP per layer on");
  acc_cmd->add_option("--hidden", an_mlp.hidden, "MLP hidden units");
  acc_cmd->add_option("--epochs", an_mlp.epochs, "MLP epochs");
  acc_cmd->add_option("--lr", an_mlp.learning_rate, "MLP learning rate");
  acc_cmd->add_option("--seed", an_mlp.seed, "MLP init seed");
  acc_cmd->add_option("--out", an_out, "Write CSV here instead of stdout");
  acc_cmd->callback([&] {
    action = [&] {
      const auto proto = io::read_prototypes(an_protos);
      const auto traces = io::read_traces(an_traces);
      const auto classes = detail::classes_of(traces);
      std::vector<MlpClassifier> mlps;
      if (!an_mlp_train.empty()) {
        const auto train = io::read_traces(an_mlp_train);
        const auto train_classes = detail::classes_of(train);
        mlps = fit_layer_mlps(train, train_classes, an_mlp);
      }
      const auto curve = layer_accuracy_curve(proto, mlps, traces, classes, an_traces);
      detail::Output o(an_out, out);
      *o << report::to_csv(curve);
    };
  });

  // budget
  auto* budget_cmd = app.add_subcommand("budget", "Operation-count estimate for the guard");
  double b_prompt = 0, b_response = 0, b_rr = 0;
  std::uint32_t b_layers = 0, b_dim = 0;
  budget_cmd->add_option("--prompt-tokens", b_prompt, "Mean prompt length in tokens")->required();
  budget_cmd->add_option("--response-tokens", b_response, "Mean response length in tokens")->required();
  budget_cmd->add_option("--layers", b_layers, "Transformer blocks")->required();
  budget_cmd->add_option("--dim", b_dim, "Hidden size")->required();
  budget_cmd->add_option("--rejection-rate", b_rr, "Fraction of prompts the guard refuses")->required();
  budget_cmd->callback([&] {
    action = [&] {
      out << report::to_json(compute_budget(b_prompt, b_response, b_layers, b_dim, b_rr)).dump(2)
          << '\n';
    };
  });

  // validate
  auto* validate_cmd = app.add_subcommand("validate", "Check a trace, prototype or prompt file");
  std::string validate_path;
  validate_cmd->add_option("file", validate_path, "File to check")->required();
  validate_cmd->callback([&] {
    action = [&] {
      const json report = detail::validate_file(validate_path);
      out << report.dump(2) << '\n';
      if (!report["ok"].get<bool>()) {
        for (const auto& v : report["violations"]) err << "error: " << v.get<std::string>() << '\n';
        exit_override = kExitData;
      }
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return kExitOk;
    err << app.help();
    return kExitUsage;
  }

  try {
    if (action) action();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return exit_override.value_or(kExitOk);
}

}  // namespace eeg::cli
