#pragma once

#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "eeg/error.hpp"
#include "eeg/types.hpp"

// JSON-lines prompt records:
//   {"prompt_id": "...", "text": "...", "label": "benign|harmful|jailbreak|unknown",
//    "response_text": "..." (optional), "attack_name": "..." (optional)}

namespace eeg::io {

inline PromptRecord prompt_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::DataFormat, "record is not a JSON object");
  auto required_string = [&](const char* key) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) {
      throw Error(ErrorKind::DataFormat, std::string("missing string field '") + key + "'");
    }
    return it->get<std::string>();
  };
  auto optional_string = [&](const char* key) -> std::optional<std::string> {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) {
      throw Error(ErrorKind::DataFormat, std::string("field '") + key + "' is not a string");
    }
    return it->get<std::string>();
  };

  PromptRecord record;
  record.prompt_id = required_string("prompt_id");
  record.text = required_string("text");
  const std::string label = required_string("label");
  auto parsed = parse_label(label);
  if (!parsed) throw Error(ErrorKind::DataFormat, "unknown label '" + label + "'");
  record.label = *parsed;
  record.response_text = optional_string("response_text");
  record.attack_name = optional_string("attack_name");
  return record;
}

inline nlohmann::json prompt_to_json(const PromptRecord& record) {
  nlohmann::json j = {{"prompt_id", record.prompt_id},
                      {"text", record.text},
                      {"label", std::string(to_string(record.label))}};
  if (record.response_text) j["response_text"] = *record.response_text;
  if (record.attack_name) j["attack_name"] = *record.attack_name;
  return j;
}

inline std::vector<PromptRecord> parse_prompts(std::istream& in) {
  std::vector<PromptRecord> out;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      PromptRecord record = prompt_from_json(nlohmann::json::parse(line));
      if (!seen.insert(record.prompt_id).second) {
        throw Error(ErrorKind::DataFormat, "duplicate prompt_id '" + record.prompt_id + "'");
      }
      out.push_back(std::move(record));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::DataFormat, "line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(e.kind(), "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

inline std::vector<PromptRecord> read_prompts(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  return parse_prompts(in);
}

inline void write_prompts(const std::vector<PromptRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path + "' for writing");
  for (const auto& r : records) out << prompt_to_json(r).dump() << '\n';
  if (!out) throw Error(ErrorKind::Io, "write to '" + path + "' failed");
}

}  // namespace eeg::io
