#pragma once

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "eeg/error.hpp"
#include "eeg/guard.hpp"

// Optional guard defaults, one `key = value` per line, '#' starts a comment:
//   alpha = 0.75
//   threshold = 11
//   refusal_text = Sorry, but I cannot help that.

namespace eeg::io {

struct GuardDefaults {
  std::optional<double> alpha;
  std::optional<std::uint32_t> threshold;
  std::optional<std::string> refusal_text;

  void apply_to(GuardConfig& config) const {
    if (alpha) config.alpha = *alpha;
    if (threshold) config.threshold = *threshold;
    if (refusal_text) config.refusal_text = *refusal_text;
  }
};

namespace detail {
inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}
}  // namespace detail

inline GuardDefaults parse_guard_defaults(std::istream& in) {
  GuardDefaults out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = detail::trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    auto fail = [&](const std::string& why) {
      throw Error(ErrorKind::DataFormat, "config line " + std::to_string(line_no) + ": " + why);
    };
    if (eq == std::string::npos) fail("expected key = value");
    const std::string key = detail::trim(body.substr(0, eq));
    const std::string value = detail::trim(body.substr(eq + 1));
    try {
      std::size_t used = 0;
      if (key == "alpha") {
        out.alpha = std::stod(value, &used);
      } else if (key == "threshold") {
        const long long t = std::stoll(value, &used);
        if (t < 0 || t > 0xFFFFFFFFLL) fail("threshold out of range");
        out.threshold = static_cast<std::uint32_t>(t);
      } else if (key == "refusal_text") {
        out.refusal_text = value;
        used = value.size();
      } else {
        fail("unknown key '" + key + "'");
      }
      if (used != value.size()) fail("trailing characters in value for '" + key + "'");
    } catch (const std::logic_error&) {
      fail("bad value for '" + key + "'");
    }
  }
  return out;
}

inline GuardDefaults read_guard_defaults(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open config '" + path + "'");
  return parse_guard_defaults(in);
}

/// Defaults from the EEG_CONFIG file when the variable is set, else none.
inline GuardDefaults guard_defaults_from_env() {
  const char* path = std::getenv("EEG_CONFIG");
  if (!path || !*path) return {};
  return read_guard_defaults(path);
}

}  // namespace eeg::io
