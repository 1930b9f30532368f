#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "eeg/error.hpp"
#include "eeg/io/binary.hpp"
#include "eeg/types.hpp"

// Trace record layout, all integers little-endian:
//   "EEGTRAC1" | u16 version=1 | u32 n_layers | u32 dim |
//   u16 len + model_id | u8 label | u16 len + prompt_id |
//   n_layers * dim f32, layer-major
// Records are concatenated back to back.

namespace eeg::io {

inline constexpr std::string_view kTraceMagic = "EEGTRAC1";
inline constexpr std::uint16_t kTraceVersion = 1;

inline std::uint8_t label_code(PromptLabel label) {
  switch (label) {
    case PromptLabel::Benign: return 0;
    case PromptLabel::Harmful: return 1;
    case PromptLabel::Jailbreak: return 2;
    case PromptLabel::Unknown: return 255;
  }
  return 255;
}

inline PromptLabel label_from_code(std::uint8_t code, std::size_t offset) {
  switch (code) {
    case 0: return PromptLabel::Benign;
    case 1: return PromptLabel::Harmful;
    case 2: return PromptLabel::Jailbreak;
    case 255: return PromptLabel::Unknown;
    default:
      throw Error(ErrorKind::DataFormat, "unknown label code " + std::to_string(code) +
                                             " at byte offset " + std::to_string(offset));
  }
}

inline void encode_trace(const EmbeddingTrace& trace, Bytes& out) {
  auto check = validate_trace(trace);
  if (!check.ok()) {
    throw Error(ErrorKind::InvalidArgument,
                "cannot write trace '" + trace.prompt_id + "': " + check.violations.front().message);
  }
  ByteWriter w(out);
  w.raw(kTraceMagic);
  w.u16(kTraceVersion);
  w.u32(trace.n_layers);
  w.u32(trace.dim);
  w.short_string(trace.model_id, "model_id");
  w.u8(label_code(trace.label));
  w.short_string(trace.prompt_id, "prompt_id");
  for (const auto& layer : trace.layers) {
    for (float v : layer) w.f32(v);
  }
}

inline Bytes encode_traces(std::span<const EmbeddingTrace> traces) {
  Bytes out;
  for (const auto& t : traces) encode_trace(t, out);
  return out;
}

inline EmbeddingTrace decode_trace(ByteReader& r) {
  const std::size_t start = r.offset();
  if (r.remaining() < kTraceMagic.size() || r.raw(kTraceMagic.size(), "magic") != kTraceMagic) {
    throw Error(ErrorKind::DataFormat,
                "not a trace file (bad magic at byte offset " + std::to_string(start) + ")");
  }
  const std::size_t version_at = r.offset();
  const std::uint16_t version = r.u16("version");
  if (version != kTraceVersion) {
    throw Error(ErrorKind::DataFormat, "unsupported trace version " + std::to_string(version) +
                                           " at byte offset " + std::to_string(version_at));
  }
  EmbeddingTrace trace;
  trace.n_layers = r.u32("n_layers");
  trace.dim = r.u32("dim");
  trace.model_id = r.short_string("model_id");
  const std::size_t label_at = r.offset();
  trace.label = label_from_code(r.u8("label"), label_at);
  trace.prompt_id = r.short_string("prompt_id");
  if (trace.n_layers == 0 || trace.dim == 0) {
    throw Error(ErrorKind::DataFormat,
                "record at byte offset " + std::to_string(start) + " has zero n_layers or dim");
  }
  const std::uint64_t count = static_cast<std::uint64_t>(trace.n_layers) * trace.dim;
  if (count > r.remaining() / 4) {
    throw Error(ErrorKind::DataFormat, "truncated float payload at byte offset " +
                                           std::to_string(r.offset()) + ": need " +
                                           std::to_string(count * 4) + " bytes, have " +
                                           std::to_string(r.remaining()));
  }
  trace.layers.assign(trace.n_layers, std::vector<float>(trace.dim));
  for (auto& layer : trace.layers) {
    for (auto& v : layer) {
      const std::size_t at = r.offset();
      v = r.f32("float payload");
      if (!std::isfinite(v)) {
        throw Error(ErrorKind::DataFormat,
                    "non-finite float at byte offset " + std::to_string(at));
      }
    }
  }
  return trace;
}

inline std::vector<EmbeddingTrace> decode_traces(std::span<const std::uint8_t> data) {
  std::vector<EmbeddingTrace> out;
  ByteReader r(data);
  while (!r.at_end()) out.push_back(decode_trace(r));
  return out;
}

inline std::vector<EmbeddingTrace> read_traces(const std::string& path) {
  const Bytes data = read_file(path);
  if (data.empty()) return {};
  return decode_traces(data);
}

inline void write_traces(std::span<const EmbeddingTrace> traces, const std::string& path) {
  const Bytes data = encode_traces(traces);
  write_file(path, data);
}

inline void write_traces(const std::vector<EmbeddingTrace>& traces, const std::string& path) {
  write_traces(std::span<const EmbeddingTrace>(traces), path);
}

}  // namespace eeg::io
