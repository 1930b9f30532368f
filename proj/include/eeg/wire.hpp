#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <variant>

#include "eeg/error.hpp"
#include "eeg/guard.hpp"
#include "eeg/io/binary.hpp"
#include "eeg/types.hpp"

// Guard sidecar protocol. Every message is a frame: u32 LE payload length,
// then the payload.
//
//   request : "EEGRQST1" | u32 n_layers | u32 dim | n_layers*dim f32 (layer-major)
//             | u16 len + prompt_id
//   verdict : "EEGVRDT1" | u8 decision (0 allow, 1 refuse) | u32 score | u32 layers_used
//             | refusal_text bytes (refuse only, to end of payload)
//   error   : "EEGERR01" | u16 code | message bytes (to end of payload)

namespace eeg::wire {

using io::Bytes;

inline constexpr std::string_view kRequestMagic = "EEGRQST1";
inline constexpr std::string_view kVerdictMagic = "EEGVRDT1";
inline constexpr std::string_view kErrorMagic = "EEGERR01";

// Frames above this are refused without reading the payload.
inline constexpr std::uint32_t kMaxFrameBytes = 256u << 20;

enum class ErrorCode : std::uint16_t { Malformed = 1, ShapeMismatch = 2, Internal = 3 };

inline ErrorCode code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ShapeMismatch: return ErrorCode::ShapeMismatch;
    case ErrorKind::DataFormat:
    case ErrorKind::InvalidArgument:
    case ErrorKind::Degenerate: return ErrorCode::Malformed;
    default: return ErrorCode::Internal;
  }
}

struct WireVerdict {
  Decision decision = Decision::Allow;
  std::uint32_t harmfulness_score = 0;
  std::uint32_t layers_used = 0;
  std::string refusal_text;

  bool operator==(const WireVerdict&) const = default;
};

struct WireError {
  ErrorCode code = ErrorCode::Internal;
  std::string message;

  bool operator==(const WireError&) const = default;
};

inline Bytes frame(std::span<const std::uint8_t> payload) {
  if (payload.size() > kMaxFrameBytes) {
    throw Error(ErrorKind::InvalidArgument, "payload exceeds maximum frame size");
  }
  Bytes out;
  out.reserve(payload.size() + 4);
  io::ByteWriter w(out);
  w.u32(static_cast<std::uint32_t>(payload.size()));
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

inline Bytes encode_request(const EmbeddingTrace& trace) {
  require_valid(trace);
  Bytes out;
  io::ByteWriter w(out);
  w.raw(kRequestMagic);
  w.u32(trace.n_layers);
  w.u32(trace.dim);
  for (const auto& layer : trace.layers) {
    for (float v : layer) w.f32(v);
  }
  w.short_string(trace.prompt_id, "prompt_id");
  return out;
}

/// Parses a request payload into a trace (model_id empty, label Unknown).
/// Throws Error(DataFormat) on any structural problem.
inline EmbeddingTrace decode_request(std::span<const std::uint8_t> payload) {
  io::ByteReader r(payload);
  if (r.remaining() < kRequestMagic.size() || r.raw(kRequestMagic.size(), "magic") != kRequestMagic) {
    throw Error(ErrorKind::DataFormat, "bad request magic");
  }
  EmbeddingTrace trace;
  trace.n_layers = r.u32("n_layers");
  trace.dim = r.u32("dim");
  if (trace.n_layers == 0 || trace.dim == 0) {
    throw Error(ErrorKind::DataFormat, "n_layers and dim must be positive");
  }
  const std::uint64_t count = static_cast<std::uint64_t>(trace.n_layers) * trace.dim;
  if (count > r.remaining() / 4) {
    throw Error(ErrorKind::DataFormat, "request float payload shorter than n_layers * dim");
  }
  trace.layers.assign(trace.n_layers, std::vector<float>(trace.dim));
  for (auto& layer : trace.layers) {
    for (auto& v : layer) {
      v = r.f32("float payload");
      if (!std::isfinite(v)) throw Error(ErrorKind::DataFormat, "non-finite float in request");
    }
  }
  trace.prompt_id = r.short_string("prompt_id");
  if (!r.at_end()) throw Error(ErrorKind::DataFormat, "trailing bytes after prompt_id");
  return trace;
}

inline Bytes encode_verdict(const GuardVerdict& verdict) {
  Bytes out;
  io::ByteWriter w(out);
  w.raw(kVerdictMagic);
  w.u8(static_cast<std::uint8_t>(verdict.decision));
  w.u32(verdict.harmfulness_score);
  w.u32(verdict.layers_used);
  if (verdict.refused()) w.raw(verdict.config.refusal_text);
  return out;
}

inline Bytes encode_error(ErrorCode code, std::string_view message) {
  Bytes out;
  io::ByteWriter w(out);
  w.raw(kErrorMagic);
  w.u16(static_cast<std::uint16_t>(code));
  w.raw(message);
  return out;
}

using Response = std::variant<WireVerdict, WireError>;

inline Response decode_response(std::span<const std::uint8_t> payload) {
  io::ByteReader r(payload);
  const std::string magic = r.raw(8, "magic");
  if (magic == kVerdictMagic) {
    WireVerdict v;
    const std::uint8_t d = r.u8("decision");
    if (d > 1) throw Error(ErrorKind::DataFormat, "bad decision byte");
    v.decision = static_cast<Decision>(d);
    v.harmfulness_score = r.u32("score");
    v.layers_used = r.u32("layers_used");
    v.refusal_text = r.raw(r.remaining(), "refusal_text");
    if (v.decision == Decision::Allow && !v.refusal_text.empty()) {
      throw Error(ErrorKind::DataFormat, "allow verdict carries refusal text");
    }
    return v;
  }
  if (magic == kErrorMagic) {
    WireError e;
    e.code = static_cast<ErrorCode>(r.u16("code"));
    e.message = r.raw(r.remaining(), "message");
    return e;
  }
  throw Error(ErrorKind::DataFormat, "unknown response magic");
}

/// Maps one request payload to one response payload. Never throws.
inline Bytes handle_request(std::span<const std::uint8_t> payload, const PrototypeSet& proto,
                            const GuardConfig& config, const ScoreOptions& options = {}) {
  try {
    const EmbeddingTrace trace = decode_request(payload);
    return encode_verdict(score_prompt(trace, proto, config, options));
  } catch (const Error& e) {
    return encode_error(code_for(e.kind()), e.what());
  } catch (const std::exception& e) {
    return encode_error(ErrorCode::Internal, e.what());
  }
}

}  // namespace eeg::wire
