#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "eeg/error.hpp"
#include "eeg/io/binary.hpp"
#include "eeg/prototype.hpp"

// Prototype file layout, all integers little-endian:
//   "EEGPROT1" | u16 version=1 | u32 n_layers | u32 dim | u16 len + model_id |
//   u8 fit_mode (0 standard, 1 jps) | u32 |B| | u32 |R| |
//   per layer: dim f32 benign centroid, then dim f32 harmful centroid

namespace eeg::io {

inline constexpr std::string_view kPrototypeMagic = "EEGPROT1";
inline constexpr std::uint16_t kPrototypeVersion = 1;

inline Bytes encode_prototypes(const PrototypeSet& proto) {
  auto check = validate_prototypes(proto);
  if (!check.ok()) {
    throw Error(ErrorKind::InvalidArgument,
                "cannot write prototypes: " + check.violations.front().message);
  }
  Bytes out;
  ByteWriter w(out);
  w.raw(kPrototypeMagic);
  w.u16(kPrototypeVersion);
  w.u32(proto.n_layers);
  w.u32(proto.dim);
  w.short_string(proto.model_id, "model_id");
  w.u8(static_cast<std::uint8_t>(proto.fit_mode));
  w.u32(proto.counts.benign);
  w.u32(proto.counts.harmful);
  for (const auto& pair : proto.layers) {
    for (float v : pair.benign) w.f32(v);
    for (float v : pair.harmful) w.f32(v);
  }
  return out;
}

inline PrototypeSet decode_prototypes(std::span<const std::uint8_t> data) {
  ByteReader r(data);
  if (r.remaining() < kPrototypeMagic.size() ||
      r.raw(kPrototypeMagic.size(), "magic") != kPrototypeMagic) {
    throw Error(ErrorKind::DataFormat, "not a prototype file (bad magic at byte offset 0)");
  }
  const std::uint16_t version = r.u16("version");
  if (version != kPrototypeVersion) {
    throw Error(ErrorKind::DataFormat, "unsupported prototype version " + std::to_string(version));
  }
  PrototypeSet proto;
  proto.n_layers = r.u32("n_layers");
  proto.dim = r.u32("dim");
  proto.model_id = r.short_string("model_id");
  const std::size_t mode_at = r.offset();
  const std::uint8_t mode = r.u8("fit_mode");
  if (mode > 1) {
    throw Error(ErrorKind::DataFormat,
                "unknown fit_mode " + std::to_string(mode) + " at byte offset " +
                    std::to_string(mode_at));
  }
  proto.fit_mode = static_cast<FitMode>(mode);
  proto.counts.benign = r.u32("counts");
  proto.counts.harmful = r.u32("counts");
  if (proto.n_layers == 0 || proto.dim == 0) {
    throw Error(ErrorKind::DataFormat, "prototype file has zero n_layers or dim");
  }
  const std::uint64_t count = 2ull * proto.n_layers * proto.dim;
  if (count > r.remaining() / 4) {
    throw Error(ErrorKind::DataFormat, "truncated prototype payload at byte offset " +
                                           std::to_string(r.offset()) + ": need " +
                                           std::to_string(count * 4) + " bytes, have " +
                                           std::to_string(r.remaining()));
  }
  proto.layers.resize(proto.n_layers);
  for (auto& pair : proto.layers) {
    for (auto* side : {&pair.benign, &pair.harmful}) {
      side->resize(proto.dim);
      for (auto& v : *side) v = r.f32("prototype payload");
    }
  }
  if (!r.at_end()) {
    throw Error(ErrorKind::DataFormat,
                "trailing bytes after prototype payload at byte offset " + std::to_string(r.offset()));
  }
  auto check = validate_prototypes(proto);
  if (!check.ok()) throw Error(ErrorKind::DataFormat, check.violations.front().message);
  return proto;
}

inline PrototypeSet read_prototypes(const std::string& path) {
  return decode_prototypes(read_file(path));
}

inline void write_prototypes(const PrototypeSet& proto, const std::string& path) {
  write_file(path, encode_prototypes(proto));
}

}  // namespace eeg::io
