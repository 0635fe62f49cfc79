// Copyright 2026 The vsg Authors
// Licensed under the Apache License, Version 2.0

#include "vsg/safety_head.hpp"

#include <array>
#include <cstring>
#include <vector>

#include "vsg/audio_io.hpp"

namespace vsg {

Vecf mean_pool(const EmbeddingSequence& e) { return mean_pool_rows(e.values); }

Decision decide(float p_malicious, float threshold, float review_low, float review_high) {
  if (!(p_malicious >= 0.0f && p_malicious <= 1.0f)) {
    raise(Err::OutOfRange, "probability must be in [0, 1]");
  }
  if (!(threshold > 0.0f && threshold < 1.0f)) {
    raise(Err::OutOfRange, "threshold must be in (0, 1)");
  }
  if (!(review_low >= 0.0f && review_high <= 1.0f && review_low <= review_high)) {
    raise(Err::OutOfRange, "invalid review band");
  }
  Decision d;
  d.p_malicious = p_malicious;
  d.threshold = threshold;
  d.label = p_malicious >= threshold ? Label::MALICIOUS : Label::SAFE;
  d.review = p_malicious >= review_low && p_malicious <= review_high;
  return d;
}

// ─── CRC-32 (reflected, poly 0xEDB88320) ────────────────────────────────────

std::uint32_t crc32(const std::uint8_t* data, std::size_t len) {
  static const std::array<std::uint32_t, 256> table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k) {
        c = (c & 1u) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      }
      t[i] = c;
    }
    return t;
  }();
  std::uint32_t crc = 0xFFFFFFFFu;
  for (std::size_t i = 0; i < len; ++i) {
    crc = table[(crc ^ data[i]) & 0xFFu] ^ (crc >> 8);
  }
  return crc ^ 0xFFFFFFFFu;
}

// ─── parameter file ─────────────────────────────────────────────────────────

namespace {

constexpr char kHeadMagic[5] = {'V', 'S', 'H', 'P', '1'};

void put_u32le(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
  out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xFF));
  out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xFF));
}

std::uint32_t get_u32le(const std::vector<std::uint8_t>& b, std::size_t off) {
  return static_cast<std::uint32_t>(b[off]) | (static_cast<std::uint32_t>(b[off + 1]) << 8) |
         (static_cast<std::uint32_t>(b[off + 2]) << 16) |
         (static_cast<std::uint32_t>(b[off + 3]) << 24);
}

void put_f32_block(std::vector<std::uint8_t>& out, const float* data, Index count) {
  for (Index i = 0; i < count; ++i) {
    std::uint32_t bits;
    std::memcpy(&bits, data + i, sizeof bits);
    put_u32le(out, bits);
  }
}

void get_f32_block(const std::vector<std::uint8_t>& b, std::size_t off, float* data, Index count) {
  for (Index i = 0; i < count; ++i, off += 4) {
    const std::uint32_t bits = get_u32le(b, off);
    std::memcpy(data + i, &bits, sizeof bits);
  }
}

void check_production_shape(Index hidden, Index in, Index classes) {
  if (in != kEmbedDim || hidden != kHiddenDim || classes != kNClasses) {
    raise(Err::ShapeMismatch, "head geometry must be " + std::to_string(kEmbedDim) + " -> " +
                                  std::to_string(kHiddenDim) + " -> " +
                                  std::to_string(kNClasses));
  }
}

}  // namespace

void save_head(const HeadParams& params, const std::string& path) {
  check_production_shape(params.hidden_dim(), params.input_dim(), params.class_count());
  if (!params.all_finite()) raise(Err::NonFiniteInput, "refusing to save non-finite head");

  std::vector<std::uint8_t> payload;
  payload.reserve(16 + params.parameter_count() * 4);
  put_u32le(payload, static_cast<std::uint32_t>(params.w1.rows()));
  put_u32le(payload, static_cast<std::uint32_t>(params.w1.cols()));
  put_u32le(payload, static_cast<std::uint32_t>(params.w2.cols()));
  put_u32le(payload, static_cast<std::uint32_t>(params.w2.rows()));
  put_f32_block(payload, params.w1.data(), params.w1.size());  // row-major storage
  put_f32_block(payload, params.b1.data(), params.b1.size());
  put_f32_block(payload, params.w2.data(), params.w2.size());
  put_f32_block(payload, params.b2.data(), params.b2.size());

  std::vector<std::uint8_t> out;
  out.reserve(sizeof kHeadMagic + payload.size() + 4);
  out.insert(out.end(), kHeadMagic, kHeadMagic + sizeof kHeadMagic);
  out.insert(out.end(), payload.begin(), payload.end());
  put_u32le(out, crc32(payload.data(), payload.size()));
  write_file_bytes(path, out.data(), out.size());
}

HeadParams load_head(const std::string& path) {
  const std::vector<std::uint8_t> bytes = read_file_bytes(path);
  if (bytes.size() < sizeof kHeadMagic + 16 + 4 ||
      std::memcmp(bytes.data(), kHeadMagic, sizeof kHeadMagic) != 0) {
    raise(Err::MalformedContainer, "not a head parameter file: " + path);
  }

  const std::size_t payload_len = bytes.size() - sizeof kHeadMagic - 4;
  const std::uint8_t* payload = bytes.data() + sizeof kHeadMagic;
  const std::uint32_t stored = get_u32le(bytes, bytes.size() - 4);
  if (crc32(payload, payload_len) != stored) {
    raise(Err::MalformedContainer, "head file checksum mismatch: " + path);
  }

  const std::size_t base = sizeof kHeadMagic;
  const std::uint32_t hidden = get_u32le(bytes, base);
  const std::uint32_t in = get_u32le(bytes, base + 4);
  const std::uint32_t hidden2 = get_u32le(bytes, base + 8);
  const std::uint32_t classes = get_u32le(bytes, base + 12);
  if (hidden != hidden2) raise(Err::MalformedContainer, "inconsistent head dimensions: " + path);
  check_production_shape(hidden, in, classes);

  const std::size_t value_count = static_cast<std::size_t>(hidden) * in + hidden +
                                  static_cast<std::size_t>(classes) * hidden + classes;
  if (payload_len != 16 + value_count * 4) {
    raise(Err::MalformedContainer, "head file size does not match its dimensions: " + path);
  }

  HeadParams p;
  p.w1.resize(hidden, in);
  p.b1.resize(hidden);
  p.w2.resize(classes, hidden);
  p.b2.resize(classes);
  std::size_t off = base + 16;
  get_f32_block(bytes, off, p.w1.data(), p.w1.size());
  off += static_cast<std::size_t>(p.w1.size()) * 4;
  get_f32_block(bytes, off, p.b1.data(), p.b1.size());
  off += static_cast<std::size_t>(p.b1.size()) * 4;
  get_f32_block(bytes, off, p.w2.data(), p.w2.size());
  off += static_cast<std::size_t>(p.w2.size()) * 4;
  get_f32_block(bytes, off, p.b2.data(), p.b2.size());

  if (!p.all_finite()) raise(Err::MalformedContainer, "head file holds non-finite values: " + path);
  if (p.parameter_count() != kHeadParameterCount) {
    raise(Err::ShapeMismatch, "unexpected parameter count " +
                                  std::to_string(p.parameter_count()));
  }
  return p;
}

}  // namespace vsg
