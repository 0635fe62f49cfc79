// Copyright 2026 The vsg Authors
// Licensed under the Apache License, Version 2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vsg/types.hpp"

namespace vsg {

// RIFF/WAVE decoding, little-endian. Accepts PCM16 and IEEE float32 payloads
// with one or two channels; stereo is downmixed by the arithmetic channel
// mean. Unknown chunks are skipped (with the RIFF even-byte padding rule).
AudioBuffer decode_wav(std::span<const std::uint8_t> bytes);
AudioBuffer load_wav(const std::string& path);

std::vector<std::uint8_t> encode_wav_pcm16(const AudioBuffer& audio);
std::vector<std::uint8_t> encode_wav_float32(const AudioBuffer& audio);
void save_wav_pcm16(const AudioBuffer& audio, const std::string& path);

// Polyphase windowed-sinc rate conversion. Identity when the rates already
// match. Output length is round(n * target_rate / source_rate).
AudioBuffer resample(const AudioBuffer& audio, int target_rate);

// Fixes a 16 kHz buffer to exactly kChunkSamples: zero-pads or truncates at
// the end. Idempotent.
AudioBuffer pad_or_trim(const AudioBuffer& audio);

std::vector<std::uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const std::uint8_t* data, std::size_t len);

inline void write_file_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  write_file_bytes(path, bytes.data(), bytes.size());
}

}  // namespace vsg
