// Copyright 2026 The vsg Authors
// Licensed under the Apache License, Version 2.0

#pragma once

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "vsg/audio_io.hpp"
#include "vsg/types.hpp"

namespace vsg_test {

inline vsg::AudioBuffer make_tone(double freq_hz, double seconds, int sample_rate,
                                  float amplitude = 0.5f) {
  vsg::AudioBuffer a;
  a.sample_rate = sample_rate;
  const auto n = static_cast<std::size_t>(seconds * sample_rate);
  a.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    a.samples[i] = amplitude * static_cast<float>(
                                   std::sin(2.0 * 3.14159265358979323846 * freq_hz *
                                            static_cast<double>(i) / sample_rate));
  }
  return a;
}

inline vsg::AudioBuffer make_silence(double seconds, int sample_rate) {
  vsg::AudioBuffer a;
  a.sample_rate = sample_rate;
  a.samples.assign(static_cast<std::size_t>(seconds * sample_rate), 0.0f);
  return a;
}

// Fresh per-call temp directory under the system temp root, never reused.
inline std::string temp_dir(const std::string& tag) {
  static int counter = 0;
  const std::string dir = (std::filesystem::temp_directory_path() /
                           ("vsg_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
                            std::to_string(counter++)))
                              .string();
  std::filesystem::create_directories(dir);
  return dir;
}

inline void put_u16le(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

inline void put_u32le(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
  out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xFF));
  out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xFF));
}

// Hand-rolled RIFF container so tests can produce arbitrary (including
// broken) layouts.
inline std::vector<std::uint8_t> build_wav_bytes(std::uint16_t format, std::uint16_t channels,
                                                 std::uint32_t rate, std::uint16_t bits,
                                                 const std::vector<std::uint8_t>& payload,
                                                 const std::vector<std::uint8_t>& extra_chunk = {}) {
  std::vector<std::uint8_t> out;
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put_u32le(out, 0);  // size field is ignored by the decoder
  out.insert(out.end(), {'W', 'A', 'V', 'E'});
  if (!extra_chunk.empty()) {
    out.insert(out.end(), {'L', 'I', 'S', 'T'});
    put_u32le(out, static_cast<std::uint32_t>(extra_chunk.size()));
    out.insert(out.end(), extra_chunk.begin(), extra_chunk.end());
    if (extra_chunk.size() % 2 == 1) out.push_back(0);  // pad byte
  }
  out.insert(out.end(), {'f', 'm', 't', ' '});
  put_u32le(out, 16);
  put_u16le(out, format);
  put_u16le(out, channels);
  put_u32le(out, rate);
  put_u32le(out, rate * channels * (bits / 8));
  put_u16le(out, static_cast<std::uint16_t>(channels * (bits / 8)));
  put_u16le(out, bits);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put_u32le(out, static_cast<std::uint32_t>(payload.size()));
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

struct CommandResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr interleaved
};

// Runs a shell command, captures combined output and the real exit status.
inline CommandResult run_command(const std::string& command) {
  CommandResult result;
  FILE* pipe = ::popen((command + " 2>&1").c_str(), "r");
  if (pipe == nullptr) return result;
  char buf[4096];
  std::size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) {
    result.output.append(buf, n);
  }
  const int status = ::pclose(pipe);
  if (WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
  }
  return result;
}

}  // namespace vsg_test
