// Copyright 2026 The vsg Authors
// Licensed under the Apache License, Version 2.0

#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "vsg/types.hpp"

namespace vsg {

enum class BackendKind { stub, external_model };
const char* backend_kind_name(BackendKind kind);

struct BackendDescriptor {
  BackendKind kind = BackendKind::stub;
  std::string model_path;  // external_model only
  std::uint64_t seed = 0;  // stub only
};

// An encoder turns an 80 x 3000 feature matrix into a 1500 x 512 embedding
// sequence. Transcription is optional and must never gate classification.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual EmbeddingSequence encode(const LogMelSpectrogram& mel) const = 0;
  virtual std::string transcribe(const LogMelSpectrogram& mel) const = 0;
  virtual bool supports_transcription() const = 0;
  virtual BackendKind kind() const = 0;
};

// Deterministic stand-in encoder for tests and development. Averages frame
// pairs (3000 -> 1500), projects each 80-vector to 512 dims with a fixed
// seed-derived matrix, then applies tanh. Same seed, same machine or not:
// same embeddings.
class StubBackend final : public Backend {
 public:
  explicit StubBackend(std::uint64_t seed);
  EmbeddingSequence encode(const LogMelSpectrogram& mel) const override;
  std::string transcribe(const LogMelSpectrogram& mel) const override;
  bool supports_transcription() const override { return false; }
  BackendKind kind() const override { return BackendKind::stub; }
  const Matf& projection() const { return projection_; }

 private:
  Matf projection_;  // kEmbedDim x kNMels
};

// dlopen-backed external encoder; see vsg/backend_plugin.h for the ABI.
class PluginBackend final : public Backend {
 public:
  explicit PluginBackend(const std::string& path);
  ~PluginBackend() override;
  PluginBackend(const PluginBackend&) = delete;
  PluginBackend& operator=(const PluginBackend&) = delete;

  EmbeddingSequence encode(const LogMelSpectrogram& mel) const override;
  std::string transcribe(const LogMelSpectrogram& mel) const override;
  bool supports_transcription() const override { return supports_transcription_; }
  BackendKind kind() const override { return BackendKind::external_model; }

 private:
  void* handle_ = nullptr;
  void* encode_fn_ = nullptr;
  void* transcribe_fn_ = nullptr;
  bool supports_transcription_ = false;
  std::uint32_t out_frames_ = 0;
  std::uint32_t out_dim_ = 0;
};

std::shared_ptr<const Backend> make_backend(const BackendDescriptor& desc);

}  // namespace vsg
