// Copyright 2026 The vsg Authors
// Licensed under the Apache License, Version 2.0

#include "vsg/encoder_backend.hpp"

#include <dlfcn.h>

#include <vector>

#include "vsg/backend_plugin.h"
#include "vsg/errors.hpp"
#include "vsg/rng.hpp"

namespace vsg {

const char* backend_kind_name(BackendKind kind) {
  return kind == BackendKind::stub ? "stub" : "external_model";
}

namespace {

void check_input_shape(const LogMelSpectrogram& mel) {
  if (mel.n_mels() != kNMels || mel.n_frames() != kNFrames) {
    raise(Err::ShapeMismatch, "expected " + std::to_string(kNMels) + " x " +
                                  std::to_string(kNFrames) + " features, got " +
                                  std::to_string(mel.n_mels()) + " x " +
                                  std::to_string(mel.n_frames()));
  }
}

}  // namespace

// ─── stub ────────────────────────────────────────────────────────────────────

StubBackend::StubBackend(std::uint64_t seed) {
  projection_.resize(kEmbedDim, kNMels);
  SplitMix64 rng(seed);
  for (Index r = 0; r < kEmbedDim; ++r) {
    for (Index c = 0; c < kNMels; ++c) {
      projection_(r, c) = rng.next_float(-0.05f, 0.05f);
    }
  }
}

EmbeddingSequence StubBackend::encode(const LogMelSpectrogram& mel) const {
  check_input_shape(mel);
  Matf halved(kEmbedFrames, kNMels);
  for (Index t = 0; t < kEmbedFrames; ++t) {
    halved.row(t) = 0.5f * (mel.values.col(2 * t) + mel.values.col(2 * t + 1)).transpose();
  }
  EmbeddingSequence out;
  out.values = (halved * projection_.transpose()).array().tanh().matrix();
  return out;
}

std::string StubBackend::transcribe(const LogMelSpectrogram&) const {
  raise(Err::TranscriptionUnsupported, "stub backend does not transcribe");
}

// ─── dlopen plugin ───────────────────────────────────────────────────────────

PluginBackend::PluginBackend(const std::string& path) {
  handle_ = dlopen(path.c_str(), RTLD_NOW | RTLD_LOCAL);
  if (handle_ == nullptr) {
    raise(Err::BackendLoadFailure, "dlopen failed: " + std::string(dlerror()));
  }

  auto info_fn = reinterpret_cast<VsgBackendGetInfoFn>(dlsym(handle_, "vsg_backend_get_info"));
  encode_fn_ = dlsym(handle_, "vsg_backend_encode");
  transcribe_fn_ = dlsym(handle_, "vsg_backend_transcribe");
  if (info_fn == nullptr || encode_fn_ == nullptr) {
    dlclose(handle_);
    handle_ = nullptr;
    raise(Err::BackendLoadFailure, "plugin is missing required entry points: " + path);
  }

  VsgBackendInfo info{};
  if (info_fn(&info) != 0) {
    dlclose(handle_);
    handle_ = nullptr;
    raise(Err::BackendLoadFailure, "plugin info query failed: " + path);
  }
  if (info.abi_version != VSG_BACKEND_ABI_VERSION || info.n_mels != kNMels ||
      info.n_frames != kNFrames) {
    dlclose(handle_);
    handle_ = nullptr;
    raise(Err::BackendLoadFailure, "plugin is incompatible with this pipeline: " + path);
  }
  out_frames_ = info.out_frames;
  out_dim_ = info.out_dim;
  if (out_frames_ != kEmbedFrames || out_dim_ != kEmbedDim) {
    dlclose(handle_);
    handle_ = nullptr;
    raise(Err::ShapeMismatch, "plugin emits " + std::to_string(info.out_frames) + " x " +
                                  std::to_string(info.out_dim) + ", expected " +
                                  std::to_string(kEmbedFrames) + " x " +
                                  std::to_string(kEmbedDim));
  }
  supports_transcription_ = info.supports_transcription != 0 && transcribe_fn_ != nullptr;
}

PluginBackend::~PluginBackend() {
  if (handle_ != nullptr) dlclose(handle_);
}

EmbeddingSequence PluginBackend::encode(const LogMelSpectrogram& mel) const {
  check_input_shape(mel);
  EmbeddingSequence out;
  out.values.resize(kEmbedFrames, kEmbedDim);
  auto fn = reinterpret_cast<VsgBackendEncodeFn>(encode_fn_);
  const int rc = fn(mel.values.data(), kNMels, kNFrames, out.values.data(), out_frames_, out_dim_);
  if (rc != 0) {
    raise(Err::BackendLoadFailure, "backend encode failed (code " + std::to_string(rc) + ")");
  }
  if (!out.values.allFinite()) {
    raise(Err::BackendLoadFailure, "backend emitted non-finite embeddings");
  }
  return out;
}

std::string PluginBackend::transcribe(const LogMelSpectrogram& mel) const {
  if (!supports_transcription_) {
    raise(Err::TranscriptionUnsupported, "backend does not transcribe");
  }
  check_input_shape(mel);
  std::vector<char> buf(1 << 16, '\0');
  auto fn = reinterpret_cast<VsgBackendTranscribeFn>(transcribe_fn_);
  const int rc = fn(mel.values.data(), kNMels, kNFrames, buf.data(),
                    static_cast<std::uint32_t>(buf.size()));
  if (rc != 0) {
    raise(Err::BackendLoadFailure, "backend transcription failed (code " + std::to_string(rc) + ")");
  }
  buf.back() = '\0';
  return std::string(buf.data());
}

std::shared_ptr<const Backend> make_backend(const BackendDescriptor& desc) {
  if (desc.kind == BackendKind::stub) {
    return std::make_shared<StubBackend>(desc.seed);
  }
  if (desc.model_path.empty()) {
    raise(Err::BackendLoadFailure, "external backend needs a model path");
  }
  return std::make_shared<PluginBackend>(desc.model_path);
}

}  // namespace vsg
