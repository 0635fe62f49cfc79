// Copyright 2026 The vsg Authors
// Licensed under the Apache License, Version 2.0

#include <chrono>
#include <future>
#include <iostream>

#include "vsg/audio_io.hpp"
#include "vsg/errors.hpp"
#include "vsg/gateway.hpp"

namespace vsg {
namespace {

using Clock = std::chrono::steady_clock;

double ms_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

std::int64_t wall_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace

Engine::Engine(const EngineConfig& cfg) : cfg_(cfg) {
  if (!(cfg.threshold > 0.0 && cfg.threshold < 1.0)) {
    raise(Err::OutOfRange, "threshold must lie in (0, 1)");
  }
  backend_ = make_backend(cfg.backend);
  head_ = load_head(cfg.head_path);
  if (!cfg.audit_log_path.empty()) {
    audit_ = AuditLog(cfg.audit_log_path);
  }
  default_mel_filterbank();  // build the shared filterbank before first use
}

Engine::Outcome Engine::classify_bytes(std::span<const std::uint8_t> wav_bytes,
                                       bool want_transcript) const {
  const std::uint64_t digest = fnv1a64(wav_bytes.data(), wav_bytes.size());
  const auto t_start = Clock::now();
  try {
    AudioBuffer audio = decode_wav(wav_bytes);
    if (audio.sample_rate != kSampleRate) {
      audio = resample(audio, kSampleRate);
    }
    audio = pad_or_trim(audio);

    const auto t_cls_start = Clock::now();
    const LogMelSpectrogram mel = log_mel_spectrogram(audio);

    // Transcription runs beside the classification path, never in front of it.
    std::future<std::string> transcript_future;
    const bool transcribing = want_transcript && backend_->supports_transcription();
    if (transcribing) {
      transcript_future =
          std::async(std::launch::async, [this, &mel] { return backend_->transcribe(mel); });
    }

    const EmbeddingSequence embeddings = backend_->encode(mel);
    const Vecf pooled = mean_pool(embeddings);
    const Vecf logits = head_forward(pooled, head_);
    const Vecf probs = softmax(logits);
    const Decision decision =
        decide(probs[1], static_cast<float>(cfg_.threshold), static_cast<float>(cfg_.review_low),
               static_cast<float>(cfg_.review_high));
    const auto t_cls_end = Clock::now();

    std::optional<std::string> transcript;
    if (transcribing) {
      try {
        transcript = transcript_future.get();
      } catch (const Error& e) {
        // A failed transcription degrades the response, not the decision.
        std::cerr << "transcription failed: " << e.what() << "\n";
      }
    }
    const auto t_end = Clock::now();

    Outcome outcome;
    outcome.decision = decision;
    outcome.transcript = std::move(transcript);
    outcome.record.timestamp_ms = wall_ms();
    outcome.record.input_digest = digest;
    outcome.record.p_malicious = decision.p_malicious;
    outcome.record.threshold = decision.threshold;
    outcome.record.label = decision.label;
    outcome.record.review = decision.review;
    outcome.record.latency_classification_ms = ms_between(t_cls_start, t_cls_end);
    outcome.record.latency_total_ms = ms_between(t_start, t_end);
    outcome.record.backend = backend_kind_name(backend_->kind());
    audit_.append_decision(outcome.record);
    return outcome;
  } catch (const Error& e) {
    audit_.append_error(digest, err_name(e.kind()), e.what());
    throw;
  }
}

Engine::Outcome Engine::classify_file(const std::string& path, bool want_transcript) const {
  const std::vector<std::uint8_t> bytes = read_file_bytes(path);
  return classify_bytes(bytes, want_transcript);
}

}  // namespace vsg
