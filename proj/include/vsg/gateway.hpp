// Copyright 2026 The vsg Authors
// Licensed under the Apache License, Version 2.0

#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vsg/dsp_frontend.hpp"
#include "vsg/encoder_backend.hpp"
#include "vsg/safety_head.hpp"
#include "vsg/types.hpp"

namespace vsg {

struct EngineConfig {
  BackendDescriptor backend;
  std::string head_path;
  double threshold = kDefaultThreshold;
  double review_low = kReviewLow;
  double review_high = kReviewHigh;
  std::string audit_log_path;  // empty disables auditing
  int service_port = 8080;
};

std::uint64_t fnv1a64(const std::uint8_t* data, std::size_t len);

// One line per classification outcome. The raw probability is always kept,
// whatever the decision was.
struct AuditRecord {
  std::int64_t timestamp_ms = 0;
  std::uint64_t input_digest = 0;
  double p_malicious = 0.0;
  double threshold = 0.0;
  Label label = Label::SAFE;
  bool review = false;
  double latency_classification_ms = 0.0;
  double latency_total_ms = 0.0;
  std::string backend;
};

// Append-only JSONL sink. Records are never rewritten; every append is
// followed by fsync so a crash cannot lose acknowledged decisions.
class AuditLog {
 public:
  AuditLog() = default;
  explicit AuditLog(const std::string& path);
  ~AuditLog();
  AuditLog(AuditLog&& other) noexcept;
  AuditLog& operator=(AuditLog&& other) noexcept;
  AuditLog(const AuditLog&) = delete;
  AuditLog& operator=(const AuditLog&) = delete;

  bool enabled() const { return fd_ >= 0; }
  void append_decision(const AuditRecord& record);
  void append_error(std::uint64_t digest, const std::string& kind, const std::string& message);

 private:
  void append_line(const std::string& line);
  int fd_ = -1;
  std::mutex mu_;
};

// The full pipeline: decode, resample, pad, features, encode, pool, head,
// decision. Transcription, when requested and supported, runs beside the
// classification path and can never delay or change the decision.
class Engine {
 public:
  explicit Engine(const EngineConfig& cfg);

  struct Outcome {
    Decision decision;
    std::optional<std::string> transcript;
    AuditRecord record;
  };

  Outcome classify_bytes(std::span<const std::uint8_t> wav_bytes, bool want_transcript) const;
  Outcome classify_file(const std::string& path, bool want_transcript) const;

  const EngineConfig& config() const { return cfg_; }
  const Backend& backend() const { return *backend_; }
  std::size_t head_parameter_count() const { return head_.parameter_count(); }

 private:
  EngineConfig cfg_;
  std::shared_ptr<const Backend> backend_;
  HeadParams head_;
  mutable AuditLog audit_;
};

// ─── latency measurement ─────────────────────────────────────────────────────

struct LatencyStats {
  double p50_ms = 0.0;
  double p95_ms = 0.0;
  double mean_ms = 0.0;
};

struct BenchReport {
  LatencyStats classification;  // features through decision
  LatencyStats full_pipeline;   // decode through decision plus transcription
  int repetitions = 0;
  int warmup = 0;
  bool transcription_ran = false;
};

// Replays the given clips round-robin, repetitions times, after a fixed
// warmup that is excluded from the stats.
BenchReport bench(const Engine& engine, const std::vector<std::string>& wav_paths,
                  int repetitions);
std::string format_bench_report(const BenchReport& report);

// ─── HTTP surface ────────────────────────────────────────────────────────────

// POST /v1/classify (raw WAV body, optional ?transcribe=1) and GET /health.
class Service {
 public:
  explicit Service(const Engine& engine);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Binds and serves on a background thread. port 0 picks an ephemeral port;
  // the bound port is returned.
  int start(int port);
  void wait();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace vsg
