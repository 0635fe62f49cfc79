// Copyright 2026 The vsg Authors
// Licensed under the Apache License, Version 2.0

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "vsg/audio_io.hpp"
#include "vsg/errors.hpp"
#include "vsg/gateway.hpp"

namespace vsg {
namespace {

constexpr int kWarmupRuns = 3;

// Linear-interpolated percentile over a sorted sample.
double percentile(const std::vector<double>& sorted, double q) {
  if (sorted.size() == 1) return sorted.front();
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

LatencyStats stats_of(std::vector<double> samples) {
  std::sort(samples.begin(), samples.end());
  LatencyStats s;
  s.p50_ms = percentile(samples, 0.50);
  s.p95_ms = percentile(samples, 0.95);
  double sum = 0.0;
  for (double v : samples) sum += v;
  s.mean_ms = sum / static_cast<double>(samples.size());
  return s;
}

}  // namespace

BenchReport bench(const Engine& engine, const std::vector<std::string>& wav_paths,
                  int repetitions) {
  if (wav_paths.empty()) raise(Err::EmptyData, "no clips to replay");
  if (repetitions < 10) raise(Err::OutOfRange, "need at least 10 repetitions");

  std::vector<std::vector<std::uint8_t>> clips;
  clips.reserve(wav_paths.size());
  for (const std::string& path : wav_paths) clips.push_back(read_file_bytes(path));

  BenchReport report;
  report.repetitions = repetitions;
  report.warmup = kWarmupRuns;

  std::vector<double> cls_ms;
  std::vector<double> full_ms;
  cls_ms.reserve(static_cast<std::size_t>(repetitions));
  full_ms.reserve(static_cast<std::size_t>(repetitions));

  for (int i = 0; i < kWarmupRuns + repetitions; ++i) {
    const auto& clip = clips[static_cast<std::size_t>(i) % clips.size()];
    const Engine::Outcome outcome = engine.classify_bytes(clip, /*want_transcript=*/true);
    if (i < kWarmupRuns) continue;
    cls_ms.push_back(outcome.record.latency_classification_ms);
    full_ms.push_back(outcome.record.latency_total_ms);
    report.transcription_ran = report.transcription_ran || outcome.transcript.has_value();
  }

  report.classification = stats_of(std::move(cls_ms));
  report.full_pipeline = stats_of(std::move(full_ms));
  return report;
}

std::string format_bench_report(const BenchReport& report) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << "repetitions " << report.repetitions << " (warmup " << report.warmup << " excluded)\n";
  os << "classification   p50 " << std::setw(8) << report.classification.p50_ms << " ms   p95 "
     << std::setw(8) << report.classification.p95_ms << " ms   mean " << std::setw(8)
     << report.classification.mean_ms << " ms\n";
  os << "full pipeline    p50 " << std::setw(8) << report.full_pipeline.p50_ms << " ms   p95 "
     << std::setw(8) << report.full_pipeline.p95_ms << " ms   mean " << std::setw(8)
     << report.full_pipeline.mean_ms << " ms\n";
  os << "transcription " << (report.transcription_ran ? "included" : "not supported, skipped")
     << "\n";
  return os.str();
}

}  // namespace vsg
