// Copyright 2026 The vsg Authors
// Licensed under the Apache License, Version 2.0

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "vsg/types.hpp"

namespace vsg {

// Binary labels throughout: 0 = safe (negative), 1 = malicious (positive).

struct ConfusionMatrix {
  std::int64_t tn = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t tp = 0;
  std::int64_t total() const { return tn + fp + fn + tp; }
};

struct MetricsReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double fnr = 0.0;
  double fpr = 0.0;
  double roc_auc = 0.0;
  bool has_roc_auc = false;
  double threshold = 0.0;
  bool degenerate = false;  // a zero denominator forced a defined default
};

// Prediction rule everywhere: malicious iff score >= tau.
ConfusionMatrix confusion_matrix(const Eigen::Ref<const Vecf>& scores,
                                 const std::vector<std::uint8_t>& labels, double tau);

// Zero-denominator conventions: precision 0 when tp+fp = 0, recall 0 when
// tp+fn = 0, f1 0 when precision+recall = 0, fpr 0 when fp+tn = 0. Each such
// fallback sets the degenerate flag.
MetricsReport metrics_from_cm(const ConfusionMatrix& cm);

// Probability that a random positive outscores a random negative, ties at
// half weight; computed with the average-rank form of the Mann-Whitney
// statistic so tied scores need no special casing.
double roc_auc(const Eigen::Ref<const Vecf>& scores, const std::vector<std::uint8_t>& labels);

struct SweepRow {
  double tau = 0.0;
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double fnr = 0.0;
  double fpr = 0.0;
};

std::vector<double> default_threshold_grid();  // 0.05 to 0.95, step 0.05

std::vector<SweepRow> threshold_sweep(const Eigen::Ref<const Vecf>& scores,
                                      const std::vector<std::uint8_t>& labels,
                                      const std::vector<double>& grid);

// Grid tau with the highest F1; ties go to the lowest tau.
double select_threshold(const Eigen::Ref<const Vecf>& scores,
                        const std::vector<std::uint8_t>& labels,
                        const std::vector<double>& grid);

struct SplitIndices {
  std::vector<Index> train;
  std::vector<Index> val;
  std::vector<Index> test;
};

// Per-class apportionment: round each quota half-up, then repair any overshoot
// or shortfall one count at a time in fractional-part order so every class
// splits to within one element of its exact quota. Same seed, same split.
SplitIndices stratified_split(const std::vector<std::uint8_t>& labels,
                              const std::array<double, 3>& ratios, std::uint64_t seed);

// k disjoint exhaustive folds; within each class the first (count mod k)
// folds take one extra element.
std::vector<std::vector<Index>> stratified_kfold(const std::vector<std::uint8_t>& labels, int k,
                                                 std::uint64_t seed);

std::string format_metrics_report(const MetricsReport& m);
std::string format_sweep_table(const std::vector<SweepRow>& rows);
std::string metrics_to_json(const MetricsReport& m);
std::string sweep_to_jsonl(const std::vector<SweepRow>& rows);

}  // namespace vsg
