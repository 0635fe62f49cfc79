// Copyright 2026 The vsg Authors
// Licensed under the Apache License, Version 2.0

#include "vsg/eval_lab.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "vsg/errors.hpp"
#include "vsg/rng.hpp"

namespace vsg {
namespace {

void check_scored_labels(const Eigen::Ref<const Vecf>& scores,
                         const std::vector<std::uint8_t>& labels) {
  if (labels.empty()) raise(Err::EmptyData, "no examples");
  if (static_cast<std::size_t>(scores.size()) != labels.size()) {
    raise(Err::LengthMismatch, "scores and labels disagree on the example count");
  }
  for (std::uint8_t l : labels) {
    if (l > 1) raise(Err::OutOfRange, "labels must be 0 or 1");
  }
  for (Index i = 0; i < scores.size(); ++i) {
    if (!(scores[i] >= 0.0f && scores[i] <= 1.0f)) {
      raise(Err::OutOfRange, "scores must be probabilities in [0, 1]");
    }
  }
}

}  // namespace

ConfusionMatrix confusion_matrix(const Eigen::Ref<const Vecf>& scores,
                                 const std::vector<std::uint8_t>& labels, double tau) {
  check_scored_labels(scores, labels);
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool predicted = static_cast<double>(scores[static_cast<Index>(i)]) >= tau;
    if (labels[i] == 1) {
      (predicted ? cm.tp : cm.fn) += 1;
    } else {
      (predicted ? cm.fp : cm.tn) += 1;
    }
  }
  return cm;
}

MetricsReport metrics_from_cm(const ConfusionMatrix& cm) {
  if (cm.total() <= 0) raise(Err::EmptyData, "empty confusion matrix");
  if (cm.tn < 0 || cm.fp < 0 || cm.fn < 0 || cm.tp < 0) {
    raise(Err::OutOfRange, "negative confusion counts");
  }
  MetricsReport m;
  const auto tp = static_cast<double>(cm.tp);
  const auto tn = static_cast<double>(cm.tn);
  const auto fp = static_cast<double>(cm.fp);
  const auto fn = static_cast<double>(cm.fn);
  m.accuracy = (tp + tn) / static_cast<double>(cm.total());

  if (cm.tp + cm.fp > 0) {
    m.precision = tp / (tp + fp);
  } else {
    m.degenerate = true;
  }
  if (cm.tp + cm.fn > 0) {
    m.recall = tp / (tp + fn);
    m.fnr = fn / (tp + fn);
  } else {
    m.degenerate = true;
  }
  if (m.precision + m.recall > 0.0) {
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  } else if (cm.tp + cm.fp > 0 && cm.tp + cm.fn > 0) {
    m.degenerate = true;  // both defined, both zero
  }
  if (cm.fp + cm.tn > 0) {
    m.fpr = fp / (fp + tn);
  } else {
    m.degenerate = true;
  }
  return m;
}

double roc_auc(const Eigen::Ref<const Vecf>& scores, const std::vector<std::uint8_t>& labels) {
  check_scored_labels(scores, labels);
  const auto n = static_cast<std::int64_t>(labels.size());
  std::int64_t n_pos = 0;
  for (std::uint8_t l : labels) n_pos += l;
  const std::int64_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) raise(Err::SingleClass, "ranking needs both classes");

  std::vector<std::int64_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::int64_t a, std::int64_t b) {
    return scores[static_cast<Index>(a)] < scores[static_cast<Index>(b)];
  });

  // Average ranks across ties, then the Mann-Whitney identity.
  double rank_sum_pos = 0.0;
  std::int64_t i = 0;
  while (i < n) {
    std::int64_t j = i;
    while (j + 1 < n &&
           scores[static_cast<Index>(order[j + 1])] == scores[static_cast<Index>(order[i])]) {
      ++j;
    }
    const double avg_rank = static_cast<double>(i + j + 2) / 2.0;  // ranks are 1-based
    for (std::int64_t t = i; t <= j; ++t) {
      if (labels[static_cast<std::size_t>(order[t])] == 1) rank_sum_pos += avg_rank;
    }
    i = j + 1;
  }
  const double u = rank_sum_pos - static_cast<double>(n_pos) * (n_pos + 1) / 2.0;
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

std::vector<double> default_threshold_grid() {
  std::vector<double> grid;
  grid.reserve(19);
  for (int i = 1; i <= 19; ++i) grid.push_back(i * 0.05);
  return grid;
}

namespace {

void check_grid(const std::vector<double>& grid) {
  if (grid.empty()) raise(Err::EmptyData, "empty threshold grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0 && grid[i] < 1.0)) {
      raise(Err::OutOfRange, "grid thresholds must lie in (0, 1)");
    }
    if (i > 0 && grid[i] <= grid[i - 1]) {
      raise(Err::OutOfRange, "grid must be strictly ascending");
    }
  }
}

}  // namespace

std::vector<SweepRow> threshold_sweep(const Eigen::Ref<const Vecf>& scores,
                                      const std::vector<std::uint8_t>& labels,
                                      const std::vector<double>& grid) {
  check_grid(grid);
  std::vector<SweepRow> rows;
  rows.reserve(grid.size());
  for (double tau : grid) {
    const MetricsReport m = metrics_from_cm(confusion_matrix(scores, labels, tau));
    rows.push_back({tau, m.f1, m.precision, m.recall, m.fnr, m.fpr});
  }
  return rows;
}

double select_threshold(const Eigen::Ref<const Vecf>& scores,
                        const std::vector<std::uint8_t>& labels,
                        const std::vector<double>& grid) {
  std::int64_t n_pos = 0;
  for (std::uint8_t l : labels) n_pos += l;
  if (n_pos == 0) raise(Err::SingleClass, "threshold selection needs positive examples");

  const std::vector<SweepRow> rows = threshold_sweep(scores, labels, grid);
  double best_tau = rows.front().tau;
  double best_f1 = rows.front().f1;
  for (const SweepRow& r : rows) {
    if (r.f1 > best_f1) {  // strict: ties keep the lowest tau
      best_f1 = r.f1;
      best_tau = r.tau;
    }
  }
  return best_tau;
}

// ─── deterministic splitting ─────────────────────────────────────────────────

namespace {

// Ratios arrive through config files, so products like 4310 * 0.15 land a few
// ulps off the intended half-integer. Snap to the half grid before rounding;
// anything further than 1e-6 away is a genuinely fractional quota.
double snap_to_half(double q) {
  const double doubled = std::nearbyint(q * 2.0);
  return std::abs(q * 2.0 - doubled) < 1e-6 ? doubled / 2.0 : q;
}

std::array<std::int64_t, 3> apportion(std::int64_t n, const std::array<double, 3>& ratios) {
  std::array<double, 3> quota{};
  std::array<double, 3> frac{};
  std::array<std::int64_t, 3> out{};
  for (int i = 0; i < 3; ++i) {
    quota[i] = snap_to_half(static_cast<double>(n) * ratios[i]);
    out[i] = static_cast<std::int64_t>(std::floor(quota[i] + 0.5));  // half rounds up
    frac[i] = quota[i] - std::floor(quota[i]);
  }
  std::int64_t diff = out[0] + out[1] + out[2] - n;
  while (diff > 0) {  // drop from the smallest fractional part first
    int pick = -1;
    for (int i = 0; i < 3; ++i) {
      if (out[i] == 0) continue;
      if (pick < 0 || frac[i] < frac[pick]) pick = i;
    }
    --out[pick];
    frac[pick] += 1.0;  // already charged once; deprioritize further drops
    --diff;
  }
  while (diff < 0) {  // add to the largest fractional part first
    int pick = 0;
    for (int i = 1; i < 3; ++i) {
      if (frac[i] > frac[pick]) pick = i;
    }
    ++out[pick];
    frac[pick] -= 1.0;
    ++diff;
  }
  return out;
}

std::array<std::vector<Index>, 2> indices_by_class(const std::vector<std::uint8_t>& labels) {
  std::array<std::vector<Index>, 2> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] > 1) raise(Err::OutOfRange, "labels must be 0 or 1");
    by_class[labels[i]].push_back(static_cast<Index>(i));
  }
  if (by_class[0].empty() || by_class[1].empty()) {
    raise(Err::EmptyClass, "both classes must be present");
  }
  return by_class;
}

}  // namespace

SplitIndices stratified_split(const std::vector<std::uint8_t>& labels,
                              const std::array<double, 3>& ratios, std::uint64_t seed) {
  double sum = 0.0;
  for (double r : ratios) {
    if (r < 0.0) raise(Err::OutOfRange, "split ratios must be non-negative");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9) raise(Err::OutOfRange, "split ratios must sum to 1");

  auto by_class = indices_by_class(labels);
  SplitIndices out;
  SplitMix64 rng(seed);
  for (auto& idx : by_class) {
    shuffle(idx, rng);
    const auto counts = apportion(static_cast<std::int64_t>(idx.size()), ratios);
    auto it = idx.begin();
    out.train.insert(out.train.end(), it, it + counts[0]);
    it += counts[0];
    out.val.insert(out.val.end(), it, it + counts[1]);
    it += counts[1];
    out.test.insert(out.test.end(), it, it + counts[2]);
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.val.begin(), out.val.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

std::vector<std::vector<Index>> stratified_kfold(const std::vector<std::uint8_t>& labels, int k,
                                                 std::uint64_t seed) {
  if (k < 2) raise(Err::OutOfRange, "need at least two folds");
  auto by_class = indices_by_class(labels);
  for (const auto& idx : by_class) {
    if (static_cast<int>(idx.size()) < k) {
      raise(Err::TooFewSamples, "every class needs at least k examples");
    }
  }

  std::vector<std::vector<Index>> folds(static_cast<std::size_t>(k));
  SplitMix64 rng(seed);
  for (auto& idx : by_class) {
    shuffle(idx, rng);
    const auto n = static_cast<std::int64_t>(idx.size());
    const std::int64_t base = n / k;
    const std::int64_t extra = n % k;
    std::int64_t pos = 0;
    for (int f = 0; f < k; ++f) {
      const std::int64_t take = base + (f < extra ? 1 : 0);
      folds[static_cast<std::size_t>(f)].insert(folds[static_cast<std::size_t>(f)].end(),
                                                idx.begin() + pos, idx.begin() + pos + take);
      pos += take;
    }
  }
  for (auto& fold : folds) std::sort(fold.begin(), fold.end());
  return folds;
}

// ─── reporting ───────────────────────────────────────────────────────────────

std::string format_metrics_report(const MetricsReport& m) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  os << "accuracy   " << m.accuracy * 100.0 << "%\n";
  os << "precision  " << m.precision << "\n";
  os << "recall     " << m.recall << "\n";
  os << "f1         " << m.f1 << "\n";
  os << "fnr        " << m.fnr * 100.0 << "%\n";
  os << "fpr        " << m.fpr * 100.0 << "%\n";
  if (m.has_roc_auc) os << "roc_auc    " << m.roc_auc << "\n";
  if (m.degenerate) os << "note       degenerate denominators, defaults applied\n";
  return os.str();
}

std::string format_sweep_table(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "  tau      f1  precision  recall     fnr     fpr\n";
  os << std::fixed << std::setprecision(4);
  for (const SweepRow& r : rows) {
    os << std::setw(5) << r.tau << "  " << std::setw(6) << r.f1 << "     " << std::setw(6)
       << r.precision << "  " << std::setw(6) << r.recall << "  " << std::setw(6) << r.fnr << "  "
       << std::setw(6) << r.fpr << "\n";
  }
  return os.str();
}

std::string metrics_to_json(const MetricsReport& m) {
  nlohmann::json j{{"accuracy", m.accuracy}, {"precision", m.precision}, {"recall", m.recall},
                   {"f1", m.f1},             {"fnr", m.fnr},             {"fpr", m.fpr},
                   {"threshold", m.threshold}, {"degenerate", m.degenerate}};
  if (m.has_roc_auc) j["roc_auc"] = m.roc_auc;
  return j.dump();
}

std::string sweep_to_jsonl(const std::vector<SweepRow>& rows) {
  std::string out;
  for (const SweepRow& r : rows) {
    nlohmann::json j{{"tau", r.tau}, {"f1", r.f1},   {"precision", r.precision},
                     {"recall", r.recall}, {"fnr", r.fnr}, {"fpr", r.fpr}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace vsg
