// Copyright 2026 The vsg Authors
// Licensed under the Apache License, Version 2.0

#include "vsg/head_trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "vsg/audio_io.hpp"
#include "vsg/eval_lab.hpp"

namespace vsg {

void validate_train_config(const TrainConfig& cfg) {
  const bool ok = cfg.lr_max > 0.0f && cfg.warmup_steps >= 0 && cfg.max_steps >= 1 &&
                  cfg.warmup_steps <= cfg.max_steps && cfg.micro_batch >= 1 &&
                  cfg.grad_accum >= 1 && cfg.weight_decay >= 0.0f && cfg.beta1 > 0.0f &&
                  cfg.beta1 < 1.0f && cfg.beta2 > 0.0f && cfg.beta2 < 1.0f &&
                  cfg.epsilon > 0.0f && cfg.dropout_p >= 0.0f && cfg.dropout_p < 1.0f &&
                  cfg.eval_every >= 1;
  if (!ok) raise(Err::OutOfRange, "invalid training configuration");
}

float lr_schedule(int step, const TrainConfig& cfg) {
  if (step < 0 || step > cfg.max_steps) {
    raise(Err::OutOfRange, "step outside [0, max_steps]");
  }
  const double lr_max = cfg.lr_max;
  if (step < cfg.warmup_steps) {
    return static_cast<float>(lr_max * step / cfg.warmup_steps);
  }
  const double span = std::max(1, cfg.max_steps - cfg.warmup_steps);
  const double progress = static_cast<double>(step - cfg.warmup_steps) / span;
  return static_cast<float>(lr_max * 0.5 * (1.0 + std::cos(3.14159265358979323846 * progress)));
}

std::pair<double, double> class_weights(std::int64_t n_safe, std::int64_t n_malicious) {
  if (n_safe <= 0 || n_malicious <= 0) {
    raise(Err::EmptyClass, "class weights need examples of both classes");
  }
  const auto total = static_cast<double>(n_safe + n_malicious);
  return {total / (2.0 * static_cast<double>(n_safe)),
          total / (2.0 * static_cast<double>(n_malicious))};
}

// ─── datasets ────────────────────────────────────────────────────────────────

std::int64_t EmbeddingDataset::count(std::uint8_t label) const {
  return std::count(labels.begin(), labels.end(), label);
}

EmbeddingDataset gather(const EmbeddingDataset& ds, const std::vector<Index>& indices) {
  EmbeddingDataset out;
  out.embeddings.resize(static_cast<Index>(indices.size()), ds.dim());
  out.labels.reserve(indices.size());
  Index row = 0;
  for (Index i : indices) {
    if (i < 0 || i >= ds.size()) raise(Err::OutOfRange, "gather index outside the dataset");
    out.embeddings.row(row++) = ds.embeddings.row(i);
    out.labels.push_back(ds.labels[static_cast<std::size_t>(i)]);
  }
  return out;
}

namespace {

constexpr char kDatasetMagic[5] = {'V', 'S', 'E', 'D', '1'};

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

}  // namespace

void save_dataset(const EmbeddingDataset& ds, const std::string& path) {
  if (ds.size() == 0) raise(Err::EmptyData, "refusing to save an empty dataset");
  if (static_cast<std::size_t>(ds.size()) != ds.labels.size()) {
    raise(Err::LengthMismatch, "embeddings and labels disagree on the example count");
  }
  if (!ds.embeddings.allFinite()) raise(Err::NonFiniteInput, "non-finite embeddings");

  std::vector<std::uint8_t> out;
  out.reserve(13 + static_cast<std::size_t>(ds.size()) * (ds.dim() * 4 + 1));
  out.insert(out.end(), kDatasetMagic, kDatasetMagic + sizeof kDatasetMagic);
  put_u32le(out, static_cast<std::uint32_t>(ds.size()));
  put_u32le(out, static_cast<std::uint32_t>(ds.dim()));
  for (Index i = 0; i < ds.size(); ++i) {
    if (ds.labels[static_cast<std::size_t>(i)] > 1) {
      raise(Err::OutOfRange, "labels must be 0 or 1");
    }
    for (Index j = 0; j < ds.dim(); ++j) {
      std::uint32_t bits;
      const float v = ds.embeddings(i, j);
      std::memcpy(&bits, &v, sizeof bits);
      put_u32le(out, bits);
    }
    out.push_back(ds.labels[static_cast<std::size_t>(i)]);
  }
  write_file_bytes(path, out.data(), out.size());
}

EmbeddingDataset load_dataset(const std::string& path) {
  const std::vector<std::uint8_t> bytes = read_file_bytes(path);
  if (bytes.size() < sizeof kDatasetMagic + 8 ||
      std::memcmp(bytes.data(), kDatasetMagic, sizeof kDatasetMagic) != 0) {
    raise(Err::MalformedContainer, "not an embedding dataset: " + path);
  }
  const std::uint32_t count = get_u32le(bytes, 5);
  const std::uint32_t dim = get_u32le(bytes, 9);
  if (count == 0 || dim == 0) raise(Err::MalformedContainer, "empty dataset header: " + path);
  const std::size_t record = static_cast<std::size_t>(dim) * 4 + 1;
  if (bytes.size() != sizeof kDatasetMagic + 8 + record * count) {
    raise(Err::MalformedContainer, "dataset size does not match its header: " + path);
  }

  EmbeddingDataset ds;
  ds.embeddings.resize(count, dim);
  ds.labels.resize(count);
  std::size_t off = sizeof kDatasetMagic + 8;
  for (std::uint32_t i = 0; i < count; ++i) {
    for (std::uint32_t j = 0; j < dim; ++j, off += 4) {
      const std::uint32_t bits = get_u32le(bytes, off);
      float v;
      std::memcpy(&v, &bits, sizeof v);
      ds.embeddings(i, j) = v;
    }
    const std::uint8_t label = bytes[off++];
    if (label > 1) raise(Err::MalformedContainer, "label byte outside {0, 1}: " + path);
    ds.labels[i] = label;
  }
  if (!ds.embeddings.allFinite()) {
    raise(Err::MalformedContainer, "dataset holds non-finite values: " + path);
  }
  return ds;
}

EmbeddingDataset make_two_cluster_dataset(Index n_per_class, Index dim, float sigma,
                                          float separation, std::uint64_t seed) {
  if (n_per_class < 1 || dim < 1 || sigma < 0.0f || separation < 0.0f) {
    raise(Err::OutOfRange, "invalid cluster parameters");
  }
  SplitMix64 rng(seed);

  Vecf direction(dim);
  double norm = 0.0;
  do {
    for (Index j = 0; j < dim; ++j) direction[j] = static_cast<float>(rng.next_gaussian());
    norm = direction.cast<double>().norm();
  } while (norm == 0.0);
  direction /= static_cast<float>(norm);

  const Vecf center_safe = -0.5f * separation * direction;
  const Vecf center_malicious = 0.5f * separation * direction;

  EmbeddingDataset ds;
  ds.embeddings.resize(2 * n_per_class, dim);
  ds.labels.assign(static_cast<std::size_t>(2 * n_per_class), 0);
  for (Index i = 0; i < 2 * n_per_class; ++i) {
    const bool malicious = i >= n_per_class;
    const Vecf& center = malicious ? center_malicious : center_safe;
    for (Index j = 0; j < dim; ++j) {
      ds.embeddings(i, j) = center[j] + sigma * static_cast<float>(rng.next_gaussian());
    }
    ds.labels[static_cast<std::size_t>(i)] = malicious ? 1 : 0;
  }
  return ds;
}

// ─── training loop ───────────────────────────────────────────────────────────

namespace {

HeadParams init_head(Index in, Index hidden, Index classes, SplitMix64& rng) {
  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases. Row-major
  // draw order pins the stream.
  HeadParams p = HeadParams::zeros(in, hidden, classes);
  const float bound1 = 1.0f / std::sqrt(static_cast<float>(in));
  for (Index r = 0; r < hidden; ++r) {
    for (Index c = 0; c < in; ++c) p.w1(r, c) = rng.next_float(-bound1, bound1);
  }
  const float bound2 = 1.0f / std::sqrt(static_cast<float>(hidden));
  for (Index r = 0; r < classes; ++r) {
    for (Index c = 0; c < hidden; ++c) p.w2(r, c) = rng.next_float(-bound2, bound2);
  }
  return p;
}

// Epoch-spanning example stream: one pass hands out a full shuffled
// permutation, then reshuffles. No example is dropped or repeated within an
// epoch regardless of the batch size.
class ExampleStream {
 public:
  ExampleStream(Index n, SplitMix64& rng) : perm_(static_cast<std::size_t>(n)), rng_(rng) {
    std::iota(perm_.begin(), perm_.end(), Index{0});
    pos_ = perm_.size();  // force a shuffle on first use
  }
  Index next() {
    if (pos_ == perm_.size()) {
      shuffle(perm_, rng_);
      pos_ = 0;
    }
    return perm_[pos_++];
  }

 private:
  std::vector<Index> perm_;
  std::size_t pos_;
  SplitMix64& rng_;
};

void add_grads(HeadParams& acc, const HeadParams& g) {
  acc.w1 += g.w1;
  acc.b1 += g.b1;
  acc.w2 += g.w2;
  acc.b2 += g.b2;
}

void scale_grads(HeadParams& g, float s) {
  g.w1 *= s;
  g.b1 *= s;
  g.w2 *= s;
  g.b2 *= s;
}

}  // namespace

Vecf malicious_scores(const EmbeddingDataset& ds, const HeadParams& params) {
  if (ds.size() == 0) raise(Err::EmptyData, "no examples to score");
  const BatchCache<float> cache = head_forward_batch(ds.embeddings, params);
  Vecf scores(ds.size());
  for (Index i = 0; i < ds.size(); ++i) {
    const float m = cache.logits.row(i).maxCoeff();
    const float e0 = std::exp(cache.logits(i, 0) - m);
    const float e1 = std::exp(cache.logits(i, 1) - m);
    scores[i] = e1 / (e0 + e1);
  }
  return scores;
}

TrainResult train_head(const EmbeddingDataset& train, const EmbeddingDataset& val,
                       const TrainConfig& cfg) {
  validate_train_config(cfg);
  if (train.size() == 0 || val.size() == 0) raise(Err::EmptyData, "empty dataset");
  if (train.dim() != val.dim()) {
    raise(Err::LengthMismatch, "train and validation dimensions differ");
  }
  if (static_cast<std::size_t>(train.size()) != train.labels.size() ||
      static_cast<std::size_t>(val.size()) != val.labels.size()) {
    raise(Err::LengthMismatch, "embeddings and labels disagree on the example count");
  }

  const auto [w_safe, w_malicious] = class_weights(train.count(0), train.count(1));

  SplitMix64 rng(cfg.seed);
  HeadParams params = init_head(train.dim(), kHiddenDim, kNClasses, rng);
  OptimizerState opt = OptimizerState::zeros_like(params);
  ExampleStream stream(train.size(), rng);

  TrainingHistory history;
  history.weight_safe = w_safe;
  history.weight_malicious = w_malicious;

  HeadParams best_params = params;
  float best_f1 = -1.0f;
  int best_step = 0;

  double window_loss = 0.0;
  int window_count = 0;

  Matf batch(cfg.micro_batch, train.dim());
  std::vector<std::uint8_t> batch_labels(static_cast<std::size_t>(cfg.micro_batch));

  for (int step = 1; step <= cfg.max_steps; ++step) {
    HeadParams grads = HeadParams::zeros(train.dim(), kHiddenDim, kNClasses);
    double loss_sum = 0.0;

    for (int micro = 0; micro < cfg.grad_accum; ++micro) {
      for (int b = 0; b < cfg.micro_batch; ++b) {
        const Index idx = stream.next();
        batch.row(b) = train.embeddings.row(idx);
        batch_labels[static_cast<std::size_t>(b)] = train.labels[static_cast<std::size_t>(idx)];
      }
      BatchCache<float> cache;
      if (cfg.dropout_p > 0.0f) {
        const Matf mask = dropout_mask<float>(cfg.micro_batch, kHiddenDim, cfg.dropout_p, rng);
        cache = head_forward_batch(batch, params, &mask);
      } else {
        cache = head_forward_batch(batch, params);
      }
      auto [loss, g] = head_backward(cache, batch_labels, params, static_cast<float>(w_safe),
                                     static_cast<float>(w_malicious));
      if (!std::isfinite(loss)) {
        raise(Err::NonFiniteLoss, "loss diverged at step " + std::to_string(step));
      }
      loss_sum += loss;
      add_grads(grads, g);
    }
    if (cfg.grad_accum > 1) scale_grads(grads, 1.0f / static_cast<float>(cfg.grad_accum));

    const float lr = lr_schedule(step, cfg);
    adamw_step(params, grads, opt, lr, cfg.beta1, cfg.beta2, cfg.epsilon, cfg.weight_decay);

    window_loss += loss_sum / cfg.grad_accum;
    window_count += 1;

    if (step % cfg.eval_every == 0 || step == cfg.max_steps) {
      const Vecf scores = malicious_scores(val, params);
      const ConfusionMatrix cm = confusion_matrix(scores, val.labels, 0.5);
      const float f1 = static_cast<float>(metrics_from_cm(cm).f1);

      EvalPoint point;
      point.step = step;
      point.lr = lr;
      point.train_loss = static_cast<float>(window_loss / window_count);
      point.val_f1 = f1;
      history.points.push_back(point);
      window_loss = 0.0;
      window_count = 0;

      if (f1 > best_f1) {  // strict: ties keep the earliest checkpoint
        best_f1 = f1;
        best_step = step;
        best_params = params;
      }
    }
  }

  history.best_step = best_step;
  history.best_val_f1 = best_f1;
  return {best_params, history};
}

void save_history_jsonl(const TrainingHistory& history, const std::string& path) {
  std::string out;
  for (const EvalPoint& p : history.points) {
    nlohmann::json j{
        {"step", p.step}, {"lr", p.lr}, {"train_loss", p.train_loss}, {"val_f1", p.val_f1}};
    out += j.dump();
    out += '\n';
  }
  nlohmann::json tail{{"best_step", history.best_step},
                      {"best_val_f1", history.best_val_f1},
                      {"weight_safe", history.weight_safe},
                      {"weight_malicious", history.weight_malicious}};
  out += tail.dump();
  out += '\n';
  write_file_bytes(path, reinterpret_cast<const std::uint8_t*>(out.data()), out.size());
}

// ─── cross-validation ────────────────────────────────────────────────────────

Aggregate aggregate(const std::vector<double>& values) {
  if (values.empty()) raise(Err::EmptyData, "nothing to aggregate");
  Aggregate a;
  a.min = values.front();
  a.max = values.front();
  double sum = 0.0;
  for (double v : values) {
    sum += v;
    a.min = std::min(a.min, v);
    a.max = std::max(a.max, v);
  }
  a.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - a.mean) * (v - a.mean);
    a.stddev = std::sqrt(sq / static_cast<double>(values.size() - 1));
  }
  return a;
}

CrossValidationReport run_cross_validation(const EmbeddingDataset& ds, int k,
                                           const TrainConfig& cfg) {
  validate_train_config(cfg);
  const auto folds = stratified_kfold(ds.labels, k, cfg.seed);

  CrossValidationReport report;
  std::vector<double> f1s, precisions, recalls, aucs;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<Index> train_idx;
    train_idx.reserve(static_cast<std::size_t>(ds.size()) - folds[f].size());
    for (std::size_t other = 0; other < folds.size(); ++other) {
      if (other == f) continue;
      train_idx.insert(train_idx.end(), folds[other].begin(), folds[other].end());
    }
    std::sort(train_idx.begin(), train_idx.end());

    const EmbeddingDataset fold_train = gather(ds, train_idx);
    const EmbeddingDataset fold_val = gather(ds, folds[f]);

    TrainConfig fold_cfg = cfg;
    fold_cfg.seed = cfg.seed + static_cast<std::uint64_t>(f);
    const TrainResult result = train_head(fold_train, fold_val, fold_cfg);

    const Vecf scores = malicious_scores(fold_val, result.params);
    const MetricsReport m = metrics_from_cm(confusion_matrix(scores, fold_val.labels, 0.5));
    FoldMetrics fm;
    fm.f1 = m.f1;
    fm.precision = m.precision;
    fm.recall = m.recall;
    fm.roc_auc = roc_auc(scores, fold_val.labels);
    report.folds.push_back(fm);
    f1s.push_back(fm.f1);
    precisions.push_back(fm.precision);
    recalls.push_back(fm.recall);
    aucs.push_back(fm.roc_auc);
  }
  report.f1 = aggregate(f1s);
  report.precision = aggregate(precisions);
  report.recall = aggregate(recalls);
  report.roc_auc = aggregate(aucs);
  return report;
}

std::string format_cv_report(const CrossValidationReport& report) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  os << "fold      f1  precision  recall  roc_auc\n";
  for (std::size_t f = 0; f < report.folds.size(); ++f) {
    const FoldMetrics& m = report.folds[f];
    os << std::setw(4) << f << "  " << std::setw(6) << m.f1 << "     " << std::setw(6)
       << m.precision << "  " << std::setw(6) << m.recall << "   " << std::setw(6) << m.roc_auc
       << "\n";
  }
  os << "f1        " << report.f1.mean << " +/- " << report.f1.stddev << "\n";
  os << "precision " << report.precision.mean << " +/- " << report.precision.stddev << "\n";
  os << "recall    " << report.recall.mean << " +/- " << report.recall.stddev << "\n";
  os << "roc_auc   " << report.roc_auc.mean << " +/- " << report.roc_auc.stddev << "\n";
  return os.str();
}

}  // namespace vsg
