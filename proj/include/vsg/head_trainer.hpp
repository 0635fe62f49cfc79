// Copyright 2026 The vsg Authors
// Licensed under the Apache License, Version 2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "vsg/errors.hpp"
#include "vsg/rng.hpp"
#include "vsg/safety_head.hpp"
#include "vsg/types.hpp"

namespace vsg {

struct TrainConfig {
  float lr_max = 3e-5f;
  int warmup_steps = 200;
  int max_steps = 3000;
  int micro_batch = 32;
  int grad_accum = 1;  // effective batch = micro_batch * grad_accum
  float weight_decay = 0.01f;
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float epsilon = 1e-8f;
  float dropout_p = kDropoutP;
  int eval_every = 100;
  std::uint64_t seed = 0;
};

void validate_train_config(const TrainConfig& cfg);

// Linear warmup to lr_max over warmup_steps, then cosine decay to exactly
// zero at max_steps. Defined on [0, max_steps].
float lr_schedule(int step, const TrainConfig& cfg);

// Inverse-frequency class weights: w_c = n_total / (2 * n_c).
std::pair<double, double> class_weights(std::int64_t n_safe, std::int64_t n_malicious);

template <class S>
struct OptimizerStateT {
  HeadParamsT<S> m;
  HeadParamsT<S> v;
  long step_count = 0;

  static OptimizerStateT zeros_like(const HeadParamsT<S>& p) {
    OptimizerStateT s;
    s.m = HeadParamsT<S>::zeros(p.input_dim(), p.hidden_dim(), p.class_count());
    s.v = HeadParamsT<S>::zeros(p.input_dim(), p.hidden_dim(), p.class_count());
    return s;
  }
};
using OptimizerState = OptimizerStateT<float>;

// Inverted dropout mask: entries are 0 with probability dropout_p and
// 1 / (1 - dropout_p) otherwise, drawn row-major so the stream is replayable.
template <class S>
Mat<S> dropout_mask(Index rows, Index cols, S dropout_p, SplitMix64& rng) {
  if (!(dropout_p >= S(0) && dropout_p < S(1))) {
    raise(Err::OutOfRange, "dropout probability must lie in [0, 1)");
  }
  const double keep = 1.0 - static_cast<double>(dropout_p);
  const S scale = S(1) / static_cast<S>(keep);
  Mat<S> mask(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      mask(r, c) = rng.next_double() < keep ? scale : S(0);
    }
  }
  return mask;
}

// Everything the backward pass needs from the forward pass. act is the
// post-GELU, post-dropout activation.
template <class S>
struct BatchCache {
  Mat<S> inputs;
  Mat<S> z1;
  Mat<S> act;
  Mat<S> mask;  // 0 x 0 when dropout is off
  Mat<S> logits;
};

template <class S>
BatchCache<S> head_forward_batch(const Mat<S>& inputs, const HeadParamsT<S>& p,
                                 const Mat<S>* mask = nullptr) {
  if (inputs.cols() != p.input_dim()) {
    raise(Err::LengthMismatch, "batch width does not match the head input size");
  }
  if (inputs.rows() == 0) raise(Err::EmptyData, "empty batch");
  if (mask != nullptr && (mask->rows() != inputs.rows() || mask->cols() != p.hidden_dim())) {
    raise(Err::LengthMismatch, "dropout mask shape does not match the batch");
  }
  BatchCache<S> cache;
  cache.inputs = inputs;
  cache.z1 = (inputs * p.w1.transpose()).rowwise() + p.b1.transpose();
  cache.act = cache.z1.unaryExpr([](S x) { return gelu(x); });
  if (mask != nullptr) {
    cache.mask = *mask;
    cache.act = cache.act.cwiseProduct(cache.mask);
  }
  cache.logits = (cache.act * p.w2.transpose()).rowwise() + p.b2.transpose();
  return cache;
}

// Class-weighted cross entropy, normalized by the total weight of the batch
// rather than the row count, so each class contributes evenly in expectation.
// Log-sum-exp is max-shifted.
template <class S>
S weighted_cross_entropy(const Mat<S>& logits, const std::vector<std::uint8_t>& labels, S w_safe,
                         S w_malicious) {
  if (static_cast<std::size_t>(logits.rows()) != labels.size()) {
    raise(Err::LengthMismatch, "logits and labels disagree on the batch size");
  }
  if (labels.empty()) raise(Err::EmptyData, "empty batch");
  if (!(w_safe > S(0)) || !(w_malicious > S(0))) {
    raise(Err::OutOfRange, "class weights must be positive");
  }
  S weighted_sum = S(0);
  S weight_total = S(0);
  for (Index i = 0; i < logits.rows(); ++i) {
    if (labels[static_cast<std::size_t>(i)] > 1) raise(Err::OutOfRange, "labels must be 0 or 1");
    const S m = logits.row(i).maxCoeff();
    S lse = S(0);
    for (Index c = 0; c < logits.cols(); ++c) lse += std::exp(logits(i, c) - m);
    lse = m + std::log(lse);
    const S ce = lse - logits(i, labels[static_cast<std::size_t>(i)]);
    const S w = labels[static_cast<std::size_t>(i)] == 1 ? w_malicious : w_safe;
    weighted_sum += w * ce;
    weight_total += w;
  }
  return weighted_sum / weight_total;
}

// Analytic gradients for the weighted cross entropy through the head.
// Returns the loss alongside so training does one pass per batch.
template <class S>
std::pair<S, HeadParamsT<S>> head_backward(const BatchCache<S>& cache,
                                           const std::vector<std::uint8_t>& labels,
                                           const HeadParamsT<S>& p, S w_safe, S w_malicious) {
  const Index batch = cache.logits.rows();
  if (static_cast<std::size_t>(batch) != labels.size()) {
    raise(Err::LengthMismatch, "cache and labels disagree on the batch size");
  }

  const S loss = weighted_cross_entropy(cache.logits, labels, w_safe, w_malicious);

  S weight_total = S(0);
  for (std::uint8_t l : labels) weight_total += l == 1 ? w_malicious : w_safe;

  // dL/dlogits = (w_i / sum w) * (softmax(logits_i) - onehot(y_i))
  Mat<S> dlogits(batch, cache.logits.cols());
  for (Index i = 0; i < batch; ++i) {
    const S m = cache.logits.row(i).maxCoeff();
    Vec<S> e = (cache.logits.row(i).transpose().array() - m).exp().matrix();
    Vec<S> prob = e / e.sum();
    const std::uint8_t y = labels[static_cast<std::size_t>(i)];
    prob[y] -= S(1);
    const S w = (y == 1 ? w_malicious : w_safe) / weight_total;
    dlogits.row(i) = (w * prob).transpose();
  }

  HeadParamsT<S> g;
  g.b2 = dlogits.colwise().sum().transpose();
  g.w2 = dlogits.transpose() * cache.act;
  Mat<S> dact = dlogits * p.w2;
  if (cache.mask.size() > 0) dact = dact.cwiseProduct(cache.mask);
  Mat<S> dz1 = dact.cwiseProduct(cache.z1.unaryExpr([](S x) { return gelu_grad(x); }));
  g.b1 = dz1.colwise().sum().transpose();
  g.w1 = dz1.transpose() * cache.inputs;
  return {loss, g};
}

// One AdamW step with bias correction and decoupled weight decay:
//   theta -= lr * (m_hat / (sqrt(v_hat) + eps) + weight_decay * theta)
template <class S>
void adamw_step(HeadParamsT<S>& params, const HeadParamsT<S>& grads, OptimizerStateT<S>& state,
                S lr, S beta1, S beta2, S epsilon, S weight_decay) {
  state.step_count += 1;
  const S bc1 = S(1) - static_cast<S>(std::pow(static_cast<double>(beta1), state.step_count));
  const S bc2 = S(1) - static_cast<S>(std::pow(static_cast<double>(beta2), state.step_count));
  const auto update = [&](auto& theta, const auto& g, auto& m, auto& v) {
    m = beta1 * m + (S(1) - beta1) * g;
    v = beta2 * v + (S(1) - beta2) * g.cwiseProduct(g);
    theta.array() -=
        lr * ((m.array() / bc1) / ((v.array() / bc2).sqrt() + epsilon) + weight_decay * theta.array());
  };
  update(params.w1, grads.w1, state.m.w1, state.v.w1);
  update(params.b1, grads.b1, state.m.b1, state.v.b1);
  update(params.w2, grads.w2, state.m.w2, state.v.w2);
  update(params.b2, grads.b2, state.m.b2, state.v.b2);
}

// ─── datasets ────────────────────────────────────────────────────────────────

struct EmbeddingDataset {
  Matf embeddings;  // one row per example
  std::vector<std::uint8_t> labels;

  Index size() const { return embeddings.rows(); }
  Index dim() const { return embeddings.cols(); }
  std::int64_t count(std::uint8_t label) const;
};

EmbeddingDataset gather(const EmbeddingDataset& ds, const std::vector<Index>& indices);

// "VSED1" file: magic, u32 count, u32 dim, then per record dim row-major f32
// values and one label byte. Little-endian.
void save_dataset(const EmbeddingDataset& ds, const std::string& path);
EmbeddingDataset load_dataset(const std::string& path);

// Two Gaussian clusters in embedding space, one per class, with the class
// centers `separation` apart along a seeded random unit direction. Rows 0 to
// n_per_class - 1 are safe, the rest malicious.
EmbeddingDataset make_two_cluster_dataset(Index n_per_class, Index dim, float sigma,
                                          float separation, std::uint64_t seed);

// ─── the loop ────────────────────────────────────────────────────────────────

struct EvalPoint {
  int step = 0;
  float lr = 0.0f;
  float train_loss = 0.0f;  // mean loss since the previous eval point
  float val_f1 = 0.0f;      // at threshold 0.5
};

struct TrainingHistory {
  std::vector<EvalPoint> points;
  double weight_safe = 0.0;
  double weight_malicious = 0.0;
  int best_step = 0;
  float best_val_f1 = 0.0f;
};

struct TrainResult {
  HeadParams params;  // checkpoint with the best validation F1, earliest on ties
  TrainingHistory history;
};

TrainResult train_head(const EmbeddingDataset& train, const EmbeddingDataset& val,
                       const TrainConfig& cfg);

// Batched inference: p(malicious) per dataset row.
Vecf malicious_scores(const EmbeddingDataset& ds, const HeadParams& params);

void save_history_jsonl(const TrainingHistory& history, const std::string& path);

// ─── cross-validation ────────────────────────────────────────────────────────

struct Aggregate {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation
  double min = 0.0;
  double max = 0.0;
};

Aggregate aggregate(const std::vector<double>& values);

struct FoldMetrics {
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double roc_auc = 0.0;
};

struct CrossValidationReport {
  std::vector<FoldMetrics> folds;
  Aggregate f1;
  Aggregate precision;
  Aggregate recall;
  Aggregate roc_auc;
};

// Stratified k-fold: fold f is trained on the other k-1 folds with seed
// cfg.seed + f and scored on fold f at threshold 0.5.
CrossValidationReport run_cross_validation(const EmbeddingDataset& ds, int k,
                                           const TrainConfig& cfg);

std::string format_cv_report(const CrossValidationReport& report);

}  // namespace vsg
