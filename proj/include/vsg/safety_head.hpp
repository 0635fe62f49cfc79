// Copyright 2026 The vsg Authors
// Licensed under the Apache License, Version 2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "vsg/errors.hpp"
#include "vsg/rng.hpp"
#include "vsg/types.hpp"

namespace vsg {

// Two-layer classification head over a pooled embedding:
//   logits = w2 * dropout(gelu(w1 * h + b1)) + b2
// Templated on the scalar so the same code can be run in 64-bit for
// verification against numeric oracles.
template <class S>
struct HeadParamsT {
  Mat<S> w1;  // hidden x in
  Vec<S> b1;  // hidden
  Mat<S> w2;  // classes x hidden
  Vec<S> b2;  // classes

  Index input_dim() const { return w1.cols(); }
  Index hidden_dim() const { return w1.rows(); }
  Index class_count() const { return w2.rows(); }

  std::size_t parameter_count() const {
    return static_cast<std::size_t>(w1.size() + b1.size() + w2.size() + b2.size());
  }

  bool all_finite() const {
    return w1.allFinite() && b1.allFinite() && w2.allFinite() && b2.allFinite();
  }

  static HeadParamsT zeros(Index in, Index hidden, Index classes = kNClasses) {
    HeadParamsT p;
    p.w1 = Mat<S>::Zero(hidden, in);
    p.b1 = Vec<S>::Zero(hidden);
    p.w2 = Mat<S>::Zero(classes, hidden);
    p.b2 = Vec<S>::Zero(classes);
    return p;
  }

  template <class T>
  HeadParamsT<T> cast() const {
    HeadParamsT<T> p;
    p.w1 = w1.template cast<T>();
    p.b1 = b1.template cast<T>();
    p.w2 = w2.template cast<T>();
    p.b2 = b2.template cast<T>();
    return p;
  }
};

using HeadParams = HeadParamsT<float>;

constexpr float kDefaultThreshold = 0.2f;
constexpr float kReviewLow = 0.4f;
constexpr float kReviewHigh = 0.6f;
constexpr float kDropoutP = 0.1f;
constexpr std::size_t kHeadParameterCount =
    static_cast<std::size_t>(kEmbedDim) * kHiddenDim + kHiddenDim +
    static_cast<std::size_t>(kHiddenDim) * kNClasses + kNClasses;  // 131842

// Exact Gaussian-CDF GELU: x * Phi(x). No tanh approximation.
template <class S>
S gelu(S x) {
  return S(0.5) * x * (S(1) + std::erf(x * S(0.7071067811865475244)));
}

// d/dx gelu(x) = Phi(x) + x * phi(x).
template <class S>
S gelu_grad(S x) {
  const S phi = S(0.3989422804014326779) * std::exp(S(-0.5) * x * x);
  const S Phi = S(0.5) * (S(1) + std::erf(x * S(0.7071067811865475244)));
  return Phi + x * phi;
}

// Component-wise mean over the rows of a frames x dim matrix. Accumulates in
// 64-bit: the sequence is 1500 frames long.
template <class S>
Vec<S> mean_pool_rows(const Mat<S>& e) {
  if (e.rows() == 0) raise(Err::EmptySequence, "cannot pool an empty sequence");
  if (!e.allFinite()) raise(Err::NonFiniteInput, "non-finite embeddings");
  Vecd acc = e.template cast<double>().colwise().mean().transpose();
  return acc.template cast<S>();
}

Vecf mean_pool(const EmbeddingSequence& e);

// Inference forward pass (dropout disabled).
template <class S>
Vec<S> head_forward(const Vec<S>& h, const HeadParamsT<S>& p) {
  if (h.size() != p.input_dim()) {
    raise(Err::LengthMismatch, "input size " + std::to_string(h.size()) + " does not match head");
  }
  if (!h.allFinite() || !p.all_finite()) raise(Err::NonFiniteInput, "non-finite head input");
  Vec<S> z = p.w1 * h + p.b1;
  for (Index i = 0; i < z.size(); ++i) z[i] = gelu(z[i]);
  return p.w2 * z + p.b2;
}

// Numerically stable softmax (max subtraction).
template <class S>
Vec<S> softmax(const Vec<S>& logits) {
  if (logits.size() == 0) raise(Err::EmptySequence, "softmax over nothing");
  if (!logits.allFinite()) raise(Err::NonFiniteInput, "non-finite logits");
  Vec<S> e = (logits.array() - logits.maxCoeff()).exp().matrix();
  return e / e.sum();
}

// Threshold rule, fail-closed at the boundary: p >= threshold is MALICIOUS.
// The review flag is set on the closed band [review_low, review_high].
Decision decide(float p_malicious, float threshold, float review_low = kReviewLow,
                float review_high = kReviewHigh);

// "VSHP1" parameter file: magic, four u32 dims (hidden, in, hidden, classes),
// w1, b1, w2, b2 as row-major f32, then CRC-32 of everything after the magic.
// Only heads with the production geometry (512 -> 256 -> 2) are valid.
void save_head(const HeadParams& params, const std::string& path);
HeadParams load_head(const std::string& path);

std::uint32_t crc32(const std::uint8_t* data, std::size_t len);

}  // namespace vsg
