// Copyright 2026 The vsg Authors
// Licensed under the Apache License, Version 2.0

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace vsg {

template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

using Matf = Mat<float>;
using Matd = Mat<double>;
using Vecf = Vec<float>;
using Vecd = Vec<double>;
using Index = Eigen::Index;

// Fixed pipeline geometry. A clip is always a 30 s chunk at 16 kHz; the
// frontend turns it into an 80 x 3000 feature matrix, the encoder into a
// 1500 x 512 embedding sequence.
constexpr int kSampleRate = 16000;
constexpr int kChunkSeconds = 30;
constexpr int kChunkSamples = kSampleRate * kChunkSeconds;  // 480000
constexpr int kNFft = 400;                                  // 25 ms window
constexpr int kHopLength = 160;                             // 10 ms hop
constexpr int kNFreqBins = kNFft / 2 + 1;                   // 201
constexpr int kNMels = 80;
constexpr int kNFrames = 3000;
constexpr int kEmbedFrames = 1500;
constexpr int kEmbedDim = 512;
constexpr int kHiddenDim = 256;
constexpr int kNClasses = 2;

// Decoded mono audio. Samples are in [-1, 1] and finite.
struct AudioBuffer {
  std::vector<float> samples;
  int sample_rate = 0;
};

// Normalized log-Mel features, n_mels rows by n_frames columns.
struct LogMelSpectrogram {
  Matf values;
  Index n_mels() const { return values.rows(); }
  Index n_frames() const { return values.cols(); }
};

// Encoder output, one row per embedding frame.
struct EmbeddingSequence {
  Matf values;
  Index frames() const { return values.rows(); }
  Index dim() const { return values.cols(); }
};

enum class Label : std::uint8_t { SAFE = 0, MALICIOUS = 1 };
const char* label_name(Label l);

struct Decision {
  Label label = Label::SAFE;
  float p_malicious = 0.0f;
  float threshold = 0.0f;
  bool review = false;
};

}  // namespace vsg
