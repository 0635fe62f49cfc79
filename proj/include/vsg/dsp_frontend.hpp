// Copyright 2026 The vsg Authors
// Licensed under the Apache License, Version 2.0

#pragma once

#include <string>

#include "vsg/types.hpp"

namespace vsg {

// Periodic Hann window: w[k] = 0.5 * (1 - cos(2 pi k / n)).
Vecf hann_window(int n);

// Triangular filterbank on the Slaney mel scale (linear below 1 kHz,
// logarithmic above), area-normalized so each filter integrates to roughly
// the same energy, spanning 0 Hz to sample_rate / 2.
struct MelFilterbank {
  Matf weights;       // n_mels x (n_fft / 2 + 1)
  Vecf center_freqs;  // Hz, one per filter
  int sample_rate = 0;
  int n_fft = 0;
};

MelFilterbank build_mel_filterbank(int n_mels = kNMels, int n_fft = kNFft,
                                   int sample_rate = kSampleRate);

// Shared immutable filterbank with the default geometry.
const MelFilterbank& default_mel_filterbank();

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Full feature chain for one fixed-length chunk: reflect-padded STFT power
// spectrogram, mel projection, log10 with a 1e-10 floor, dynamic-range
// compression to (max - 8), then (x + 4) / 4.
LogMelSpectrogram log_mel_spectrogram(const AudioBuffer& audio, const MelFilterbank& bank);
LogMelSpectrogram log_mel_spectrogram(const AudioBuffer& audio);

// Debug dump: "VSMEL1" magic, u32 rows, u32 cols, then row-major f32 values,
// all little-endian.
void save_mel_dump(const LogMelSpectrogram& mel, const std::string& path);
LogMelSpectrogram load_mel_dump(const std::string& path);

}  // namespace vsg
