// Copyright 2026 The vsg Authors
// Licensed under the Apache License, Version 2.0

#include "vsg/dsp_frontend.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <cstring>
#include <vector>

#include "vsg/audio_io.hpp"
#include "vsg/errors.hpp"

namespace vsg {
namespace {

constexpr double kPi = 3.14159265358979323846;

// Slaney mel scale: linear below the 1 kHz break, logarithmic above.
constexpr double kMelHighFreq = 1000.0;
constexpr double kMelHighMel = 15.0;
constexpr double kMelLinearStep = 200.0 / 3.0;
const double kMelLogStep = std::log(6.4) / 27.0;

}  // namespace

double hz_to_mel(double hz) {
  if (hz <= kMelHighFreq) return hz / kMelLinearStep;
  return kMelHighMel + std::log(hz / kMelHighFreq) / kMelLogStep;
}

double mel_to_hz(double mel) {
  if (mel <= kMelHighMel) return mel * kMelLinearStep;
  return kMelHighFreq * std::exp(kMelLogStep * (mel - kMelHighMel));
}

Vecf hann_window(int n) {
  if (n < 2) raise(Err::OutOfRange, "window length must be at least 2");
  Vecf w(n);
  for (int k = 0; k < n; ++k) {
    w[k] = static_cast<float>(0.5 * (1.0 - std::cos(2.0 * kPi * k / n)));
  }
  return w;
}

MelFilterbank build_mel_filterbank(int n_mels, int n_fft, int sample_rate) {
  if (n_mels < 1 || n_fft < 4 || sample_rate < 2) {
    raise(Err::OutOfRange, "invalid filterbank geometry");
  }
  const int n_bins = n_fft / 2 + 1;
  const double mel_max = hz_to_mel(sample_rate / 2.0);

  // n_mels + 2 edge frequencies, equally spaced in mel.
  std::vector<double> edges(n_mels + 2);
  for (int i = 0; i < n_mels + 2; ++i) {
    edges[i] = mel_to_hz(mel_max * i / (n_mels + 1));
  }

  MelFilterbank bank;
  bank.sample_rate = sample_rate;
  bank.n_fft = n_fft;
  bank.weights = Matf::Zero(n_mels, n_bins);
  bank.center_freqs.resize(n_mels);

  for (int i = 0; i < n_mels; ++i) {
    const double lo = edges[i];
    const double mid = edges[i + 1];
    const double hi = edges[i + 2];
    bank.center_freqs[i] = static_cast<float>(mid);
    const double enorm = 2.0 / (hi - lo);  // area normalization
    for (int j = 0; j < n_bins; ++j) {
      const double f = static_cast<double>(j) * sample_rate / n_fft;
      const double up = (f - lo) / (mid - lo);
      const double down = (hi - f) / (hi - mid);
      const double w = std::max(0.0, std::min(up, down));
      bank.weights(i, j) = static_cast<float>(w * enorm);
    }
  }
  return bank;
}

const MelFilterbank& default_mel_filterbank() {
  static const MelFilterbank bank = build_mel_filterbank();
  return bank;
}

LogMelSpectrogram log_mel_spectrogram(const AudioBuffer& audio, const MelFilterbank& bank) {
  if (audio.sample_rate != bank.sample_rate) {
    raise(Err::WrongRate, "expected " + std::to_string(bank.sample_rate) + " Hz, got " +
                              std::to_string(audio.sample_rate));
  }
  if (static_cast<int>(audio.samples.size()) != kChunkSamples) {
    raise(Err::WrongLength, "expected " + std::to_string(kChunkSamples) + " samples, got " +
                                std::to_string(audio.samples.size()));
  }

  const int n_fft = bank.n_fft;
  const int n_bins = n_fft / 2 + 1;
  const int pad = n_fft / 2;
  const int n = kChunkSamples;
  // One more frame fits than n / hop; the final frame is dropped so the frame
  // count is exactly the chunk length over the hop.
  const int n_frames = n / kHopLength;

  const Vecf window = hann_window(n_fft);
  const float* x = audio.samples.data();

  Matf power(n_bins, n_frames);
  Eigen::FFT<float> fft;
  fft.SetFlag(Eigen::FFT<float>::HalfSpectrum);
  std::vector<float> frame(n_fft);
  std::vector<std::complex<float>> spectrum;

  for (int t = 0; t < n_frames; ++t) {
    const int start = t * kHopLength - pad;
    for (int k = 0; k < n_fft; ++k) {
      int idx = start + k;
      // Reflect padding; pad < n so one reflection is always enough.
      if (idx < 0) idx = -idx;
      if (idx >= n) idx = 2 * n - 2 - idx;
      frame[k] = x[idx] * window[k];
    }
    fft.fwd(spectrum, frame);
    for (int j = 0; j < n_bins; ++j) {
      power(j, t) = std::norm(spectrum[j]);
    }
  }

  Matf mel = (bank.weights * power).cwiseMax(1e-10f);
  Matf logmel = mel.array().log10().matrix();
  const float floor = logmel.maxCoeff() - 8.0f;
  LogMelSpectrogram out;
  out.values = ((logmel.cwiseMax(floor).array() + 4.0f) / 4.0f).matrix();
  return out;
}

LogMelSpectrogram log_mel_spectrogram(const AudioBuffer& audio) {
  return log_mel_spectrogram(audio, default_mel_filterbank());
}

// ─── debug dump format ───────────────────────────────────────────────────────

namespace {

constexpr char kMelMagic[6] = {'V', 'S', 'M', 'E', 'L', '1'};

void put_u32le(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
  out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xFF));
  out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xFF));
}

void put_f32le(std::vector<std::uint8_t>& out, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, sizeof bits);
  put_u32le(out, bits);
}

std::uint32_t get_u32le(const std::vector<std::uint8_t>& b, std::size_t off) {
  return static_cast<std::uint32_t>(b[off]) | (static_cast<std::uint32_t>(b[off + 1]) << 8) |
         (static_cast<std::uint32_t>(b[off + 2]) << 16) |
         (static_cast<std::uint32_t>(b[off + 3]) << 24);
}

float get_f32le(const std::vector<std::uint8_t>& b, std::size_t off) {
  const std::uint32_t bits = get_u32le(b, off);
  float f;
  std::memcpy(&f, &bits, sizeof f);
  return f;
}

}  // namespace

void save_mel_dump(const LogMelSpectrogram& mel, const std::string& path) {
  std::vector<std::uint8_t> out;
  out.reserve(sizeof kMelMagic + 8 + static_cast<std::size_t>(mel.values.size()) * 4);
  out.insert(out.end(), kMelMagic, kMelMagic + sizeof kMelMagic);
  put_u32le(out, static_cast<std::uint32_t>(mel.values.rows()));
  put_u32le(out, static_cast<std::uint32_t>(mel.values.cols()));
  for (Index r = 0; r < mel.values.rows(); ++r) {
    for (Index c = 0; c < mel.values.cols(); ++c) {
      put_f32le(out, mel.values(r, c));
    }
  }
  write_file_bytes(path, out.data(), out.size());
}

LogMelSpectrogram load_mel_dump(const std::string& path) {
  const std::vector<std::uint8_t> bytes = read_file_bytes(path);
  if (bytes.size() < sizeof kMelMagic + 8 ||
      std::memcmp(bytes.data(), kMelMagic, sizeof kMelMagic) != 0) {
    raise(Err::MalformedContainer, "not a mel dump: " + path);
  }
  const std::uint32_t rows = get_u32le(bytes, 6);
  const std::uint32_t cols = get_u32le(bytes, 10);
  const std::size_t expected = sizeof kMelMagic + 8 + static_cast<std::size_t>(rows) * cols * 4;
  if (rows == 0 || cols == 0 || bytes.size() != expected) {
    raise(Err::MalformedContainer, "mel dump size does not match its header: " + path);
  }
  LogMelSpectrogram mel;
  mel.values.resize(rows, cols);
  std::size_t off = sizeof kMelMagic + 8;
  for (std::uint32_t r = 0; r < rows; ++r) {
    for (std::uint32_t c = 0; c < cols; ++c, off += 4) {
      mel.values(r, c) = get_f32le(bytes, off);
    }
  }
  return mel;
}

}  // namespace vsg
