// Copyright 2026 The vsg Authors
// Licensed under the Apache License, Version 2.0

#include "vsg/audio_io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "vsg/errors.hpp"

namespace vsg {
namespace {

// ─── little-endian primitives ──────────────────────────────────────────────

std::uint16_t read_u16le(std::span<const std::uint8_t> b, std::size_t off) {
  return static_cast<std::uint16_t>(b[off] | (b[off + 1] << 8));
}

std::uint32_t read_u32le(std::span<const std::uint8_t> b, std::size_t off) {
  return static_cast<std::uint32_t>(b[off]) | (static_cast<std::uint32_t>(b[off + 1]) << 8) |
         (static_cast<std::uint32_t>(b[off + 2]) << 16) |
         (static_cast<std::uint32_t>(b[off + 3]) << 24);
}

void put_u16le(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32le(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
  out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xFF));
  out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xFF));
}

bool tag_at(std::span<const std::uint8_t> b, std::size_t off, const char* tag) {
  return std::memcmp(b.data() + off, tag, 4) == 0;
}

float float_from_bits(std::uint32_t bits) {
  float f;
  std::memcpy(&f, &bits, sizeof f);
  return f;
}

std::uint32_t bits_from_float(float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, sizeof bits);
  return bits;
}

// ─── WAVE format codes we accept ───────────────────────────────────────────

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatIeeeFloat = 3;

struct FmtChunk {
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits_per_sample = 0;
};

}  // namespace

AudioBuffer decode_wav(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || !tag_at(bytes, 0, "RIFF") || !tag_at(bytes, 8, "WAVE")) {
    raise(Err::MalformedContainer, "not a RIFF/WAVE file");
  }

  FmtChunk fmt;
  bool have_fmt = false;
  const std::uint8_t* data_ptr = nullptr;
  std::size_t data_len = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::size_t chunk_size = read_u32le(bytes, pos + 4);
    const std::size_t body = pos + 8;
    if (body + chunk_size > bytes.size()) {
      raise(Err::MalformedContainer, "chunk overruns file");
    }
    if (tag_at(bytes, pos, "fmt ")) {
      if (chunk_size < 16) raise(Err::MalformedContainer, "fmt chunk too short");
      fmt.format = read_u16le(bytes, body);
      fmt.channels = read_u16le(bytes, body + 2);
      fmt.sample_rate = read_u32le(bytes, body + 4);
      fmt.bits_per_sample = read_u16le(bytes, body + 14);
      have_fmt = true;
    } else if (tag_at(bytes, pos, "data")) {
      data_ptr = bytes.data() + body;
      data_len = chunk_size;
    }
    pos = body + chunk_size + (chunk_size & 1);  // chunks are word-aligned
  }

  if (!have_fmt) raise(Err::MalformedContainer, "missing fmt chunk");
  if (data_ptr == nullptr) raise(Err::MalformedContainer, "missing data chunk");
  if (fmt.sample_rate == 0) raise(Err::MalformedContainer, "zero sample rate");
  if (fmt.channels < 1 || fmt.channels > 2) {
    raise(Err::UnsupportedEncoding,
          "unsupported channel count " + std::to_string(fmt.channels));
  }

  const bool pcm16 = fmt.format == kFormatPcm && fmt.bits_per_sample == 16;
  const bool f32 = fmt.format == kFormatIeeeFloat && fmt.bits_per_sample == 32;
  if (!pcm16 && !f32) {
    raise(Err::UnsupportedEncoding, "only PCM16 and IEEE float32 are supported (format " +
                                        std::to_string(fmt.format) + ", " +
                                        std::to_string(fmt.bits_per_sample) + " bit)");
  }

  const std::size_t bytes_per_sample = pcm16 ? 2 : 4;
  const std::size_t frame_size = bytes_per_sample * fmt.channels;
  if (data_len % frame_size != 0) {
    raise(Err::MalformedContainer, "data chunk size is not a whole number of frames");
  }
  const std::size_t n_frames = data_len / frame_size;
  if (n_frames == 0) raise(Err::EmptyInput, "data chunk holds no samples");

  AudioBuffer out;
  out.sample_rate = static_cast<int>(fmt.sample_rate);
  out.samples.resize(n_frames);
  const float inv_channels = 1.0f / static_cast<float>(fmt.channels);
  const std::span<const std::uint8_t> data(data_ptr, data_len);

  for (std::size_t i = 0; i < n_frames; ++i) {
    float acc = 0.0f;
    for (std::uint16_t c = 0; c < fmt.channels; ++c) {
      const std::size_t off = (i * fmt.channels + c) * bytes_per_sample;
      if (pcm16) {
        const auto raw = static_cast<std::int16_t>(read_u16le(data, off));
        acc += static_cast<float>(raw) / 32768.0f;
      } else {
        const float v = float_from_bits(read_u32le(data, off));
        if (!std::isfinite(v)) raise(Err::MalformedContainer, "non-finite float sample");
        acc += std::fmin(1.0f, std::fmax(-1.0f, v));
      }
    }
    out.samples[i] = acc * inv_channels;
  }
  return out;
}

AudioBuffer load_wav(const std::string& path) {
  const std::vector<std::uint8_t> bytes = read_file_bytes(path);
  return decode_wav(bytes);
}

namespace {

std::vector<std::uint8_t> encode_wav(const AudioBuffer& audio, std::uint16_t format,
                                     std::uint16_t bits) {
  if (audio.samples.empty()) raise(Err::EmptyInput, "nothing to encode");
  if (audio.sample_rate <= 0) raise(Err::OutOfRange, "invalid sample rate");

  const std::uint32_t bytes_per_sample = bits / 8;
  const std::uint32_t data_len = static_cast<std::uint32_t>(audio.samples.size()) * bytes_per_sample;

  std::vector<std::uint8_t> out;
  out.reserve(44 + data_len);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put_u32le(out, 36 + data_len);
  out.insert(out.end(), {'W', 'A', 'V', 'E'});
  out.insert(out.end(), {'f', 'm', 't', ' '});
  put_u32le(out, 16);
  put_u16le(out, format);
  put_u16le(out, 1);  // mono
  put_u32le(out, static_cast<std::uint32_t>(audio.sample_rate));
  put_u32le(out, static_cast<std::uint32_t>(audio.sample_rate) * bytes_per_sample);
  put_u16le(out, static_cast<std::uint16_t>(bytes_per_sample));
  put_u16le(out, bits);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put_u32le(out, data_len);

  if (format == kFormatPcm) {
    for (float s : audio.samples) {
      long q = std::lrintf(s * 32768.0f);
      if (q > 32767) q = 32767;
      if (q < -32768) q = -32768;
      put_u16le(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
    }
  } else {
    for (float s : audio.samples) put_u32le(out, bits_from_float(s));
  }
  return out;
}

}  // namespace

std::vector<std::uint8_t> encode_wav_pcm16(const AudioBuffer& audio) {
  return encode_wav(audio, kFormatPcm, 16);
}

std::vector<std::uint8_t> encode_wav_float32(const AudioBuffer& audio) {
  return encode_wav(audio, kFormatIeeeFloat, 32);
}

void save_wav_pcm16(const AudioBuffer& audio, const std::string& path) {
  const auto bytes = encode_wav_pcm16(audio);
  write_file_bytes(path, bytes.data(), bytes.size());
}

// ─── rate conversion ─────────────────────────────────────────────────────────

namespace {

constexpr int kSincTaps = 32;        // taps per phase
constexpr int kSincCenter = kSincTaps / 2 - 1;
constexpr int kSincPhases = 512;     // fractional-offset resolution
constexpr double kSincRolloff = 0.92;

double windowed_sinc(double u, double cutoff) {
  // u in input samples, |u| <= kSincTaps / 2. Hann window over the full span.
  constexpr double half = kSincTaps / 2.0;
  constexpr double pi = 3.14159265358979323846;
  if (u <= -half || u >= half) return 0.0;
  const double window = 0.5 * (1.0 + std::cos(pi * u / half));
  const double x = 2.0 * cutoff * u;
  const double sinc = x == 0.0 ? 1.0 : std::sin(pi * x) / (pi * x);
  return 2.0 * cutoff * sinc * window;
}

// One kernel row per fractional phase p / kSincPhases (inclusive, so linear
// interpolation between rows p and p+1 never reads past the table). Rows are
// normalized to unit sum: exact DC gain per phase.
Matf build_sinc_table(double cutoff) {
  Matf table(kSincPhases + 1, kSincTaps);
  for (int p = 0; p <= kSincPhases; ++p) {
    const double frac = static_cast<double>(p) / kSincPhases;
    double sum = 0.0;
    double row[kSincTaps];
    for (int k = 0; k < kSincTaps; ++k) {
      row[k] = windowed_sinc(static_cast<double>(k - kSincCenter) - frac, cutoff);
      sum += row[k];
    }
    for (int k = 0; k < kSincTaps; ++k) {
      table(p, k) = static_cast<float>(row[k] / sum);
    }
  }
  return table;
}

}  // namespace

AudioBuffer resample(const AudioBuffer& audio, int target_rate) {
  if (audio.sample_rate <= 0 || target_rate <= 0) {
    raise(Err::OutOfRange, "sample rates must be positive");
  }
  if (audio.samples.empty()) raise(Err::EmptyInput, "nothing to resample");
  if (target_rate == audio.sample_rate) return audio;

  const double ratio = static_cast<double>(target_rate) / audio.sample_rate;
  // Anti-alias at the narrower of the two Nyquist bands, in cycles per input
  // sample, backed off by the rolloff factor to leave the transition band room.
  const double cutoff = 0.5 * kSincRolloff * std::min(1.0, ratio);
  const Matf table = build_sinc_table(cutoff);

  const auto n_in = static_cast<std::int64_t>(audio.samples.size());
  const auto n_out = static_cast<std::int64_t>(
      std::llround(static_cast<double>(n_in) * target_rate / audio.sample_rate));

  AudioBuffer out;
  out.sample_rate = target_rate;
  out.samples.resize(static_cast<std::size_t>(n_out));
  const float* x = audio.samples.data();

  for (std::int64_t n = 0; n < n_out; ++n) {
    const double t = static_cast<double>(n) * audio.sample_rate / target_rate;
    const auto i0 = static_cast<std::int64_t>(std::floor(t));
    const double frac = t - static_cast<double>(i0);
    const double pf = frac * kSincPhases;
    const auto p0 = std::min(static_cast<int>(pf), kSincPhases - 1);
    const float a = static_cast<float>(pf - p0);

    const std::int64_t first = i0 - kSincCenter;
    float acc0 = 0.0f;
    float acc1 = 0.0f;
    if (first >= 0 && first + kSincTaps <= n_in) {
      Eigen::Map<const Eigen::Matrix<float, kSincTaps, 1>> xw(x + first);
      acc0 = table.row(p0).dot(xw);
      acc1 = table.row(p0 + 1).dot(xw);
    } else {
      for (int k = 0; k < kSincTaps; ++k) {
        const std::int64_t j = first + k;
        if (j < 0 || j >= n_in) continue;  // zero beyond the edges
        acc0 += table(p0, k) * x[j];
        acc1 += table(p0 + 1, k) * x[j];
      }
    }
    out.samples[static_cast<std::size_t>(n)] = (1.0f - a) * acc0 + a * acc1;
  }
  return out;
}

AudioBuffer pad_or_trim(const AudioBuffer& audio) {
  if (audio.sample_rate != kSampleRate) {
    raise(Err::WrongRate, "expected " + std::to_string(kSampleRate) + " Hz, got " +
                              std::to_string(audio.sample_rate));
  }
  AudioBuffer out;
  out.sample_rate = kSampleRate;
  out.samples = audio.samples;
  out.samples.resize(kChunkSamples, 0.0f);  // grows with zeros or truncates
  return out;
}

// ─── whole-file helpers ──────────────────────────────────────────────────────

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Err::IoFailure, "cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) raise(Err::IoFailure, "read failed for " + path);
  return bytes;
}

void write_file_bytes(const std::string& path, const std::uint8_t* data, std::size_t len) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(Err::IoFailure, "cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(len));
  out.flush();
  if (!out) raise(Err::IoFailure, "write failed for " + path);
}

}  // namespace vsg
