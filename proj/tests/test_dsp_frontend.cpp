// Copyright 2026 The vsg Authors
// Licensed under the Apache License, Version 2.0

#include <doctest.h>

#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "vsg/audio_io.hpp"
#include "vsg/dsp_frontend.hpp"
#include "vsg/errors.hpp"
#include "vsg/types.hpp"

using namespace vsg;

namespace {

LogMelSpectrogram spectrogram_of(const AudioBuffer& buf) {
  return log_mel_spectrogram(pad_or_trim(buf), default_mel_filterbank());
}

// Index of the filter whose center frequency is nearest to hz.
int nearest_center_row(const MelFilterbank& bank, float hz) {
  int best = 0;
  float best_d = std::fabs(bank.center_freqs[0] - hz);
  for (int i = 1; i < static_cast<int>(bank.center_freqs.size()); ++i) {
    const float d = std::fabs(bank.center_freqs[i] - hz);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

// Row with the highest mean value over the tone's steady-state frames.
int dominant_row(const LogMelSpectrogram& mel, int frame_begin, int frame_end) {
  int best = 0;
  float best_v = -1e30f;
  for (int i = 0; i < mel.n_mels(); ++i) {
    float acc = 0.0f;
    for (int t = frame_begin; t < frame_end; ++t) acc += mel.values(i, t);
    if (acc > best_v) {
      best_v = acc;
      best = i;
    }
  }
  return best;
}

}  // namespace

TEST_SUITE("dsp_frontend") {

TEST_CASE("hann window endpoints, peak and periodic symmetry") {
  const auto w = hann_window(400);
  REQUIRE(w.size() == 400);
  CHECK(w[0] == doctest::Approx(0.0f).epsilon(1e-7));
  CHECK(w[200] == doctest::Approx(1.0f).epsilon(1e-7));
  for (int k = 1; k < 400; ++k) {
    CHECK(w[k] == doctest::Approx(w[400 - k]).epsilon(1e-6));
  }
  double sum = 0.0;
  for (float v : w) sum += v;
  CHECK(sum == doctest::Approx(200.0).epsilon(1e-6));  // periodic Hann sums to n/2
  CHECK_THROWS_WITH_AS(hann_window(1), doctest::Contains("OutOfRange"), Error);
}

TEST_CASE("mel scale is piecewise and invertible") {
  CHECK(hz_to_mel(0.0f) == doctest::Approx(0.0f));
  CHECK(hz_to_mel(1000.0f) == doctest::Approx(15.0f).epsilon(1e-6));
  CHECK(mel_to_hz(15.0f) == doctest::Approx(1000.0f).epsilon(1e-5));
  // Below the break the mapping is linear at 3/200 mel per Hz.
  CHECK(hz_to_mel(500.0f) == doctest::Approx(7.5f).epsilon(1e-6));
  float prev = -1.0f;
  for (float hz = 0.0f; hz <= 8000.0f; hz += 37.0f) {
    const float m = hz_to_mel(hz);
    CHECK(m > prev);
    prev = m;
    CHECK(mel_to_hz(m) == doctest::Approx(hz).epsilon(1e-4));
  }
}

TEST_CASE("filterbank geometry") {
  const MelFilterbank& bank = default_mel_filterbank();
  REQUIRE(bank.weights.rows() == kNMels);
  REQUIRE(bank.weights.cols() == kNFreqBins);
  REQUIRE(bank.center_freqs.size() == kNMels);
  for (int i = 1; i < kNMels; ++i) CHECK(bank.center_freqs[i] > bank.center_freqs[i - 1]);
  CHECK(bank.center_freqs[0] > 0.0f);
  CHECK(bank.center_freqs[kNMels - 1] < 8000.0f);
  // All weights are finite and non-negative; every filter has support.
  CHECK(bank.weights.allFinite());
  CHECK(bank.weights.minCoeff() >= 0.0f);
  for (int i = 0; i < kNMels; ++i) CHECK(bank.weights.row(i).sum() > 0.0f);
  // The first filter is fully below the second break: DC bin carries no weight.
  CHECK(bank.weights(0, 0) == 0.0f);
}

TEST_CASE("spectrogram has the embedding geometry") {
  const AudioBuffer buf = vsg_test::make_tone(440.0f, 2.0f, 16000);
  const LogMelSpectrogram mel = spectrogram_of(buf);
  CHECK(mel.n_mels() == 80);
  CHECK(mel.n_frames() == 3000);
  CHECK(mel.values.allFinite());
}

TEST_CASE("silence maps to a uniform floor of -1.5") {
  const LogMelSpectrogram mel = spectrogram_of(vsg_test::make_silence(1.0f, 16000));
  CHECK(mel.values.maxCoeff() == doctest::Approx(-1.5f).epsilon(1e-5));
  CHECK(mel.values.minCoeff() == doctest::Approx(-1.5f).epsilon(1e-5));
  CHECK(mel.values.maxCoeff() == mel.values.minCoeff());
}

TEST_CASE("a 440 Hz tone lands in the filter centered nearest 440 Hz") {
  const MelFilterbank& bank = default_mel_filterbank();
  const int want = nearest_center_row(bank, 440.0f);
  CHECK(want == 11);  // centers are about 37.2 Hz apart in the linear region
  const AudioBuffer buf = vsg_test::make_tone(440.0f, 5.0f, 16000, 0.8f);
  const LogMelSpectrogram mel = spectrogram_of(buf);
  CHECK(dominant_row(mel, 100, 200) == want);
}

TEST_CASE("tones probed across the band stay within one row of their filter") {
  const MelFilterbank& bank = default_mel_filterbank();
  const float probes[] = {200.0f, 440.0f, 880.0f, 1500.0f, 2500.0f, 4000.0f, 6000.0f};
  for (float hz : probes) {
    CAPTURE(hz);
    const AudioBuffer buf = vsg_test::make_tone(hz, 3.0f, 16000, 0.6f);
    const LogMelSpectrogram mel = spectrogram_of(buf);
    const int got = dominant_row(mel, 50, 150);
    const int want = nearest_center_row(bank, hz);
    CHECK(std::abs(got - want) <= 1);
  }
}

TEST_CASE("a 10x gain shift moves normalized values by one half") {
  const LogMelSpectrogram quiet = spectrogram_of(vsg_test::make_tone(440.0f, 5.0f, 16000, 0.05f));
  const LogMelSpectrogram loud = spectrogram_of(vsg_test::make_tone(440.0f, 5.0f, 16000, 0.5f));
  // log10(100x power) = 2, normalized by /4 gives +0.5 wherever the tone
  // dominates the floor and the dynamic-range clamp.
  for (int t = 100; t < 120; ++t) {
    CHECK(loud.values(11, t) - quiet.values(11, t) == doctest::Approx(0.5f).epsilon(2e-3));
  }
}

TEST_CASE("hostile inputs stay finite") {
  SUBCASE("full-scale DC") {
    AudioBuffer buf;
    buf.sample_rate = 16000;
    buf.samples.assign(kChunkSamples, 1.0f);
    CHECK(log_mel_spectrogram(buf, default_mel_filterbank()).values.allFinite());
  }
  SUBCASE("full-scale square wave") {
    AudioBuffer buf;
    buf.sample_rate = 16000;
    buf.samples.resize(kChunkSamples);
    for (std::size_t i = 0; i < buf.samples.size(); ++i) {
      buf.samples[i] = ((i / 80) % 2 == 0) ? 1.0f : -1.0f;  // 100 Hz square
    }
    CHECK(log_mel_spectrogram(buf, default_mel_filterbank()).values.allFinite());
  }
}

TEST_CASE("dynamic range never exceeds 8 dB-decades over 4") {
  const LogMelSpectrogram mel = spectrogram_of(vsg_test::make_tone(1000.0f, 2.0f, 16000, 0.9f));
  CHECK(mel.values.maxCoeff() - mel.values.minCoeff() <= 2.0f + 1e-6f);
}

TEST_CASE("spectrogram is deterministic") {
  const AudioBuffer buf = vsg_test::make_tone(523.25f, 1.5f, 16000, 0.3f);
  const LogMelSpectrogram a = spectrogram_of(buf);
  const LogMelSpectrogram b = spectrogram_of(buf);
  CHECK((a.values.array() == b.values.array()).all());
}

TEST_CASE("input contract is enforced") {
  AudioBuffer bad;
  bad.sample_rate = 16000;
  bad.samples.assign(1000, 0.0f);
  CHECK_THROWS_WITH_AS(log_mel_spectrogram(bad, default_mel_filterbank()),
                       doctest::Contains("WrongLength"), Error);

  AudioBuffer wrong_rate;
  wrong_rate.sample_rate = 22050;
  wrong_rate.samples.assign(kChunkSamples, 0.0f);
  CHECK_THROWS_WITH_AS(log_mel_spectrogram(wrong_rate, default_mel_filterbank()),
                       doctest::Contains("WrongRate"), Error);
}

TEST_CASE("mel dumps roundtrip bitwise and reject corruption") {
  const std::string dir = vsg_test::temp_dir("mel");
  const std::string path = dir + "/probe.mel";
  const LogMelSpectrogram mel = spectrogram_of(vsg_test::make_tone(440.0f, 1.0f, 16000));
  save_mel_dump(mel, path);

  const LogMelSpectrogram back = load_mel_dump(path);
  REQUIRE(back.n_mels() == mel.n_mels());
  REQUIRE(back.n_frames() == mel.n_frames());
  CHECK((back.values.array() == mel.values.array()).all());

  auto bytes = read_file_bytes(path);
  bytes[0] ^= 0xFF;
  write_file_bytes(path, bytes);
  CHECK_THROWS_WITH_AS(load_mel_dump(path), doctest::Contains("MalformedContainer"), Error);

  bytes[0] ^= 0xFF;
  bytes.resize(bytes.size() / 2);
  write_file_bytes(path, bytes);
  CHECK_THROWS_WITH_AS(load_mel_dump(path), doctest::Contains("MalformedContainer"), Error);
}

}  // TEST_SUITE
