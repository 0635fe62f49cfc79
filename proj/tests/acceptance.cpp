// Copyright 2026 The vsg Authors
// Licensed under the Apache License, Version 2.0
//
// Release acceptance: every deployment-blocking property of the engine,
// checked end to end against frozen reference numbers. One line per
// criterion; the process exits nonzero if any criterion fails.

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "vsg/audio_io.hpp"
#include "vsg/dsp_frontend.hpp"
#include "vsg/encoder_backend.hpp"
#include "vsg/errors.hpp"
#include "vsg/eval_lab.hpp"
#include "vsg/gateway.hpp"
#include "vsg/head_trainer.hpp"
#include "vsg/rng.hpp"
#include "vsg/safety_head.hpp"
#include "vsg/types.hpp"

// httplib drags in <resolv.h>, whose _res macro mangles Eigen internals;
// keep it after any header that includes Eigen.
#include <httplib.h>
#include <json.hpp>

using namespace vsg;

namespace {

int g_failures = 0;

void criterion(int id, const char* desc, const std::function<bool(std::string&)>& fn) {
  std::string detail;
  bool ok = false;
  try {
    ok = fn(detail);
  } catch (const std::exception& e) {
    ok = false;
    detail = e.what();
  }
  if (!ok) ++g_failures;
  if (detail.empty()) {
    std::printf("%s C%02d %s\n", ok ? "PASS" : "FAIL", id, desc);
  } else {
    std::printf("%s C%02d %s (%s)\n", ok ? "PASS" : "FAIL", id, desc, detail.c_str());
  }
  std::fflush(stdout);
}

bool close_to(double got, double want, double tol, const char* name, std::string& detail) {
  if (std::fabs(got - want) <= tol) return true;
  std::ostringstream os;
  os << name << " = " << got << ", want " << want << " +/- " << tol;
  detail = os.str();
  return false;
}

// The held-out operating point the release notes quote: 947 clips, one false
// alarm, seven misses.
struct ScoredSet {
  Vecf scores;
  std::vector<std::uint8_t> labels;
};

ScoredSet reference_test_set() {
  ScoredSet s;
  s.scores.resize(947);
  s.labels.resize(947);
  int k = 0;
  for (int i = 0; i < 646; ++i, ++k) { s.scores[k] = 0.1f; s.labels[k] = 0; }
  s.scores[k] = 0.9f; s.labels[k] = 0; ++k;
  for (int i = 0; i < 7; ++i, ++k) { s.scores[k] = 0.1f; s.labels[k] = 1; }
  for (int i = 0; i < 293; ++i, ++k) { s.scores[k] = 0.9f; s.labels[k] = 1; }
  return s;
}

ScoredSet random_scored_set(SplitMix64& rng, int n) {
  ScoredSet s;
  s.scores.resize(n);
  s.labels.resize(n);
  for (int i = 0; i < n; ++i) {
    s.labels[i] = rng.next_double() < 0.35 ? 1 : 0;
    float v = rng.next_float(0.0f, 1.0f);
    if (rng.next_below(4) == 0) v = std::round(v * 10.0f) / 10.0f;  // force ties
    s.scores[i] = v;
  }
  return s;
}

double pairwise_auc(const Vecf& scores, const std::vector<std::uint8_t>& labels) {
  double wins = 0.0;
  std::int64_t pairs = 0;
  for (int i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (int j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      ++pairs;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

template <class S>
bool gradcheck_once(std::uint64_t seed, bool with_dropout, S fd_step, double tol,
                    double& worst_rel) {
  SplitMix64 rng(seed);
  const Index in = 3 + static_cast<Index>(rng.next_below(8));
  const Index hidden = 2 + static_cast<Index>(rng.next_below(7));
  const Index batch = 2 + static_cast<Index>(rng.next_below(5));

  HeadParamsT<S> p = HeadParamsT<S>::zeros(in, hidden, 2);
  auto fill = [&](auto& m) {
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<S>(rng.next_double() - 0.5);
  };
  fill(p.w1);
  fill(p.b1);
  fill(p.w2);
  fill(p.b2);

  Mat<S> x(batch, in);
  for (Index i = 0; i < x.size(); ++i) x.data()[i] = static_cast<S>(rng.next_double() * 2.0 - 1.0);
  std::vector<std::uint8_t> labels(static_cast<std::size_t>(batch));
  bool has0 = false, has1 = false;
  for (auto& l : labels) {
    l = rng.next_below(2) ? 1 : 0;
    (l ? has1 : has0) = true;
  }
  if (!has0) labels[0] = 0;
  if (!has1) labels[labels.size() - 1] = 1;

  Mat<S> mask;
  const Mat<S>* mask_ptr = nullptr;
  if (with_dropout) {
    SplitMix64 mask_rng(seed ^ 0x5DEECE66DULL);
    mask = dropout_mask<S>(batch, hidden, S(0.3), mask_rng);
    mask_ptr = &mask;
  }

  const S w_safe = S(0.7), w_mal = S(1.6);
  const BatchCache<S> cache = head_forward_batch(x, p, mask_ptr);
  const auto [loss, grads] = head_backward(cache, labels, p, w_safe, w_mal);
  (void)loss;

  const auto loss_at = [&]() {
    const BatchCache<S> c = head_forward_batch(x, p, mask_ptr);
    return weighted_cross_entropy(c.logits, labels, w_safe, w_mal);
  };

  double max_abs = 0.0;
  double max_err = 0.0;
  auto probe = [&](auto& theta, const auto& grad) {
    for (Index i = 0; i < theta.size(); ++i) {
      const S saved = theta.data()[i];
      theta.data()[i] = saved + fd_step;
      const double lp = static_cast<double>(loss_at());
      theta.data()[i] = saved - fd_step;
      const double lm = static_cast<double>(loss_at());
      theta.data()[i] = saved;
      const double numeric = (lp - lm) / (2.0 * static_cast<double>(fd_step));
      max_err = std::max(max_err, std::fabs(numeric - static_cast<double>(grad.data()[i])));
      max_abs = std::max(max_abs, std::fabs(numeric));
    }
  };
  probe(p.w1, grads.w1);
  probe(p.b1, grads.b1);
  probe(p.w2, grads.w2);
  probe(p.b2, grads.b2);

  const double rel = max_err / std::max(max_abs, 1e-12);
  worst_rel = std::max(worst_rel, rel);
  return rel < tol;
}

std::vector<std::string> read_lines(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  std::vector<std::string> lines;
  std::string cur;
  for (std::uint8_t b : bytes) {
    if (b == '\n') {
      lines.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(static_cast<char>(b));
    }
  }
  if (!cur.empty()) lines.push_back(cur);
  return lines;
}

}  // namespace

int main() {
  // ── C01: the published operating point reproduces from raw counts ──────────
  criterion(1, "held-out metrics match the frozen release numbers", [](std::string& detail) {
    const ScoredSet s = reference_test_set();
    const ConfusionMatrix cm = confusion_matrix(s.scores, s.labels, 0.5);
    if (cm.tn != 646 || cm.fp != 1 || cm.fn != 7 || cm.tp != 293) {
      detail = "confusion matrix differs";
      return false;
    }
    const MetricsReport m = metrics_from_cm(cm);
    const double tol = 5e-4;
    return close_to(m.accuracy, 0.9916, tol, "accuracy", detail) &&
           close_to(m.precision, 0.9966, tol, "precision", detail) &&
           close_to(m.recall, 0.9767, tol, "recall", detail) &&
           close_to(m.f1, 0.9865, tol, "f1", detail) &&
           close_to(m.fnr, 0.0233, tol, "fnr", detail) &&
           close_to(m.fpr, 0.0015, tol, "fpr", detail);
  });

  // ── C02: inverse-frequency class weights for the corpus counts ─────────────
  criterion(2, "class weights for 4310/2000 are 0.7320 and 1.5775", [](std::string& detail) {
    const auto w = class_weights(4310, 2000);
    return close_to(w.first, 0.7320, 5e-4, "weight_safe", detail) &&
           close_to(w.second, 1.5775, 5e-4, "weight_malicious", detail);
  });

  // ── C03: the 70/15/15 stratified split reproduces exactly ──────────────────
  criterion(3, "stratified split yields 4416/947/947 with pinned class counts",
            [](std::string& detail) {
    std::vector<std::uint8_t> labels(6310, 0);
    for (int i = 4310; i < 6310; ++i) labels[i] = 1;
    const SplitIndices split = stratified_split(labels, {0.70, 0.15, 0.15}, 2024);

    auto counts = [&](const std::vector<Index>& part) {
      std::pair<std::int64_t, std::int64_t> c{0, 0};
      for (Index i : part) (labels[static_cast<std::size_t>(i)] ? c.second : c.first)++;
      return c;
    };
    const auto tr = counts(split.train), va = counts(split.val), te = counts(split.test);
    std::vector<bool> seen(6310, false);
    for (const auto* part : {&split.train, &split.val, &split.test}) {
      for (Index i : *part) {
        if (i < 0 || i >= 6310 || seen[static_cast<std::size_t>(i)]) {
          detail = "split is not a partition";
          return false;
        }
        seen[static_cast<std::size_t>(i)] = true;
      }
    }
    std::ostringstream os;
    os << "train " << split.train.size() << " (" << tr.first << "/" << tr.second << "), val "
       << split.val.size() << " (" << va.first << "/" << va.second << "), test "
       << split.test.size() << " (" << te.first << "/" << te.second << ")";
    const bool ok = split.train.size() == 4416 && split.val.size() == 947 &&
                    split.test.size() == 947 && tr.first == 3016 && tr.second == 1400 &&
                    va.first == 647 && va.second == 300 && te.first == 647 && te.second == 300;
    if (!ok) detail = os.str();
    return ok;
  });

  // ── C04: learning-rate schedule anchor values ───────────────────────────────
  criterion(4, "lr schedule hits 0, 3e-5, 1.5e-5, 0 at steps 0/200/1600/3000",
            [](std::string& detail) {
    TrainConfig cfg;
    if (lr_schedule(0, cfg) != 0.0f) {
      detail = "step 0 is not exactly zero";
      return false;
    }
    if (lr_schedule(200, cfg) != cfg.lr_max) {
      detail = "warmup end does not reach lr_max exactly";
      return false;
    }
    if (std::fabs(static_cast<double>(lr_schedule(1600, cfg)) - 1.5e-5) > 1e-9) {
      detail = "cosine midpoint is off";
      return false;
    }
    if (lr_schedule(3000, cfg) != 0.0f) {
      detail = "final step is not exactly zero";
      return false;
    }
    return true;
  });

  // ── C05: analytic gradients against finite differences ─────────────────────
  criterion(5, "gradients match finite differences in f32 and f64", [](std::string& detail) {
    double worst32 = 0.0, worst64 = 0.0;
    for (int i = 0; i < 20; ++i) {
      const bool with_dropout = i % 2 == 1;
      if (!gradcheck_once<float>(9000 + i, with_dropout, 1e-2f, 1e-3, worst32)) {
        detail = "f32 instance " + std::to_string(i) + " exceeded 1e-3";
        return false;
      }
      if (!gradcheck_once<double>(9100 + i, with_dropout, 1e-5, 1e-6, worst64)) {
        detail = "f64 instance " + std::to_string(i) + " exceeded 1e-6";
        return false;
      }
    }
    std::ostringstream os;
    os << "worst rel err f32 " << worst32 << ", f64 " << worst64;
    detail = os.str();
    return true;
  });

  // ── C06: rank statistics equal brute force exactly ──────────────────────────
  criterion(6, "roc auc and threshold selection match exhaustive oracles",
            [](std::string& detail) {
    SplitMix64 rng(424242);
    const auto grid = default_threshold_grid();
    int done = 0;
    while (done < 200) {
      const ScoredSet s = random_scored_set(rng, 4 + static_cast<int>(rng.next_below(57)));
      bool pos = false, neg = false;
      for (auto l : s.labels) (l ? pos : neg) = true;
      if (!pos || !neg) continue;
      ++done;

      if (roc_auc(s.scores, s.labels) != pairwise_auc(s.scores, s.labels)) {
        detail = "roc_auc differs from the pairwise oracle on set " + std::to_string(done);
        return false;
      }
      const auto rows = threshold_sweep(s.scores, s.labels, grid);
      double best_tau = rows[0].tau, best_f1 = rows[0].f1;
      for (const SweepRow& r : rows) {
        if (r.f1 > best_f1) {
          best_f1 = r.f1;
          best_tau = r.tau;
        }
      }
      if (select_threshold(s.scores, s.labels, grid) != best_tau) {
        detail = "select_threshold differs from argmax on set " + std::to_string(done);
        return false;
      }
    }
    return true;
  });

  // ── C07: sweep monotonicity ─────────────────────────────────────────────────
  criterion(7, "recall and fpr are non-increasing across the threshold grid",
            [](std::string& detail) {
    SplitMix64 rng(171717);
    const auto grid = default_threshold_grid();
    for (int t = 0; t < 100; ++t) {
      const ScoredSet s = random_scored_set(rng, 5 + static_cast<int>(rng.next_below(80)));
      const auto rows = threshold_sweep(s.scores, s.labels, grid);
      for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].recall > rows[i - 1].recall + 1e-15 || rows[i].fpr > rows[i - 1].fpr + 1e-15) {
          detail = "monotonicity violated on set " + std::to_string(t);
          return false;
        }
      }
    }
    return true;
  });

  // ── C08: the reference recipe separates the synthetic clusters ─────────────
  const EmbeddingDataset synth = make_two_cluster_dataset(1000, kEmbedDim, 0.1f, 1.0f, 100);
  criterion(8, "default training recipe reaches F1 >= 0.99 and reruns bit-identically",
            [&](std::string& detail) {
    const SplitIndices split = stratified_split(synth.labels, {0.8, 0.2, 0.0}, 7);
    const EmbeddingDataset train = gather(synth, split.train);
    const EmbeddingDataset val = gather(synth, split.val);

    TrainConfig cfg;  // the published recipe, verbatim defaults
    cfg.seed = 42;
    const TrainResult a = train_head(train, val, cfg);
    const TrainResult b = train_head(train, val, cfg);

    const bool identical = (a.params.w1.array() == b.params.w1.array()).all() &&
                           (a.params.b1.array() == b.params.b1.array()).all() &&
                           (a.params.w2.array() == b.params.w2.array()).all() &&
                           (a.params.b2.array() == b.params.b2.array()).all();
    if (!identical) {
      detail = "repeat run produced different parameters";
      return false;
    }
    std::ostringstream os;
    os << "best val F1 " << a.history.best_val_f1 << " at step " << a.history.best_step;
    detail = os.str();
    return a.history.best_val_f1 >= 0.99f;
  });

  // ── C09: cross-validation stability ─────────────────────────────────────────
  criterion(9, "5-fold cross-validation F1 stddev is at most 0.02", [&](std::string& detail) {
    TrainConfig cfg;
    cfg.seed = 7;
    const CrossValidationReport r = run_cross_validation(synth, 5, cfg);
    std::ostringstream os;
    os << "F1 " << r.f1.mean << " +/- " << r.f1.stddev;
    detail = os.str();
    return r.folds.size() == 5 && r.f1.stddev <= 0.02;
  });

  // ── C10: frontend physics ───────────────────────────────────────────────────
  criterion(10, "tones land in their mel filters and silence hits the floor",
            [](std::string& detail) {
    const MelFilterbank& bank = default_mel_filterbank();
    const float probes[10] = {150.0f, 300.0f, 440.0f, 700.0f,  1000.0f,
                              1600.0f, 2500.0f, 3800.0f, 5200.0f, 7000.0f};
    for (float hz : probes) {
      const AudioBuffer tone = vsg_test::make_tone(hz, 3.0, 16000, 0.6f);
      const LogMelSpectrogram mel = log_mel_spectrogram(pad_or_trim(tone), bank);
      if (mel.n_mels() != 80 || mel.n_frames() != 3000) {
        detail = "wrong spectrogram geometry";
        return false;
      }
      int want = 0;
      float best_d = 1e30f;
      for (int i = 0; i < static_cast<int>(bank.center_freqs.size()); ++i) {
        const float d = std::fabs(bank.center_freqs[i] - hz);
        if (d < best_d) { best_d = d; want = i; }
      }
      int got = 0;
      float best_v = -1e30f;
      for (int i = 0; i < mel.n_mels(); ++i) {
        float acc = 0.0f;
        for (int t = 50; t < 150; ++t) acc += mel.values(i, t);
        if (acc > best_v) { best_v = acc; got = i; }
      }
      if (std::abs(got - want) > 1) {
        std::ostringstream os;
        os << hz << " Hz landed in row " << got << ", filter center row is " << want;
        detail = os.str();
        return false;
      }
    }
    AudioBuffer silence;
    silence.sample_rate = kSampleRate;
    silence.samples.assign(kChunkSamples, 0.0f);
    const LogMelSpectrogram quiet = log_mel_spectrogram(silence, default_mel_filterbank());
    if (std::fabs(quiet.values.maxCoeff() + 1.5f) > 1e-4f ||
        std::fabs(quiet.values.minCoeff() + 1.5f) > 1e-4f) {
      detail = "silence floor is not uniform at -1.5";
      return false;
    }
    return true;
  });

  // ── shared gateway fixtures ─────────────────────────────────────────────────
  const std::string dir = vsg_test::temp_dir("acceptance");
  const std::string head_path = dir + "/zero.vshp";
  save_head(HeadParams::zeros(kEmbedDim, kHiddenDim, kNClasses), head_path);
  const auto wav_bytes = encode_wav_pcm16(vsg_test::make_tone(440.0, 1.0, 16000));
  const std::string wav_path = dir + "/tone.wav";
  write_file_bytes(wav_path, wav_bytes);

  EngineConfig engine_cfg;
  engine_cfg.backend.kind = BackendKind::stub;
  engine_cfg.head_path = head_path;
  engine_cfg.threshold = 0.35;

  // ── C11: latency measurements are ordered and stable ───────────────────────
  criterion(11, "classification p50 sits under the full pipeline p50, repeatably",
            [&](std::string& detail) {
    const Engine engine(engine_cfg);
    double p50s[3] = {0, 0, 0};
    for (int run = 0; run < 3; ++run) {
      const BenchReport r = bench(engine, {wav_path}, 20);
      if (!(r.classification.p50_ms > 0.0) ||
          !(r.classification.p50_ms <= r.full_pipeline.p50_ms)) {
        detail = "ordering violated";
        return false;
      }
      p50s[run] = r.classification.p50_ms;
    }
    const double lo = std::min({p50s[0], p50s[1], p50s[2]});
    const double hi = std::max({p50s[0], p50s[1], p50s[2]});
    std::ostringstream os;
    os << "classification p50 between " << lo << " and " << hi << " ms";
    detail = os.str();
    return (hi - lo) / lo < 0.20;
  });

  // ── C12: every service decision is audited ──────────────────────────────────
  criterion(12, "100 service calls produce 100 audited decisions with sane fields",
            [&](std::string& detail) {
    EngineConfig cfg = engine_cfg;
    cfg.audit_log_path = dir + "/service_audit.jsonl";
    const Engine engine(cfg);
    Service service(engine);
    const int port = service.start(0);
    if (port <= 0) {
      detail = "service failed to bind";
      return false;
    }
    httplib::Client client("127.0.0.1", port);
    client.set_read_timeout(120, 0);
    const std::string body(wav_bytes.begin(), wav_bytes.end());
    int ok = 0;
    for (int i = 0; i < 100; ++i) {
      const auto res = client.Post("/v1/classify", body, "audio/wav");
      if (res && res->status == 200) {
        const auto j = nlohmann::json::parse(res->body);
        const double p = j.at("p_malicious").get<double>();
        if (p >= 0.0 && p <= 1.0) ++ok;
      }
    }
    service.stop();
    if (ok != 100) {
      detail = "only " + std::to_string(ok) + " calls succeeded with a valid probability";
      return false;
    }
    const auto lines = read_lines(cfg.audit_log_path);
    int decisions = 0;
    for (const auto& line : lines) {
      const auto j = nlohmann::json::parse(line);
      if (j.at("event") != "decision") continue;
      ++decisions;
      const double p = j.at("p_malicious").get<double>();
      const double tau = j.at("threshold").get<double>();
      if (!(p >= 0.0 && p <= 1.0) || std::fabs(tau - 0.35) > 1e-6) {
        detail = "audit record carries a bad probability or threshold";
        return false;
      }
    }
    if (decisions != 100 || lines.size() != 100) {
      detail = "expected exactly 100 decision lines, found " + std::to_string(decisions) + " of " +
               std::to_string(lines.size());
      return false;
    }
    return true;
  });

  // ── C13: the deployed head is exactly the published size ───────────────────
  criterion(13, "production head holds 131842 parameters through a file roundtrip",
            [&](std::string& detail) {
    const HeadParams loaded = load_head(head_path);
    if (loaded.parameter_count() != 131842u) {
      detail = "loaded head has " + std::to_string(loaded.parameter_count()) + " parameters";
      return false;
    }
    const Engine engine(engine_cfg);
    if (engine.head_parameter_count() != kHeadParameterCount) {
      detail = "engine reports " + std::to_string(engine.head_parameter_count());
      return false;
    }
    return true;
  });

  if (g_failures > 0) {
    std::fprintf(stderr, "%d of 13 criteria failed\n", g_failures);
    return 1;
  }
  std::fprintf(stderr, "all 13 criteria passed\n");
  return 0;
}
