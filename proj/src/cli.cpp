// Copyright 2026 The vsg Authors
// Licensed under the Apache License, Version 2.0

#include "vsg/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "vsg/audio_io.hpp"
#include "vsg/errors.hpp"
#include "vsg/eval_lab.hpp"
#include "vsg/gateway.hpp"
#include "vsg/head_trainer.hpp"

namespace vsg {
namespace {

// ─── option sources ──────────────────────────────────────────────────────────
// Precedence, highest first: command-line flag, VSG_* environment variable,
// config file entry, built-in default.

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::optional<std::string> env_str(const char* name) {
  const char* v = std::getenv(name);
  if (v == nullptr) return std::nullopt;
  return std::string(v);
}

double parse_double(const std::string& s, const char* what) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (...) {
    pos = 0;
  }
  if (pos != s.size() || s.empty()) {
    raise(Err::OutOfRange, std::string("cannot parse ") + what + ": '" + s + "'");
  }
  return v;
}

std::uint64_t parse_u64(const std::string& s, const char* what) {
  std::size_t pos = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(s, &pos);
  } catch (...) {
    pos = 0;
  }
  if (pos != s.size() || s.empty()) {
    raise(Err::OutOfRange, std::string("cannot parse ") + what + ": '" + s + "'");
  }
  return v;
}

int parse_port(const std::string& s) {
  const auto v = parse_u64(s, "port");
  if (v > 65535) raise(Err::OutOfRange, "port out of range: " + s);
  return static_cast<int>(v);
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  static const std::set<std::string> known = {"backend",   "model", "head",
                                              "threshold", "seed",  "audit_log",
                                              "port",      "review_low", "review_high"};
  const auto bytes = read_file_bytes(path);
  std::istringstream in(std::string(bytes.begin(), bytes.end()));
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line.erase(comment);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      raise(Err::OutOfRange,
            path + ":" + std::to_string(lineno) + " is not a 'key = value' line");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (known.count(key) == 0) {
      raise(Err::OutOfRange, path + ":" + std::to_string(lineno) + " unknown key '" + key + "'");
    }
    kv[key] = value;
  }
  return kv;
}

struct CommonOpts {
  std::string config;
  std::string backend;
  std::string model;
  std::string head;
  std::string audit_log;
  double threshold = 0.0;
  std::uint64_t seed = 0;
  int port = 0;
  double review_low = 0.0;
  double review_high = 0.0;

  CLI::Option* o_config = nullptr;
  CLI::Option* o_backend = nullptr;
  CLI::Option* o_model = nullptr;
  CLI::Option* o_head = nullptr;
  CLI::Option* o_audit = nullptr;
  CLI::Option* o_threshold = nullptr;
  CLI::Option* o_seed = nullptr;
  CLI::Option* o_port = nullptr;
  CLI::Option* o_review_low = nullptr;
  CLI::Option* o_review_high = nullptr;

  void attach(CLI::App* cmd) {
    o_config = cmd->add_option("--config", config, "key = value configuration file");
    o_backend = cmd->add_option("--backend", backend, "encoder backend: stub or external");
    o_model = cmd->add_option("--model", model, "plugin path for the external backend");
    o_head = cmd->add_option("--head", head, "head parameter file (VSHP1)");
    o_threshold = cmd->add_option("--threshold", threshold, "decision threshold in (0, 1)");
    o_seed = cmd->add_option("--seed", seed, "seed for every deterministic stream");
    o_audit = cmd->add_option("--audit-log", audit_log, "append-only JSONL audit file");
    o_port = cmd->add_option("--port", port, "service port");
    o_review_low = cmd->add_option("--review-low", review_low, "lower edge of the review band");
    o_review_high = cmd->add_option("--review-high", review_high, "upper edge of the review band");
  }
};

class Sources {
 public:
  Sources(const CommonOpts& opts) : opts_(opts) {
    std::string config_path;
    if (opts.o_config != nullptr && opts.o_config->count() > 0) {
      config_path = opts.config;
    } else if (auto e = env_str("VSG_CONFIG")) {
      config_path = *e;
    }
    if (!config_path.empty()) file_ = parse_config_file(config_path);
  }

  std::optional<std::string> fallback(const char* env, const char* key) const {
    if (auto e = env_str(env)) return e;
    const auto it = file_.find(key);
    if (it != file_.end()) return it->second;
    return std::nullopt;
  }

  std::string head() const {
    if (opts_.o_head->count() > 0) return opts_.head;
    return fallback("VSG_HEAD", "head").value_or("");
  }

  double threshold() const {
    if (opts_.o_threshold->count() > 0) return opts_.threshold;
    if (auto v = fallback("VSG_THRESHOLD", "threshold")) return parse_double(*v, "threshold");
    return kDefaultThreshold;
  }

  std::uint64_t seed() const {
    if (opts_.o_seed->count() > 0) return opts_.seed;
    if (auto v = fallback("VSG_SEED", "seed")) return parse_u64(*v, "seed");
    return 0;
  }

  int port() const {
    if (opts_.o_port->count() > 0) return opts_.port;
    if (auto v = fallback("VSG_PORT", "port")) return parse_port(*v);
    return 8080;
  }

  std::string audit_log() const {
    if (opts_.o_audit->count() > 0) return opts_.audit_log;
    return fallback("VSG_AUDIT_LOG", "audit_log").value_or("");
  }

  double review_low() const {
    if (opts_.o_review_low->count() > 0) return opts_.review_low;
    if (auto v = fallback("VSG_REVIEW_LOW", "review_low")) return parse_double(*v, "review_low");
    return kReviewLow;
  }

  double review_high() const {
    if (opts_.o_review_high->count() > 0) return opts_.review_high;
    if (auto v = fallback("VSG_REVIEW_HIGH", "review_high")) {
      return parse_double(*v, "review_high");
    }
    return kReviewHigh;
  }

  BackendDescriptor backend() const {
    std::string name = "stub";
    if (opts_.o_backend->count() > 0) {
      name = opts_.backend;
    } else if (auto v = fallback("VSG_BACKEND", "backend")) {
      name = *v;
    }
    std::string model;
    if (opts_.o_model->count() > 0) {
      model = opts_.model;
    } else if (auto v = fallback("VSG_MODEL", "model")) {
      model = *v;
    }

    BackendDescriptor desc;
    if (name == "stub") {
      desc.kind = BackendKind::stub;
      desc.seed = seed();
    } else if (name == "external" || name == "external_model") {
      desc.kind = BackendKind::external_model;
      desc.model_path = model;
      if (model.empty()) raise(Err::OutOfRange, "the external backend needs --model");
    } else {
      raise(Err::OutOfRange, "unknown backend '" + name + "'");
    }
    return desc;
  }

  EngineConfig engine_config() const {
    EngineConfig cfg;
    cfg.backend = backend();
    cfg.head_path = head();
    if (cfg.head_path.empty()) {
      raise(Err::OutOfRange, "no head parameters configured (--head, VSG_HEAD or config)");
    }
    cfg.threshold = threshold();
    cfg.review_low = review_low();
    cfg.review_high = review_high();
    cfg.audit_log_path = audit_log();
    cfg.service_port = port();
    return cfg;
  }

 private:
  const CommonOpts& opts_;
  std::map<std::string, std::string> file_;
};

// ─── subcommand handlers ─────────────────────────────────────────────────────

void print_outcome(const Engine::Outcome& outcome, bool as_json) {
  if (as_json) {
    nlohmann::json j{{"label", label_name(outcome.decision.label)},
                     {"p_malicious", outcome.decision.p_malicious},
                     {"threshold", outcome.decision.threshold},
                     {"review", outcome.decision.review}};
    if (outcome.transcript.has_value()) j["transcript"] = *outcome.transcript;
    std::cout << j.dump() << "\n";
    return;
  }
  std::printf("label=%s p_malicious=%.6f threshold=%.6f review=%s\n",
              label_name(outcome.decision.label),
              static_cast<double>(outcome.decision.p_malicious),
              static_cast<double>(outcome.decision.threshold),
              outcome.decision.review ? "yes" : "no");
  if (outcome.transcript.has_value()) {
    std::printf("transcript=%s\n", outcome.transcript->c_str());
  }
}

struct ClassifyCmd {
  CommonOpts common;
  std::string wav_path;
  bool transcribe = false;
  bool as_json = false;

  void run() const {
    const Sources sources(common);
    const Engine engine(sources.engine_config());
    print_outcome(engine.classify_file(wav_path, transcribe), as_json);
  }
};

struct ServeCmd {
  CommonOpts common;

  void run() const {
    const Sources sources(common);
    const EngineConfig cfg = sources.engine_config();
    const Engine engine(cfg);
    Service service(engine);
    const int port = service.start(cfg.service_port);
    std::printf("listening on 0.0.0.0:%d\n", port);
    std::fflush(stdout);
    service.wait();
  }
};

struct TrainHeadCmd {
  CommonOpts common;
  std::string train_path;
  std::string val_path;
  std::string out_path;
  std::string history_path;
  TrainConfig train_cfg;

  void run() {
    const Sources sources(common);
    train_cfg.seed = sources.seed();
    const EmbeddingDataset train = load_dataset(train_path);
    const EmbeddingDataset val = load_dataset(val_path);
    const TrainResult result = train_head(train, val, train_cfg);
    save_head(result.params, out_path);
    if (!history_path.empty()) save_history_jsonl(result.history, history_path);
    std::printf("class weights: safe %.6f, malicious %.6f\n", result.history.weight_safe,
                result.history.weight_malicious);
    std::printf("best checkpoint: step %d, val F1 %.4f\n", result.history.best_step,
                static_cast<double>(result.history.best_val_f1));
    std::printf("saved %s\n", out_path.c_str());
  }
};

struct EvalCmd {
  CommonOpts common;
  std::string data_path;
  std::string json_out;

  void run() const {
    const Sources sources(common);
    const std::string head_path = sources.head();
    if (head_path.empty()) raise(Err::OutOfRange, "eval needs --head");
    const EmbeddingDataset ds = load_dataset(data_path);
    const HeadParams head = load_head(head_path);
    const Vecf scores = malicious_scores(ds, head);
    const double tau = sources.threshold();

    const ConfusionMatrix cm = confusion_matrix(scores, ds.labels, tau);
    MetricsReport m = metrics_from_cm(cm);
    m.threshold = tau;
    if (ds.count(0) > 0 && ds.count(1) > 0) {
      m.roc_auc = roc_auc(scores, ds.labels);
      m.has_roc_auc = true;
    }
    std::printf("tn %lld  fp %lld  fn %lld  tp %lld\n", static_cast<long long>(cm.tn),
                static_cast<long long>(cm.fp), static_cast<long long>(cm.fn),
                static_cast<long long>(cm.tp));
    std::cout << format_metrics_report(m);
    if (!json_out.empty()) {
      const std::string line = metrics_to_json(m) + "\n";
      write_file_bytes(json_out, reinterpret_cast<const std::uint8_t*>(line.data()), line.size());
    }
  }
};

struct SweepCmd {
  CommonOpts common;
  std::string data_path;
  std::string json_out;

  void run() const {
    const Sources sources(common);
    const std::string head_path = sources.head();
    if (head_path.empty()) raise(Err::OutOfRange, "sweep needs --head");
    const EmbeddingDataset ds = load_dataset(data_path);
    const HeadParams head = load_head(head_path);
    const Vecf scores = malicious_scores(ds, head);
    const std::vector<double> grid = default_threshold_grid();
    const std::vector<SweepRow> rows = threshold_sweep(scores, ds.labels, grid);
    std::cout << format_sweep_table(rows);
    if (ds.count(1) > 0) {
      std::printf("selected tau %.2f (highest F1, lowest tau on ties)\n",
                  select_threshold(scores, ds.labels, grid));
    }
    if (!json_out.empty()) {
      const std::string text = sweep_to_jsonl(rows);
      write_file_bytes(json_out, reinterpret_cast<const std::uint8_t*>(text.data()), text.size());
    }
  }
};

struct CvCmd {
  CommonOpts common;
  std::string data_path;
  int k = 5;
  TrainConfig train_cfg;

  void run() {
    const Sources sources(common);
    train_cfg.seed = sources.seed();
    const EmbeddingDataset ds = load_dataset(data_path);
    const CrossValidationReport report = run_cross_validation(ds, k, train_cfg);
    std::cout << format_cv_report(report);
  }
};

struct BenchCmd {
  CommonOpts common;
  std::vector<std::string> wav_paths;
  int repetitions = 20;

  void run() const {
    const Sources sources(common);
    const Engine engine(sources.engine_config());
    std::cout << format_bench_report(bench(engine, wav_paths, repetitions));
  }
};

void attach_train_flags(CLI::App* cmd, TrainConfig& cfg) {
  cmd->add_option("--max-steps", cfg.max_steps, "optimizer steps");
  cmd->add_option("--warmup", cfg.warmup_steps, "linear warmup steps");
  cmd->add_option("--lr", cfg.lr_max, "peak learning rate");
  cmd->add_option("--micro-batch", cfg.micro_batch, "examples per micro-batch");
  cmd->add_option("--grad-accum", cfg.grad_accum, "micro-batches per optimizer step");
  cmd->add_option("--weight-decay", cfg.weight_decay, "decoupled weight decay");
  cmd->add_option("--dropout", cfg.dropout_p, "hidden dropout probability");
  cmd->add_option("--eval-every", cfg.eval_every, "steps between validation evals");
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"voice safety gateway"};
  app.require_subcommand(1);

  ClassifyCmd classify_cmd;
  auto* classify = app.add_subcommand("classify", "classify one WAV clip");
  classify_cmd.common.attach(classify);
  classify->add_option("wav", classify_cmd.wav_path, "input WAV file")->required();
  classify->add_flag("--transcribe", classify_cmd.transcribe,
                     "also transcribe when the backend supports it");
  classify->add_flag("--json", classify_cmd.as_json, "print a JSON object");

  ServeCmd serve_cmd;
  auto* serve = app.add_subcommand("serve", "run the HTTP classification service");
  serve_cmd.common.attach(serve);

  TrainHeadCmd train_cmd;
  auto* train = app.add_subcommand("train-head", "train the classification head");
  train_cmd.common.attach(train);
  train->add_option("--train", train_cmd.train_path, "training dataset (VSED1)")->required();
  train->add_option("--val", train_cmd.val_path, "validation dataset (VSED1)")->required();
  train->add_option("--out", train_cmd.out_path, "output head file (VSHP1)")->required();
  train->add_option("--history", train_cmd.history_path, "training history JSONL");
  attach_train_flags(train, train_cmd.train_cfg);

  EvalCmd eval_cmd;
  auto* eval = app.add_subcommand("eval", "evaluate a head on a labeled dataset");
  eval_cmd.common.attach(eval);
  eval->add_option("--data", eval_cmd.data_path, "labeled dataset (VSED1)")->required();
  eval->add_option("--json-out", eval_cmd.json_out, "write metrics as one JSON line");

  SweepCmd sweep_cmd;
  auto* sweep = app.add_subcommand("sweep", "sweep the decision threshold grid");
  sweep_cmd.common.attach(sweep);
  sweep->add_option("--data", sweep_cmd.data_path, "labeled dataset (VSED1)")->required();
  sweep->add_option("--json-out", sweep_cmd.json_out, "write sweep rows as JSONL");

  CvCmd cv_cmd;
  auto* cv = app.add_subcommand("cv", "stratified k-fold cross-validation");
  cv_cmd.common.attach(cv);
  cv->add_option("--data", cv_cmd.data_path, "labeled dataset (VSED1)")->required();
  cv->add_option("--k", cv_cmd.k, "fold count");
  attach_train_flags(cv, cv_cmd.train_cfg);

  BenchCmd bench_cmd;
  auto* bench_app = app.add_subcommand("bench", "measure classification latency");
  bench_cmd.common.attach(bench_app);
  bench_app->add_option("--reps", bench_cmd.repetitions, "timed repetitions (min 10)");
  bench_app->add_option("wavs", bench_cmd.wav_paths, "clips to replay")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ErrorFamily::usage);
  }

  try {
    if (classify->parsed()) {
      classify_cmd.run();
    } else if (serve->parsed()) {
      serve_cmd.run();
    } else if (train->parsed()) {
      train_cmd.run();
    } else if (eval->parsed()) {
      eval_cmd.run();
    } else if (sweep->parsed()) {
      sweep_cmd.run();
    } else if (cv->parsed()) {
      cv_cmd.run();
    } else if (bench_app->parsed()) {
      bench_cmd.run();
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace vsg
