// Copyright 2026 The vsg Authors
// Licensed under the Apache License, Version 2.0

#include <cstdint>
#include <iostream>
#include <thread>
#include <vector>

#include "vsg/errors.hpp"
#include "vsg/gateway.hpp"

// httplib drags in <resolv.h>, whose _res macro mangles Eigen internals;
// keep it after any header that includes Eigen.
#include <httplib.h>
#include <json.hpp>

namespace vsg {
namespace {

int status_for(const Error& e) {
  if (e.kind() == Err::UnsupportedEncoding) return 422;
  switch (e.family()) {
    case ErrorFamily::data:
    case ErrorFamily::usage:
      return 400;
    default:
      // Backend and IO details stay out of responses.
      return 500;
  }
}

nlohmann::json outcome_to_json(const Engine::Outcome& outcome) {
  nlohmann::json j{{"label", label_name(outcome.decision.label)},
                   {"p_malicious", outcome.decision.p_malicious},
                   {"threshold", outcome.decision.threshold},
                   {"review", outcome.decision.review}};
  if (outcome.transcript.has_value()) j["transcript"] = *outcome.transcript;
  return j;
}

// Generous bound for one clip; everything past 30 s is trimmed anyway.
constexpr std::size_t kMaxBodyBytes = std::size_t{64} << 20;

}  // namespace

struct Service::Impl {
  explicit Impl(const Engine& engine) : engine(engine) {}

  const Engine& engine;
  httplib::Server server;
  std::thread thread;
  int port = 0;

  void route() {
    server.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
      nlohmann::json j{{"status", "ok"},
                       {"head_parameters", engine.head_parameter_count()},
                       {"backend", backend_kind_name(engine.backend().kind())},
                       {"threshold", engine.config().threshold}};
      res.set_content(j.dump(), "application/json");
    });

    // The content-reader overload: httplib otherwise buffers the body into
    // req.body and, for curl's default form-urlencoded content type, rejects
    // anything past 8 KB and parses the WAV bytes as query text.
    server.Post("/v1/classify", [this](const httplib::Request& req, httplib::Response& res,
                                       const httplib::ContentReader& reader) {
      const std::string transcribe = req.get_param_value("transcribe");
      const bool want_transcript = transcribe == "1" || transcribe == "true";
      std::vector<std::uint8_t> body;
      bool oversize = false;
      reader([&](const char* data, std::size_t n) {
        if (body.size() + n > kMaxBodyBytes) {
          oversize = true;
          return false;
        }
        body.insert(body.end(), data, data + n);
        return true;
      });
      if (oversize) {
        res.status = 413;
        res.set_content(R"({"error":"payload too large"})", "application/json");
        return;
      }
      try {
        const Engine::Outcome outcome =
            engine.classify_bytes({body.data(), body.size()}, want_transcript);
        res.status = 200;
        res.set_content(outcome_to_json(outcome).dump(), "application/json");
      } catch (const Error& e) {
        res.status = status_for(e);
        if (res.status == 500) {
          // Opaque to the caller, detailed on the server side.
          std::cerr << "classify failed: " << e.what() << "\n";
          res.set_content(R"({"error":"internal error"})", "application/json");
        } else {
          nlohmann::json j{{"error", std::string(e.what())}};
          res.set_content(j.dump(), "application/json");
        }
      } catch (const std::exception& e) {
        std::cerr << "classify failed: " << e.what() << "\n";
        res.status = 500;
        res.set_content(R"({"error":"internal error"})", "application/json");
      }
    });
  }
};

Service::Service(const Engine& engine) : impl_(std::make_unique<Impl>(engine)) { impl_->route(); }

Service::~Service() { stop(); }

int Service::start(int port) {
  if (port < 0 || port > 65535) raise(Err::OutOfRange, "invalid port");
  if (port == 0) {
    impl_->port = impl_->server.bind_to_any_port("0.0.0.0");
    if (impl_->port <= 0) raise(Err::IoFailure, "cannot bind a port");
  } else {
    if (!impl_->server.bind_to_port("0.0.0.0", port)) {
      raise(Err::IoFailure, "cannot bind port " + std::to_string(port));
    }
    impl_->port = port;
  }
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return impl_->port;
}

void Service::wait() {
  if (impl_->thread.joinable()) impl_->thread.join();
}

void Service::stop() {
  if (impl_ == nullptr) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace vsg
