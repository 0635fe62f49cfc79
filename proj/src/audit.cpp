// Copyright 2026 The vsg Authors
// Licensed under the Apache License, Version 2.0

#include <fcntl.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>

#include <json.hpp>

#include "vsg/errors.hpp"
#include "vsg/gateway.hpp"

namespace vsg {

std::uint64_t fnv1a64(const std::uint8_t* data, std::size_t len) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < len; ++i) {
    hash ^= data[i];
    hash *= 0x100000001b3ull;
  }
  return hash;
}

namespace {

std::string digest_hex(std::uint64_t digest) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(digest));
  return std::string(buf);
}

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace

AuditLog::AuditLog(const std::string& path) {
  fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
  if (fd_ < 0) raise(Err::IoFailure, "cannot open audit log " + path);
}

AuditLog::~AuditLog() {
  if (fd_ >= 0) ::close(fd_);
}

AuditLog::AuditLog(AuditLog&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }

AuditLog& AuditLog::operator=(AuditLog&& other) noexcept {
  if (this != &other) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = other.fd_;
    other.fd_ = -1;
  }
  return *this;
}

void AuditLog::append_line(const std::string& line) {
  if (fd_ < 0) return;
  std::lock_guard<std::mutex> lock(mu_);
  std::string buf = line;
  buf += '\n';
  std::size_t written = 0;
  while (written < buf.size()) {
    const ssize_t n = ::write(fd_, buf.data() + written, buf.size() - written);
    if (n < 0) raise(Err::IoFailure, "audit log write failed");
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(fd_) != 0) raise(Err::IoFailure, "audit log fsync failed");
}

void AuditLog::append_decision(const AuditRecord& record) {
  if (fd_ < 0) return;
  nlohmann::json j{{"event", "decision"},
                   {"ts_ms", record.timestamp_ms},
                   {"digest", digest_hex(record.input_digest)},
                   {"p_malicious", record.p_malicious},
                   {"threshold", record.threshold},
                   {"label", label_name(record.label)},
                   {"review", record.review},
                   {"latency_classification_ms", record.latency_classification_ms},
                   {"latency_total_ms", record.latency_total_ms},
                   {"backend", record.backend}};
  append_line(j.dump());
}

void AuditLog::append_error(std::uint64_t digest, const std::string& kind,
                            const std::string& message) {
  if (fd_ < 0) return;
  nlohmann::json j{{"event", "error"},
                   {"ts_ms", now_ms()},
                   {"digest", digest_hex(digest)},
                   {"kind", kind},
                   {"message", message}};
  append_line(j.dump());
}

}  // namespace vsg
