// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "star/geometry.hpp"
#include "star/lexicon.hpp"
#include "star/session.hpp"

namespace star {

struct ServiceOptions {
  std::string default_layout = "enlarged";
  /// Echoed to clients; jitter and latency injection happen client-side.
  double jitter_mm = 0.0;
  double latency_ms = 0.0;
  DecoderOptions decoder;
  std::uint64_t phrase_seed = 1;
  /// Where session logs are flushed on close and shutdown; empty disables.
  std::filesystem::path log_dir;
};

struct ServiceResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

/// Transport-independent session API. Every request is (method, path, body);
/// bodies and responses are JSON except the log export, which is JSON Lines.
///
///   POST   /api/sessions                      open_session
///   POST   /api/sessions/{id}/show_phrase     show_phrase
///   POST   /api/sessions/{id}/events          post_event
///   GET    /api/sessions/{id}/suggestions     get_suggestions
///   POST   /api/sessions/{id}/submit          submit
///   GET    /api/sessions/{id}/metrics         fetch_metrics
///   GET    /api/sessions/{id}/log             export_log
///   DELETE /api/sessions/{id}                 close (flushes the log)
///   GET    /api/layouts/{name}                layout document
///
/// Errors come back as {"error": {"code", "message"}} with a 4xx status.
class SessionService {
 public:
  SessionService(const Lexicon& lexicon, PhraseSet phrases, ServiceOptions options = {});
  ~SessionService();

  ServiceResponse handle(const std::string& method, const std::string& path, const std::string& body);

  /// Writes every session's submitted trials to the log directory.
  void flush_all();
  std::size_t open_sessions() const;

 private:
  struct Entry {
    std::mutex mutex;
    std::string id;
    std::unique_ptr<Session> session;
    std::unique_ptr<PhraseSchedule> schedule;
    int trial = 0;
  };

  const KeyboardLayout& layout_for(const std::string& name);
  std::shared_ptr<Entry> find(const std::string& id) const;
  nlohmann::json open_session(const nlohmann::json& request);
  nlohmann::json dispatch(Entry& entry, const std::string& method, const std::string& action,
                          const nlohmann::json& request, ServiceResponse& raw);
  void flush(Entry& entry);

  const Lexicon* lexicon_;
  PhraseSet phrases_;
  ServiceOptions options_;

  mutable std::mutex mutex_;
  std::map<std::string, std::unique_ptr<KeyboardLayout>> layouts_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::uint64_t next_id_ = 1;
};

nlohmann::json suggestions_to_json(const SuggestionPair& pair);
nlohmann::json metrics_to_json(const TrialLog& log);

/// HTTP transport for a SessionService, running on a background thread.
class HttpFrontend {
 public:
  explicit HttpFrontend(SessionService& service, std::filesystem::path static_dir = {});
  ~HttpFrontend();

  /// Binds (port 0 picks a free port) and starts serving. Returns the bound
  /// port; throws runtime_error if the address cannot be bound.
  int start(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace star
