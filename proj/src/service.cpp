// SPDX-License-Identifier: Apache-2.0
#include "star/service.hpp"

#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "star/error.hpp"
#include "star/metrics.hpp"
#include "star/trial_log.hpp"

namespace star {
namespace {

using nlohmann::json;

struct HttpError {
  int status;
  std::string code;
  std::string message;
};

ServiceResponse json_response(int status, const json& body) { return {status, "application/json", body.dump()}; }

ServiceResponse error_response(const HttpError& e) {
  return json_response(e.status, {{"error", {{"code", e.code}, {"message", e.message}}}});
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream in(path.substr(0, path.find('?')));
  while (std::getline(in, part, '/')) {
    if (!part.empty()) parts.push_back(part);
  }
  return parts;
}

double time_field(const json& request, const char* name) {
  if (!request.contains(name) || !request.at(name).is_number())
    throw HttpError{400, "bad_request", std::string("missing numeric field '") + name + "'"};
  return request.at(name).get<double>();
}

json session_state(const Session& s) {
  return {{"phase", to_string(s.phase())},
          {"presented", s.presented()},
          {"committed", s.committed()},
          {"suggestions", suggestions_to_json(s.suggestions())}};
}

}  // namespace

json suggestions_to_json(const SuggestionPair& pair) {
  json out = json::array();
  for (const auto* slot : {&pair.first, &pair.second}) {
    if (*slot) out.push_back({{"word", (*slot)->word}, {"score", (*slot)->score}});
  }
  return out;
}

json metrics_to_json(const TrialLog& log) {
  json m = {{"presented", log.presented},
            {"transcribed", log.transcribed},
            {"trial", log.trial},
            {"uer_pct", uncorrected_error_rate(log)},
            {"cer_pct", corrected_error_rate(log)},
            {"backspace_count", backspace_count(log)},
            {"wpm", nullptr},
            {"mean_iki_ms", nullptr},
            {"mean_kpd_ms", nullptr}};
  // Fewer than two key inputs leaves speed and intervals undefined.
  try {
    m["wpm"] = wpm(log);
    m["mean_iki_ms"] = mean_iki(log);
  } catch (const Error&) {
  }
  try {
    m["mean_kpd_ms"] = mean_kpd(log);
  } catch (const Error&) {
  }
  return m;
}

SessionService::SessionService(const Lexicon& lexicon, PhraseSet phrases, ServiceOptions options)
    : lexicon_(&lexicon), phrases_(std::move(phrases)), options_(std::move(options)) {
  layout_for(options_.default_layout);
}

SessionService::~SessionService() = default;

const KeyboardLayout& SessionService::layout_for(const std::string& name) {
  std::lock_guard lock(mutex_);
  auto it = layouts_.find(name);
  if (it == layouts_.end()) {
    // Clients may name presets only; a layout file is the operator's choice.
    auto layout = name == options_.default_layout ? resolve_layout(name) : build_layout(name);
    it = layouts_.emplace(name, std::make_unique<KeyboardLayout>(std::move(layout))).first;
  }
  return *it->second;
}

std::shared_ptr<SessionService::Entry> SessionService::find(const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw HttpError{404, "unknown_session", "no session '" + id + "'"};
  return it->second;
}

std::size_t SessionService::open_sessions() const {
  std::lock_guard lock(mutex_);
  return sessions_.size();
}

json SessionService::open_session(const json& request) {
  const std::string layout_name = request.value("layout", options_.default_layout);
  const KeyboardLayout* layout = nullptr;
  try {
    layout = &layout_for(layout_name);
  } catch (const Error& e) {
    throw HttpError{400, "bad_request", e.what()};
  }
  auto entry = std::make_shared<Entry>();
  entry->session = std::make_unique<Session>(*layout, *lexicon_, options_.decoder);
  entry->schedule = std::make_unique<PhraseSchedule>(phrases_.phrases, options_.phrase_seed, true);
  {
    std::lock_guard lock(mutex_);
    entry->id = "s" + std::to_string(next_id_++);
    sessions_[entry->id] = entry;
  }
  json noise = {{"jitter_mm", options_.jitter_mm}, {"latency_ms", options_.latency_ms}};
  if (request.contains("noise")) noise.merge_patch(request.at("noise"));
  return {{"session_id", entry->id}, {"layout", layout_to_json(*layout)}, {"noise", noise}};
}

json SessionService::dispatch(Entry& entry, const std::string& method, const std::string& action,
                              const json& request, ServiceResponse& raw) {
  Session& s = *entry.session;
  if (method == "POST" && action == "show_phrase") {
    TrialMeta meta;
    meta.condition = "interactive";
    meta.group = "interactive";
    meta.trial = ++entry.trial;
    if (request.contains("phrase")) {
      s.show_phrase(request.at("phrase").get<std::string>(), meta);
    } else {
      s.next_trial(*entry.schedule, meta);
    }
    return session_state(s);
  }
  if (method == "POST" && action == "events") {
    const double t_down = time_field(request, "t_down");
    const double t_up = request.contains("t_up") ? time_field(request, "t_up") : t_down;
    std::string registered;
    if (request.contains("label")) {
      std::optional<TouchPoint> point;
      if (request.contains("x")) point = TouchPoint{time_field(request, "x"), time_field(request, "y")};
      registered = request.at("label").get<std::string>();
      if (!s.layout().find(registered)) throw HttpError{400, "bad_request", "unknown key '" + registered + "'"};
      s.press(registered, t_down, t_up, point);
    } else {
      const TouchPoint p{time_field(request, "x"), time_field(request, "y")};
      registered = s.touch(p, t_down, t_up).label;
    }
    json out = session_state(s);
    out["registered"] = registered;
    if (s.phase() == Phase::submitted) out["metrics"] = metrics_to_json(s.completed().back());
    return out;
  }
  if (method == "GET" && action == "suggestions") {
    return {{"suggestions", suggestions_to_json(s.suggestions())}, {"tap_count", s.tap_context().size()}};
  }
  if (method == "POST" && action == "submit") {
    const double t_down = time_field(request, "t_down");
    s.submit(t_down, request.contains("t_up") ? time_field(request, "t_up") : t_down);
    return {{"phase", to_string(s.phase())}, {"metrics", metrics_to_json(s.completed().back())}};
  }
  if (method == "GET" && action == "metrics") {
    json trials = json::array();
    for (const TrialLog& log : s.completed()) trials.push_back(metrics_to_json(log));
    return {{"trials", trials}};
  }
  if (method == "GET" && action == "log") {
    if (s.completed().empty()) throw HttpError{409, "no_trials", "no submitted trials to export"};
    std::ostringstream out;
    for (const TrialLog& log : s.completed()) write_trial(out, log);
    raw = {200, "application/x-ndjson", out.str()};
    return nullptr;
  }
  throw HttpError{404, "not_found", method + " " + action + " is not a session operation"};
}

void SessionService::flush(Entry& entry) {
  if (options_.log_dir.empty() || entry.session->completed().empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(options_.log_dir, ec);
  std::ofstream out(options_.log_dir / ("session_" + entry.id + ".jsonl"), std::ios::binary);
  for (const TrialLog& log : entry.session->completed()) write_trial(out, log);
}

void SessionService::flush_all() {
  std::vector<std::shared_ptr<Entry>> entries;
  {
    std::lock_guard lock(mutex_);
    for (auto& [id, e] : sessions_) entries.push_back(e);
  }
  for (auto& e : entries) {
    std::lock_guard lock(e->mutex);
    flush(*e);
  }
}

ServiceResponse SessionService::handle(const std::string& method, const std::string& path, const std::string& body) {
  try {
    json request = json::object();
    if (!body.empty()) {
      request = json::parse(body);
      if (!request.is_object()) throw HttpError{400, "bad_request", "request body must be a JSON object"};
    }
    const auto parts = split_path(path);
    if (parts.size() < 2 || parts[0] != "api") throw HttpError{404, "not_found", "unknown path " + path};

    if (parts[1] == "health" && method == "GET") return json_response(200, {{"status", "ok"}});
    if (parts[1] == "layouts" && parts.size() == 3 && method == "GET") {
      try {
        return json_response(200, layout_to_json(layout_for(parts[2])));
      } catch (const Error& e) {
        throw HttpError{404, "not_found", e.what()};
      }
    }
    if (parts[1] != "sessions") throw HttpError{404, "not_found", "unknown path " + path};
    if (parts.size() == 2) {
      if (method != "POST") throw HttpError{405, "method_not_allowed", "use POST to open a session"};
      return json_response(201, open_session(request));
    }

    auto entry = find(parts[2]);
    std::lock_guard lock(entry->mutex);
    if (parts.size() == 3) {
      if (method != "DELETE") throw HttpError{405, "method_not_allowed", "use DELETE to close a session"};
      flush(*entry);
      std::lock_guard map_lock(mutex_);
      sessions_.erase(entry->id);
      return json_response(200, {{"closed", entry->id}, {"trials", entry->session->completed().size()}});
    }
    if (parts.size() != 4) throw HttpError{404, "not_found", "unknown path " + path};
    ServiceResponse raw;
    json out = dispatch(*entry, method, parts[3], request, raw);
    if (out.is_null()) return raw;
    out["session_id"] = entry->id;
    return json_response(200, out);
  } catch (const HttpError& e) {
    return error_response(e);
  } catch (const json::exception& e) {
    return error_response({400, "bad_request", e.what()});
  } catch (const Error& e) {
    // Phase violations, out-of-order events and similar.
    return error_response({409, "illegal_action", e.what()});
  }
}

struct HttpFrontend::Impl {
  Impl(SessionService& s, std::filesystem::path dir) : service(s), static_dir(std::move(dir)) {}

  SessionService& service;
  std::filesystem::path static_dir;
  httplib::Server server;
  std::thread thread;
};

HttpFrontend::HttpFrontend(SessionService& service, std::filesystem::path static_dir)
    : impl_(std::make_unique<Impl>(service, std::move(static_dir))) {
  auto route = [this](const httplib::Request& req, httplib::Response& res) {
    const ServiceResponse r = impl_->service.handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  auto& srv = impl_->server;
  srv.Get(R"(/api/.*)", route);
  srv.Post(R"(/api/.*)", route);
  srv.Delete(R"(/api/.*)", route);
  if (!impl_->static_dir.empty()) srv.set_mount_point("/", impl_->static_dir.string());
}

HttpFrontend::~HttpFrontend() { stop(); }

int HttpFrontend::start(const std::string& host, int port) {
  auto& srv = impl_->server;
  int bound = port;
  if (port == 0) {
    bound = srv.bind_to_any_port(host);
  } else if (!srv.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw runtime_error("cannot bind " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([&srv] { srv.listen_after_bind(); });
  srv.wait_until_ready();
  return bound;
}

void HttpFrontend::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace star
