#include "forumdiv/cli/server.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "forumdiv/error.hpp"

namespace forumdiv::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string error_body(const std::string& message) { return json{{"error", message}}.dump(); }

}  // namespace

ExperimentServer::ExperimentServer(std::vector<Trial> trials, fs::path response_log, std::uint64_t seed,
                                   std::optional<fs::path> static_dir)
    : trials_(std::move(trials)), log_path_(std::move(response_log)), seed_(seed),
      http_(std::make_unique<httplib::Server>()) {
  for (std::size_t i = 0; i < trials_.size(); ++i) trial_index_.emplace(trials_[i].trial_id, i);

  if (fs::exists(log_path_)) {
    for (const auto& r : ingest_responses(log_path_, trial_ids(trials_))) {
      answered_[r.subject_id].insert(r.trial_id);
    }
  }

  // No SO_REUSEPORT: a second server on a busy port must fail to bind.
  http_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  });

  auto send = [](httplib::Response& res, const Reply& reply) {
    res.status = reply.status;
    res.set_content(reply.body, "application/json");
  };
  http_->Get("/api/session", [this, send](const httplib::Request& req, httplib::Response& res) {
    if (!req.has_param("subject") || req.get_param_value("subject").empty()) {
      return send(res, {400, error_body("missing subject parameter")});
    }
    send(res, session(req.get_param_value("subject")));
  });
  http_->Get("/api/trial/next", [this, send](const httplib::Request& req, httplib::Response& res) {
    if (!req.has_param("subject") || req.get_param_value("subject").empty()) {
      return send(res, {400, error_body("missing subject parameter")});
    }
    send(res, next_trial(req.get_param_value("subject")));
  });
  http_->Post("/api/response", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, post_response(req.body));
  });
  if (static_dir) http_->set_mount_point("/", static_dir->string());
}

ExperimentServer::~ExperimentServer() { stop(); }

bool ExperimentServer::bind(const std::string& host, int port) {
  if (port == 0) {
    port_ = http_->bind_to_any_port(host);
    return port_ > 0;
  }
  if (!http_->bind_to_port(host, port)) return false;
  port_ = port;
  return true;
}

bool ExperimentServer::listen() { return http_->listen_after_bind(); }

void ExperimentServer::wait_until_ready() const { http_->wait_until_ready(); }

void ExperimentServer::stop() {
  if (http_) http_->stop();
}

std::size_t ExperimentServer::answered(const std::string& subject) const {
  std::lock_guard lock(mutex_);
  auto it = answered_.find(subject);
  return it == answered_.end() ? 0 : it->second.size();
}

const std::vector<std::size_t>& ExperimentServer::order_for(const std::string& subject) const {
  auto it = orders_.find(subject);
  if (it == orders_.end()) it = orders_.emplace(subject, subject_trial_order(trials_.size(), seed_, subject)).first;
  return it->second;
}

std::optional<std::size_t> ExperimentServer::current_trial(const std::string& subject) const {
  const auto& order = order_for(subject);
  auto done = answered_.find(subject);
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    if (done == answered_.end() || !done->second.contains(trials_[order[pos]].trial_id)) return pos;
  }
  return std::nullopt;
}

ExperimentServer::Reply ExperimentServer::session(const std::string& subject) const {
  std::lock_guard lock(mutex_);
  auto it = answered_.find(subject);
  const std::size_t answered = it == answered_.end() ? 0 : it->second.size();
  const auto pos = current_trial(subject);
  ordered_json body{{"subject_id", subject},
                    {"answered", answered},
                    {"total", trials_.size()},
                    {"next_index", pos ? ordered_json(*pos + 1) : ordered_json(nullptr)}};
  return {200, body.dump()};
}

ExperimentServer::Reply ExperimentServer::next_trial(const std::string& subject) const {
  std::lock_guard lock(mutex_);
  const auto pos = current_trial(subject);
  if (!pos) {
    auto it = answered_.find(subject);
    ordered_json body{{"done", true},
                      {"answered", it == answered_.end() ? 0 : it->second.size()},
                      {"total", trials_.size()}};
    return {200, body.dump()};
  }
  const auto& trial = trials_[order_for(subject)[*pos]];
  return {200, rater_payload(trial, *pos + 1, trials_.size()).dump()};
}

ExperimentServer::Reply ExperimentServer::post_response(const std::string& body) {
  Response r;
  try {
    r = response_from_json(json::parse(body));
  } catch (const json::parse_error& e) {
    std::cerr << "rejected response: malformed JSON\n";
    return {400, error_body(std::string("malformed JSON: ") + e.what())};
  } catch (const ValidationError& e) {
    std::cerr << "rejected response: " << e.what() << "\n";
    return {400, error_body(e.what())};
  }

  std::lock_guard lock(mutex_);
  if (!trial_index_.contains(r.trial_id)) {
    std::cerr << "rejected response: unknown trial " << r.trial_id << "\n";
    return {404, error_body("unknown trial \"" + r.trial_id + "\"")};
  }
  auto& done = answered_[r.subject_id];
  if (done.contains(r.trial_id)) {
    std::cerr << "rejected response: duplicate " << r.subject_id << "/" << r.trial_id << "\n";
    return {409, error_body("subject \"" + r.subject_id + "\" already answered trial \"" + r.trial_id + "\"")};
  }
  const auto pos = current_trial(r.subject_id);
  if (!pos || trials_[order_for(r.subject_id)[*pos]].trial_id != r.trial_id) {
    std::cerr << "rejected response: out of order " << r.subject_id << "/" << r.trial_id << "\n";
    return {409, error_body("trial \"" + r.trial_id + "\" is not the subject's current trial")};
  }
  if (r.timestamp.empty()) r.timestamp = utc_timestamp();

  {
    std::ofstream log(log_path_, std::ios::app | std::ios::binary);
    log << response_to_jsonl(r) << '\n';
    log.flush();
    if (!log) return {500, error_body("could not append to the response log")};
  }
  done.insert(r.trial_id);
  ordered_json ack{{"ok", true}, {"answered", done.size()}, {"total", trials_.size()}};
  return {200, ack.dump()};
}

int run_serve(const Config& config) {
  const auto bundle = trials_path(config);
  if (!fs::is_regular_file(bundle)) throw ParameterError("trial bundle not found: " + bundle.string());
  if (config.static_dir && !fs::is_directory(*config.static_dir)) {
    throw ParameterError("static asset directory not found: " + config.static_dir->string());
  }
  const auto log_path = responses_path(config);
  if (log_path.has_parent_path()) fs::create_directories(log_path.parent_path());

  ExperimentServer server(load_trials(bundle), log_path, config.seed, config.static_dir);
  if (!server.bind(config.host, config.port)) {
    std::cerr << "error: cannot bind " << config.host << ":" << config.port << " (port busy?)\n";
    return 2;
  }
  std::cerr << "serving " << bundle.string() << " on http://" << config.host << ":" << server.port()
            << ", responses -> " << log_path.string() << "\n";
  return server.listen() ? 0 : 1;
}

}  // namespace forumdiv::cli
