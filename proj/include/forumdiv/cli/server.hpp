#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "forumdiv/cli/commands.hpp"
#include "forumdiv/experiment.hpp"

namespace httplib {
class Server;
}

namespace forumdiv::cli {

// Serves blind trials to raters and appends their answers to a JSON-lines
// log. Per-subject progress is rebuilt from the log on startup, so a
// restarted server resumes every subject at the first unanswered trial.
class ExperimentServer {
 public:
  ExperimentServer(std::vector<Trial> trials, std::filesystem::path response_log, std::uint64_t seed,
                   std::optional<std::filesystem::path> static_dir = std::nullopt);
  ~ExperimentServer();
  ExperimentServer(const ExperimentServer&) = delete;
  ExperimentServer& operator=(const ExperimentServer&) = delete;

  /// Binds the listening socket; port 0 picks a free port. Returns false
  /// when the port is unavailable.
  bool bind(const std::string& host, int port);
  int port() const { return port_; }
  /// Blocks serving requests until stop() is called.
  bool listen();
  /// Blocks until a concurrent listen() accepts connections.
  void wait_until_ready() const;
  void stop();

  std::size_t answered(const std::string& subject) const;

 private:
  struct Reply {
    int status;
    std::string body;
  };
  Reply session(const std::string& subject) const;
  Reply next_trial(const std::string& subject) const;
  Reply post_response(const std::string& body);

  // Index of the subject's current trial in presentation order, or nullopt when done.
  std::optional<std::size_t> current_trial(const std::string& subject) const;
  const std::vector<std::size_t>& order_for(const std::string& subject) const;

  std::vector<Trial> trials_;
  std::map<std::string, std::size_t> trial_index_;
  std::filesystem::path log_path_;
  std::uint64_t seed_;
  std::unique_ptr<httplib::Server> http_;
  int port_ = -1;

  mutable std::mutex mutex_;
  std::map<std::string, std::set<std::string>> answered_;  // subject -> trial ids
  mutable std::map<std::string, std::vector<std::size_t>> orders_;
};

/// The `serve` subcommand: binds, prints the address, serves until killed.
int run_serve(const Config& config);

}  // namespace forumdiv::cli
