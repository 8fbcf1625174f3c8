#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "forumdiv/embedding.hpp"

namespace forumdiv::cli {

struct Config {
  std::filesystem::path corpus;
  std::optional<std::filesystem::path> stopwords;  // default: built-in list
  std::filesystem::path out = "out";

  std::string model = "PCA+TFIDF";
  std::vector<std::string> models;  // evaluate; empty means all
  std::optional<std::size_t> k;
  double lambda = 0.75;
  std::size_t top_k = 5;
  std::uint64_t seed = 0;

  // gold / evaluation
  std::size_t topics_per_split = 5;
  std::size_t comments_per_topic = 10;
  double learning_rate = 0.1;
  int epochs = 5000;
  bool median_quantile = false;
  std::size_t nmf_iter = 200;
  double nmf_tol = 1e-4;

  // experiment
  std::size_t n_low = 75;
  std::size_t n_high = 25;
  std::filesystem::path trials;     // bundle; default <out>/trials.json
  std::filesystem::path responses;  // default <out>/responses.jsonl
  std::uint16_t port = 8080;
  std::string host = "127.0.0.1";
  std::optional<std::filesystem::path> static_dir;

  bool verbose = false;
};

struct CommandResult {
  std::vector<std::filesystem::path> files;  // relative to the output directory
  std::vector<std::string> log;
};

CommandResult cmd_embed(const Config& config);
CommandResult cmd_evaluate(const Config& config);
CommandResult cmd_rerank(const Config& config);
CommandResult cmd_gen_trials(const Config& config);
CommandResult cmd_aggregate(const Config& config);

/// Path defaults that depend on --out.
std::filesystem::path trials_path(const Config& config);
std::filesystem::path responses_path(const Config& config);

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// 0 success, 1 internal error, 2 usage/validation error.
int exit_code_for(const std::exception& e);

}  // namespace forumdiv::cli
