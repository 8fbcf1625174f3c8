#include "forumdiv/cli/commands.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "forumdiv/corpus.hpp"
#include "forumdiv/embed_eval.hpp"
#include "forumdiv/error.hpp"
#include "forumdiv/experiment.hpp"
#include "forumdiv/gold.hpp"
#include "forumdiv/mmr.hpp"
#include "forumdiv/version.hpp"

namespace forumdiv::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

using Clock = std::chrono::steady_clock;

class Timings {
 public:
  void mark(const std::string& phase) {
    const auto now = Clock::now();
    phases_[phase] = std::chrono::duration<double, std::milli>(now - last_).count();
    last_ = now;
  }
  ordered_json to_json() const {
    ordered_json j = ordered_json::object();
    for (const auto& [k, v] : phases_) j[k] = v;
    return j;
  }

 private:
  Clock::time_point last_ = Clock::now();
  std::map<std::string, double> phases_;
};

void require_file(const fs::path& path, const char* what) {
  if (path.empty()) throw ParameterError(std::string("missing required path: ") + what);
  if (!fs::is_regular_file(path)) throw ParameterError(std::string(what) + " not found: " + path.string());
}

void prepare_out(const Config& config) {
  std::error_code ec;
  fs::create_directories(config.out, ec);
  if (ec || !fs::is_directory(config.out)) {
    throw ParameterError("cannot create output directory " + config.out.string() + ": " + ec.message());
  }
}

TokenizerConfig tokenizer_config(const Config& config) {
  TokenizerConfig tc;
  tc.stopwords = config.stopwords ? load_stopwords(*config.stopwords) : default_stopwords();
  return tc;
}

void validate_corpus_inputs(const Config& config) {
  require_file(config.corpus, "corpus");
  if (config.stopwords) require_file(*config.stopwords, "stopword file");
}

EmbedConfig embed_config(const Config& config, ModelTag model) {
  EmbedConfig ec;
  ec.model = model;
  ec.k = config.k;
  ec.nmf.max_iter = config.nmf_iter;
  ec.nmf.tol = config.nmf_tol;
  ec.nmf.seed = config.seed;
  return ec;
}

void write_file(const fs::path& path, const std::string& contents) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << contents;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

ordered_json config_snapshot(const Config& c) {
  auto path_or_null = [](const std::optional<fs::path>& p) -> ordered_json {
    return p ? ordered_json(p->string()) : ordered_json(nullptr);
  };
  return {{"corpus", c.corpus.string()},
          {"stopwords", path_or_null(c.stopwords)},
          {"out", c.out.string()},
          {"model", c.model},
          {"models", c.models},
          {"k", c.k ? ordered_json(*c.k) : ordered_json(nullptr)},
          {"lambda", c.lambda},
          {"top_k", c.top_k},
          {"seed", c.seed},
          {"topics_per_split", c.topics_per_split},
          {"comments_per_topic", c.comments_per_topic},
          {"learning_rate", c.learning_rate},
          {"epochs", c.epochs},
          {"median_quantile", c.median_quantile},
          {"nmf_iter", c.nmf_iter},
          {"nmf_tol", c.nmf_tol},
          {"n_low", c.n_low},
          {"n_high", c.n_high},
          {"trials", c.trials.string()},
          {"responses", c.responses.string()}};
}

// One manifest per output directory; each command owns an entry under "runs".
void write_manifest(const Config& config, const std::string& command, const CommandResult& result,
                    const Timings& timings) {
  const fs::path path = config.out / "manifest.json";
  ordered_json manifest;
  if (fs::exists(path)) {
    std::ifstream in(path);
    manifest = ordered_json::parse(in, nullptr, false);
    if (manifest.is_discarded() || !manifest.is_object()) manifest = ordered_json::object();
  }
  manifest["tool"] = "forumdiv";
  manifest["version"] = kVersion;
  ordered_json artifacts = ordered_json::array();
  for (const auto& rel : result.files) {
    const auto full = config.out / rel;
    artifacts.push_back({{"path", rel.generic_string()},
                         {"sha256", sha256_file(full)},
                         {"bytes", fs::file_size(full)}});
  }
  manifest["runs"][command] = {{"config", config_snapshot(config)},
                               {"artifacts", std::move(artifacts)},
                               {"timings_ms", timings.to_json()}};
  write_file(path, manifest.dump(2) + "\n");
}

std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
    out += ok ? c : '_';
  }
  return out.substr(0, 64);
}

}  // namespace

fs::path trials_path(const Config& config) { return config.trials.empty() ? config.out / "trials.json" : config.trials; }

fs::path responses_path(const Config& config) {
  return config.responses.empty() ? config.out / "responses.jsonl" : config.responses;
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  char buf[1 << 15];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ParameterError*>(&e) || dynamic_cast<const ValidationError*>(&e) ||
      dynamic_cast<const ParseError*>(&e)) {
    return 2;
  }
  return 1;
}

CommandResult cmd_embed(const Config& config) {
  const auto model = parse_model_tag(config.model);
  validate_corpus_inputs(config);
  prepare_out(config);
  Timings timings;

  const auto corpus = load_corpus(config.corpus, tokenizer_config(config));
  timings.mark("load");
  const auto emb = embed_corpus(corpus, embed_config(config, model));
  timings.mark("embed");
  const auto sims = cosine_matrix(emb);
  timings.mark("similarity");

  CommandResult result;
  write_file(config.out / "embedding.csv", embedding_to_csv(emb));
  write_file(config.out / "similarity.csv", similarity_to_csv(sims));
  result.files = {"embedding.csv", "similarity.csv"};
  timings.mark("write");
  write_manifest(config, "embed", result, timings);
  return result;
}

CommandResult cmd_evaluate(const Config& config) {
  std::vector<ModelTag> models;
  for (const auto& name : config.models) models.push_back(parse_model_tag(name));
  validate_corpus_inputs(config);
  if (models.empty()) models = all_model_tags();
  prepare_out(config);
  Timings timings;

  const auto corpus = load_corpus(config.corpus, tokenizer_config(config));
  timings.mark("load");
  GoldConfig gc;
  gc.topics_per_split = config.topics_per_split;
  gc.comments_per_topic = config.comments_per_topic;
  gc.seed = config.seed;
  const auto gold = generate_gold(corpus, gc);
  timings.mark("gold");

  EvalConfig ec;
  ec.logistic.learning_rate = config.learning_rate;
  ec.logistic.epochs = config.epochs;
  ec.aggregate = config.median_quantile ? QuantileAggregate::Median : QuantileAggregate::Mean;

  CommandResult result;
  std::vector<EvalReport> reports;
  for (auto model : models) {
    reports.push_back(evaluate_model(embed_corpus(corpus, embed_config(config, model)), gold, ec));
    timings.mark(std::string(to_string(model)));
    const auto& r = reports.back();
    std::ostringstream line;
    line << r.model << ": train accuracy " << r.train_accuracy << ", weight " << r.fitted.weight << ", bias "
         << r.fitted.bias;
    result.log.push_back(line.str());
  }

  write_file(config.out / "gold.csv", gold_to_csv(gold));
  write_file(config.out / "evaluation.csv", reports_to_csv(reports));
  write_file(config.out / "evaluation.txt", reports_to_table(reports));
  result.files = {"gold.csv", "evaluation.csv", "evaluation.txt"};
  timings.mark("write");
  write_manifest(config, "evaluate", result, timings);
  return result;
}

CommandResult cmd_rerank(const Config& config) {
  const auto model = parse_model_tag(config.model);
  validate_corpus_inputs(config);
  if (!(config.lambda >= 0.0 && config.lambda <= 1.0)) throw ParameterError("--lambda must be in [0, 1]");
  if (config.top_k < 1) throw ParameterError("--top-k must be >= 1");
  prepare_out(config);
  Timings timings;

  const auto corpus = load_corpus(config.corpus, tokenizer_config(config));
  const auto sims = cosine_matrix(embed_corpus(corpus, embed_config(config, model)));
  timings.mark("embed");

  CommandResult result;
  std::size_t index = 0;
  for (const auto& topic : corpus.topics()) {
    ++index;
    if (topic.comment_ids.empty()) continue;
    const auto input = make_mmr_input(corpus, topic, sims, std::string(to_string(model)));
    const auto ranking = mmr_rerank(input, config.lambda, config.top_k);
    char prefix[16];
    std::snprintf(prefix, sizeof prefix, "%04zu_", index);
    const fs::path rel = fs::path("rankings") / (prefix + sanitize(topic.id) + ".json");
    write_file(config.out / rel, ranking_to_json(ranking));
    result.files.push_back(rel);
  }
  timings.mark("rerank");
  write_manifest(config, "rerank", result, timings);
  return result;
}

CommandResult cmd_gen_trials(const Config& config) {
  const auto model = parse_model_tag(config.model);
  validate_corpus_inputs(config);
  prepare_out(config);
  Timings timings;

  const auto corpus = load_corpus(config.corpus, tokenizer_config(config));
  const auto sims = cosine_matrix(embed_corpus(corpus, embed_config(config, model)));
  timings.mark("embed");

  TrialConfig tc;
  tc.n_low = config.n_low;
  tc.n_high = config.n_high;
  tc.list_size = config.top_k;
  tc.seed = config.seed;
  tc.model = std::string(to_string(model));
  auto set = generate_trials(corpus, sims, tc);
  timings.mark("trials");

  CommandResult result;
  write_file(config.out / "trials.json", trials_to_json(set.trials));
  std::string log;
  for (const auto& line : set.log) log += line + "\n";
  write_file(config.out / "trials.log", log);
  result.files = {"trials.json", "trials.log"};
  result.log = std::move(set.log);
  write_manifest(config, "gen-trials", result, timings);
  return result;
}

CommandResult cmd_aggregate(const Config& config) {
  const auto bundle = trials_path(config);
  const auto log_path = responses_path(config);
  require_file(bundle, "trial bundle");
  require_file(log_path, "response log");
  prepare_out(config);
  Timings timings;

  const auto trials = load_trials(bundle);
  const auto responses = ingest_responses(log_path, trial_ids(trials));
  timings.mark("load");

  CommandResult result;
  write_file(config.out / "table3.csv", aggregate_to_csv(aggregate(trials, responses)));
  write_file(config.out / "table4.csv", kappa_to_csv(kappa_report(responses)));
  result.files = {"table3.csv", "table4.csv"};
  timings.mark("aggregate");
  write_manifest(config, "aggregate", result, timings);
  return result;
}

}  // namespace forumdiv::cli
