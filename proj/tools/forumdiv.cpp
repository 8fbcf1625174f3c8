// forumdiv: comment embedding, MMR re-ranking and blind-evaluation tooling.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "forumdiv/cli/commands.hpp"
#include "forumdiv/cli/server.hpp"
#include "forumdiv/version.hpp"

namespace cli = forumdiv::cli;

int main(int argc, char** argv) {
  CLI::App app{"Forum comment ranking diversification toolkit", "forumdiv"};
  app.set_version_flag("--version", forumdiv::kVersion);
  app.set_config("--config", "", "TOML-style config file; command-line flags take precedence");
  app.require_subcommand(1);
  app.fallthrough();

  cli::Config cfg;
  std::string stopwords;
  std::string static_dir;
  std::size_t k = 0;

  app.add_option("--corpus", cfg.corpus, "Corpus JSON file");
  app.add_option("--stopwords", stopwords, "Stopword file (default: built-in English list)");
  app.add_option("--out", cfg.out, "Output directory")->capture_default_str();
  app.add_option("--model", cfg.model, "Embedding model: TFIDF, PCA+TFIDF, LSA+TFIDF, NMF+TFIDF")
      ->capture_default_str();
  app.add_option("--models", cfg.models, "Models to evaluate (default: all)")->delimiter(',');
  app.add_option("--k", k, "Reduced dimension (default: min(100, N-1, D))");
  app.add_option("--lambda", cfg.lambda, "MMR trade-off in [0, 1]")->capture_default_str();
  app.add_option("--top-k", cfg.top_k, "Ranking length / trial list size")->capture_default_str();
  app.add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
  app.add_option("--topics-per-split", cfg.topics_per_split, "Gold topics per split")->capture_default_str();
  app.add_option("--comments-per-topic", cfg.comments_per_topic, "Gold comments per topic")->capture_default_str();
  app.add_option("--lr", cfg.learning_rate, "Logistic regression learning rate")->capture_default_str();
  app.add_option("--epochs", cfg.epochs, "Logistic regression epochs")->capture_default_str();
  app.add_flag("--median", cfg.median_quantile, "Report the median-quantile variant of the metric");
  app.add_option("--nmf-iter", cfg.nmf_iter, "NMF iteration cap")->capture_default_str();
  app.add_option("--nmf-tol", cfg.nmf_tol, "NMF relative improvement tolerance")->capture_default_str();
  app.add_option("--n-low", cfg.n_low, "Trials at lambda = 0.25")->capture_default_str();
  app.add_option("--n-high", cfg.n_high, "Trials at lambda = 0.75")->capture_default_str();
  app.add_option("--trials", cfg.trials, "Trial bundle (default: <out>/trials.json)");
  app.add_option("--responses", cfg.responses, "Response log (default: <out>/responses.jsonl)");
  app.add_option("--port", cfg.port, "HTTP port for serve")->capture_default_str();
  app.add_option("--host", cfg.host, "HTTP bind address for serve")->capture_default_str();
  app.add_option("--static-dir", static_dir, "Rater UI assets served at /");
  app.add_flag("-v,--verbose", cfg.verbose, "Print per-model diagnostics");

  auto* embed = app.add_subcommand("embed", "Write embedding and similarity CSVs");
  auto* evaluate = app.add_subcommand("evaluate", "Score embedding models on generated gold pairs");
  auto* rerank = app.add_subcommand("rerank", "Write MMR rankings per topic");
  auto* gen_trials = app.add_subcommand("gen-trials", "Generate the blind A/B trial bundle");
  auto* serve = app.add_subcommand("serve", "Serve trials to raters over HTTP");
  auto* aggregate = app.add_subcommand("aggregate", "Unblind responses into preference and kappa tables");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (!stopwords.empty()) cfg.stopwords = stopwords;
  if (!static_dir.empty()) cfg.static_dir = static_dir;
  if (app.count("--k") > 0) cfg.k = k;

  try {
    if (*serve) return cli::run_serve(cfg);

    cli::CommandResult result;
    if (*embed) result = cli::cmd_embed(cfg);
    else if (*evaluate) result = cli::cmd_evaluate(cfg);
    else if (*rerank) result = cli::cmd_rerank(cfg);
    else if (*gen_trials) result = cli::cmd_gen_trials(cfg);
    else if (*aggregate) result = cli::cmd_aggregate(cfg);

    if (*evaluate) {
      std::ifstream table(cfg.out / "evaluation.txt");
      std::cout << table.rdbuf();
      if (cfg.verbose)
        for (const auto& line : result.log) std::cerr << line << "\n";
    } else {
      for (const auto& line : result.log) std::cerr << line << "\n";
    }
    for (const auto& f : result.files) std::cerr << "wrote " << (cfg.out / f).string() << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::exit_code_for(e);
  }
}
