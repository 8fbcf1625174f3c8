#pragma once

#include <string>
#include <vector>

#include "forumdiv/embedding.hpp"
#include "forumdiv/gold.hpp"

namespace forumdiv {

enum class QuantileAggregate { Mean, Median };

/// Mean percentile rank of label-1 pair similarities minus that of label-0
/// pairs. Ranks are taken over the pooled pair similarities (ties get their
/// mean rank) and scaled by 1/(n-1).
double quantile_difference(const SimilarityMatrix& sims, const std::vector<GoldPair>& pairs,
                           QuantileAggregate aggregate = QuantileAggregate::Mean);

/// Same metric on already-extracted similarities.
double quantile_difference(const std::vector<double>& values, const std::vector<int>& labels,
                           QuantileAggregate aggregate = QuantileAggregate::Mean);

/// Pair similarity per gold pair, in pair order.
std::vector<double> pair_similarities(const SimilarityMatrix& sims, const std::vector<GoldPair>& pairs);

struct LogisticModel {
  double weight = 0.0;
  double bias = 0.0;

  double probability(double x) const;
  int predict(double x) const { return probability(x) >= 0.5 ? 1 : 0; }
};

struct LogisticConfig {
  double learning_rate = 0.1;
  int epochs = 5000;
};

/// Full-batch gradient descent on mean log-loss, starting from zero.
LogisticModel train_logreg(const std::vector<double>& features, const std::vector<int>& labels,
                           const LogisticConfig& config = {});
LogisticModel train_logreg(const std::vector<GoldPair>& train_pairs, const SimilarityMatrix& sims,
                           const LogisticConfig& config = {});

double accuracy(const LogisticModel& model, const std::vector<double>& features, const std::vector<int>& labels);

struct EvalConfig {
  LogisticConfig logistic;
  QuantileAggregate aggregate = QuantileAggregate::Mean;
};

struct EvalReport {
  std::string model;
  double quantile_difference = 0.0;
  double logreg_accuracy = 0.0;  // test split
  double train_accuracy = 0.0;
  std::size_t n_train_pairs = 0;
  std::size_t n_test_pairs = 0;
  LogisticModel fitted;
};

EvalReport evaluate_model(const EmbeddingMatrix& emb, const GoldSplit& split, const EvalConfig& config = {});

/// `model,quantile_difference,logreg_accuracy,n_train,n_test`
std::string reports_to_csv(const std::vector<EvalReport>& reports);
/// Column-aligned version of the same table.
std::string reports_to_table(const std::vector<EvalReport>& reports);

}  // namespace forumdiv
