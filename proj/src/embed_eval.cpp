#include "forumdiv/embed_eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <unordered_map>

#include "forumdiv/csv.hpp"
#include "forumdiv/error.hpp"

namespace forumdiv {
namespace {

// 0-based ranks with ties sharing their mean rank.
std::vector<double> mean_ranks(const std::vector<double>& values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j);
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
    i = j + 1;
  }
  return ranks;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

double quantile_difference(const std::vector<double>& values, const std::vector<int>& labels,
                           QuantileAggregate aggregate) {
  if (values.size() != labels.size()) throw ParameterError("quantile_difference: values/labels size mismatch");
  if (values.size() < 2) throw ParameterError("quantile_difference: need at least 2 pairs");
  const auto ranks = mean_ranks(values);
  const double scale = 1.0 / static_cast<double>(values.size() - 1);
  std::vector<double> q1, q0;
  for (std::size_t i = 0; i < values.size(); ++i) (labels[i] == 1 ? q1 : q0).push_back(ranks[i] * scale);
  if (q1.empty() || q0.empty()) throw ParameterError("quantile_difference: both labels must be present");
  if (aggregate == QuantileAggregate::Median) return median(q1) - median(q0);
  return mean(q1) - mean(q0);
}

std::vector<double> pair_similarities(const SimilarityMatrix& sims, const std::vector<GoldPair>& pairs) {
  std::unordered_map<std::string_view, std::size_t> pos;
  for (std::size_t i = 0; i < sims.comment_ids.size(); ++i) pos.emplace(sims.comment_ids[i], i);
  auto index = [&](const std::string& id) {
    auto it = pos.find(id);
    if (it == pos.end()) throw ParameterError("comment \"" + id + "\" is not covered by the embedding");
    return it->second;
  };
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(sims(index(p.comment_a), index(p.comment_b)));
  return out;
}

namespace {
std::vector<int> labels_of(const std::vector<GoldPair>& pairs) {
  std::vector<int> labels;
  labels.reserve(pairs.size());
  for (const auto& p : pairs) labels.push_back(p.label);
  return labels;
}
}  // namespace

double quantile_difference(const SimilarityMatrix& sims, const std::vector<GoldPair>& pairs,
                           QuantileAggregate aggregate) {
  return quantile_difference(pair_similarities(sims, pairs), labels_of(pairs), aggregate);
}

double LogisticModel::probability(double x) const {
  const double z = weight * x + bias;
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

LogisticModel train_logreg(const std::vector<double>& features, const std::vector<int>& labels,
                           const LogisticConfig& config) {
  if (features.size() != labels.size()) throw ParameterError("train_logreg: features/labels size mismatch");
  const auto positives = std::count(labels.begin(), labels.end(), 1);
  if (positives == 0 || positives == static_cast<long>(labels.size())) {
    throw ParameterError("train_logreg: training data must contain both classes");
  }
  // Descent runs on the standardized feature and the result is mapped back to
  // the raw cosine scale; raw cosines span a narrow range and converge slowly.
  const double n = static_cast<double>(features.size());
  const double mu = std::accumulate(features.begin(), features.end(), 0.0) / n;
  double var = 0.0;
  for (double x : features) var += (x - mu) * (x - mu);
  const double sd = std::sqrt(var / n);
  const double center = sd > 0.0 ? mu : 0.0;
  const double scale = sd > 0.0 ? sd : 1.0;

  LogisticModel z;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    double gw = 0.0;
    double gb = 0.0;
    for (std::size_t i = 0; i < features.size(); ++i) {
      const double x = (features[i] - center) / scale;
      const double err = z.probability(x) - labels[i];
      gw += err * x;
      gb += err;
    }
    z.weight -= config.learning_rate * gw / n;
    z.bias -= config.learning_rate * gb / n;
  }
  return LogisticModel{z.weight / scale, z.bias - z.weight * center / scale};
}

LogisticModel train_logreg(const std::vector<GoldPair>& train_pairs, const SimilarityMatrix& sims,
                           const LogisticConfig& config) {
  return train_logreg(pair_similarities(sims, train_pairs), labels_of(train_pairs), config);
}

double accuracy(const LogisticModel& model, const std::vector<double>& features, const std::vector<int>& labels) {
  if (features.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < features.size(); ++i) hits += model.predict(features[i]) == labels[i];
  return static_cast<double>(hits) / static_cast<double>(features.size());
}

EvalReport evaluate_model(const EmbeddingMatrix& emb, const GoldSplit& split, const EvalConfig& config) {
  const auto sims = cosine_matrix(emb);
  const auto train_x = pair_similarities(sims, split.train);
  const auto test_x = pair_similarities(sims, split.test);
  const auto train_y = labels_of(split.train);
  const auto test_y = labels_of(split.test);

  EvalReport report;
  report.model = std::string(to_string(emb.model));
  report.quantile_difference = quantile_difference(test_x, test_y, config.aggregate);
  report.fitted = train_logreg(train_x, train_y, config.logistic);
  report.logreg_accuracy = accuracy(report.fitted, test_x, test_y);
  report.train_accuracy = accuracy(report.fitted, train_x, train_y);
  report.n_train_pairs = split.train.size();
  report.n_test_pairs = split.test.size();
  return report;
}

std::string reports_to_csv(const std::vector<EvalReport>& reports) {
  std::string out = "model,quantile_difference,logreg_accuracy,n_train,n_test\n";
  for (const auto& r : reports) {
    out += csv::join({r.model, csv::format_real(r.quantile_difference), csv::format_real(r.logreg_accuracy),
                      std::to_string(r.n_train_pairs), std::to_string(r.n_test_pairs)});
    out += '\n';
  }
  return out;
}

std::string reports_to_table(const std::vector<EvalReport>& reports) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-12s %20s %16s %8s %8s\n", "model", "quantile_difference",
                "logreg_accuracy", "n_train", "n_test");
  out += line;
  for (const auto& r : reports) {
    std::snprintf(line, sizeof line, "%-12s %20.3f %16.3f %8zu %8zu\n", r.model.c_str(), r.quantile_difference,
                  r.logreg_accuracy, r.n_train_pairs, r.n_test_pairs);
    out += line;
  }
  return out;
}

}  // namespace forumdiv
