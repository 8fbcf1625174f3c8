#include "forumdiv/mmr.hpp"

#include <algorithm>
#include <sstream>

#include <nlohmann/json.hpp>

#include "forumdiv/error.hpp"

namespace forumdiv {

std::vector<double> normalize_scores(const std::vector<std::uint64_t>& raw) {
  const std::uint64_t top = raw.empty() ? 0 : *std::max_element(raw.begin(), raw.end());
  std::vector<double> out(raw.size(), 0.0);
  if (top == 0) return out;
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = static_cast<double>(raw[i]) / static_cast<double>(top);
  return out;
}

MmrInput make_mmr_input(const Corpus& corpus, const Topic& topic, const SimilarityMatrix& sims,
                        std::string model) {
  MmrInput in;
  in.topic_id = topic.id;
  in.comment_ids = topic.comment_ids;
  for (const auto& id : topic.comment_ids) in.raw_scores.push_back(score_of(corpus.comment(id)));
  in.scores = normalize_scores(in.raw_scores);
  in.similarity = restrict_to(sims, topic.comment_ids).values;
  in.model = std::move(model);
  return in;
}

Ranking mmr_rerank(const MmrInput& input, double lambda, std::size_t k) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    std::ostringstream msg;
    msg << "MMR lambda must be in [0, 1], got " << lambda;
    throw ParameterError(msg.str());
  }
  if (k < 1) throw ParameterError("MMR top-k must be >= 1");
  const std::size_t n = input.comment_ids.size();
  if (n == 0) throw ParameterError("MMR input has no comments");
  if (input.scores.size() != n || input.raw_scores.size() != n || input.similarity.rows() != n ||
      input.similarity.cols() != n) {
    throw ParameterError("MMR input arrays are not aligned with its comment ids");
  }

  Ranking ranking{input.topic_id, lambda, input.model, {}};
  const std::size_t steps = std::min(k, n);
  std::vector<bool> selected(n, false);
  std::vector<double> max_sim(n, 0.0);  // clamped c per candidate

  for (std::size_t step = 0; step < steps; ++step) {
    std::size_t best = n;
    double best_score = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (selected[i]) continue;
      const double s_hat = lambda * input.scores[i] - (1.0 - lambda) * max_sim[i];
      bool better = best == n || s_hat > best_score;
      if (!better && s_hat == best_score) {
        better = input.raw_scores[i] > input.raw_scores[best] ||
                 (input.raw_scores[i] == input.raw_scores[best] && input.comment_ids[i] < input.comment_ids[best]);
      }
      if (better) {
        best = i;
        best_score = s_hat;
      }
    }
    selected[best] = true;
    ranking.items.push_back({input.comment_ids[best], best_score});
    for (std::size_t i = 0; i < n; ++i) {
      if (!selected[i]) max_sim[i] = std::max(max_sim[i], std::clamp(input.similarity(i, best), 0.0, 1.0));
    }
  }
  return ranking;
}

Ranking baseline_ranking(const MmrInput& input, std::size_t k) { return mmr_rerank(input, 1.0, k); }

std::string ranking_to_json(const Ranking& ranking) {
  nlohmann::ordered_json items = nlohmann::ordered_json::array();
  for (const auto& item : ranking.items) {
    items.push_back({{"comment_id", item.comment_id}, {"selection_score", item.selection_score}});
  }
  nlohmann::ordered_json doc{{"topic_id", ranking.topic_id},
                             {"lambda", ranking.lambda},
                             {"model", ranking.model},
                             {"items", std::move(items)}};
  return doc.dump(2) + "\n";
}

}  // namespace forumdiv
