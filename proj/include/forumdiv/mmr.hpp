#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "forumdiv/corpus.hpp"
#include "forumdiv/embedding.hpp"

namespace forumdiv {

/// score_i / max(score), or all zeros when every score is zero.
std::vector<double> normalize_scores(const std::vector<std::uint64_t>& raw);

struct MmrInput {
  std::string topic_id;
  std::vector<std::string> comment_ids;
  std::vector<std::uint64_t> raw_scores;
  std::vector<double> scores;  // normalized to [0, 1]
  Matrix similarity;           // aligned with comment_ids
  std::string model;           // tag of the similarity source
};

/// Builds the input for one topic from the corpus reply counts and a
/// corpus-wide similarity matrix.
MmrInput make_mmr_input(const Corpus& corpus, const Topic& topic, const SimilarityMatrix& sims,
                        std::string model);

struct RankedItem {
  std::string comment_id;
  double selection_score = 0.0;

  friend bool operator==(const RankedItem&, const RankedItem&) = default;
};

struct Ranking {
  std::string topic_id;
  double lambda = 1.0;
  std::string model;
  std::vector<RankedItem> items;

  friend bool operator==(const Ranking&, const Ranking&) = default;
};

/// Greedy MMR: each step picks the candidate maximizing
///   lambda * s - (1 - lambda) * c,
/// c being the largest similarity (clamped to [0, 1]) to any already picked
/// comment, 0 on the first step. Ties go to the higher raw score, then the
/// smaller comment id.
Ranking mmr_rerank(const MmrInput& input, double lambda, std::size_t k);

/// Score-only ordering (lambda = 1).
Ranking baseline_ranking(const MmrInput& input, std::size_t k);

std::string ranking_to_json(const Ranking& ranking);

}  // namespace forumdiv
