#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "forumdiv/corpus.hpp"

namespace forumdiv {

/// Unordered comment pair labeled 1 when both comments share a topic.
struct GoldPair {
  std::string comment_a;  // comment_a < comment_b
  std::string comment_b;
  int label = 0;

  friend auto operator<=>(const GoldPair&, const GoldPair&) = default;
};

/// Builds the canonical pair (ids ordered lexicographically). Throws
/// ParameterError when the ids are equal.
GoldPair make_gold_pair(std::string a, std::string b, int label);

struct GoldSplit {
  std::vector<GoldPair> train;  // sorted
  std::vector<GoldPair> test;   // sorted
  std::set<std::string> train_topics;
  std::set<std::string> test_topics;

  friend bool operator==(const GoldSplit&, const GoldSplit&) = default;
};

struct GoldConfig {
  std::size_t topics_per_split = 5;
  std::size_t comments_per_topic = 10;
  std::uint64_t seed = 0;
  std::set<std::string> excluded_topics;  // e.g. near-duplicate topics
};

/// Samples disjoint train/test topic sets, then comments within each topic,
/// and emits every unordered pair within each split.
GoldSplit generate_gold(const Corpus& corpus, const GoldConfig& config);

/// All unordered pairs among `comment_ids`, labeled by topic equality.
std::vector<GoldPair> all_pairs(const Corpus& corpus, const std::vector<std::string>& comment_ids);

/// `comment_a,comment_b,label,split`
std::string gold_to_csv(const GoldSplit& split);

}  // namespace forumdiv
