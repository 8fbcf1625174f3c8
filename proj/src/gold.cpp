#include "forumdiv/gold.hpp"

#include <algorithm>
#include <sstream>

#include "forumdiv/csv.hpp"
#include "forumdiv/error.hpp"
#include "forumdiv/random.hpp"

namespace forumdiv {

GoldPair make_gold_pair(std::string a, std::string b, int label) {
  if (a == b) throw ParameterError("gold pair needs two distinct comments, got \"" + a + "\" twice");
  if (b < a) std::swap(a, b);
  return GoldPair{std::move(a), std::move(b), label};
}

std::vector<GoldPair> all_pairs(const Corpus& corpus, const std::vector<std::string>& comment_ids) {
  std::vector<GoldPair> pairs;
  pairs.reserve(comment_ids.size() * (comment_ids.size() - (comment_ids.empty() ? 0 : 1)) / 2);
  for (std::size_t i = 0; i < comment_ids.size(); ++i) {
    const auto& ti = corpus.comment(comment_ids[i]).topic_id;
    for (std::size_t j = i + 1; j < comment_ids.size(); ++j) {
      const int label = ti == corpus.comment(comment_ids[j]).topic_id ? 1 : 0;
      pairs.push_back(make_gold_pair(comment_ids[i], comment_ids[j], label));
    }
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

GoldSplit generate_gold(const Corpus& corpus, const GoldConfig& config) {
  if (config.topics_per_split < 1 || config.comments_per_topic < 1) {
    throw ParameterError("gold: topics_per_split and comments_per_topic must be >= 1");
  }
  std::vector<const Topic*> eligible;
  for (const auto& t : corpus.topics()) {
    if (config.excluded_topics.contains(t.id)) continue;
    if (t.comment_ids.size() >= config.comments_per_topic) eligible.push_back(&t);
  }
  const std::size_t required = 2 * config.topics_per_split;
  if (eligible.size() < required) {
    std::ostringstream msg;
    msg << "gold: need " << required << " topics with at least " << config.comments_per_topic
        << " comments each, but only " << eligible.size() << " are available";
    throw ParameterError(msg.str());
  }

  Rng rng(config.seed);
  shuffle(eligible, rng);

  auto sample_split = [&](std::size_t first, std::set<std::string>& topics) {
    std::vector<std::string> ids;
    for (std::size_t t = first; t < first + config.topics_per_split; ++t) {
      topics.insert(eligible[t]->id);
      auto pool = eligible[t]->comment_ids;
      // Partial Fisher-Yates: the first comments_per_topic slots are the sample.
      for (std::size_t i = 0; i < config.comments_per_topic; ++i) {
        const auto j = i + static_cast<std::size_t>(uniform_index(rng, pool.size() - i));
        std::swap(pool[i], pool[j]);
        ids.push_back(pool[i]);
      }
    }
    return all_pairs(corpus, ids);
  };

  GoldSplit split;
  split.train = sample_split(0, split.train_topics);
  split.test = sample_split(config.topics_per_split, split.test_topics);
  return split;
}

std::string gold_to_csv(const GoldSplit& split) {
  std::string out = "comment_a,comment_b,label,split\n";
  auto emit = [&](const std::vector<GoldPair>& pairs, const char* name) {
    for (const auto& p : pairs) {
      out += csv::join({p.comment_a, p.comment_b, std::to_string(p.label), name});
      out += '\n';
    }
  };
  emit(split.train, "train");
  emit(split.test, "test");
  return out;
}

}  // namespace forumdiv
