#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "forumdiv/tokenizer.hpp"

namespace forumdiv {

struct Comment {
  std::string id;
  std::string topic_id;
  std::string text;
  std::uint64_t reply_count = 0;
  std::vector<std::string> tokens;

  friend bool operator==(const Comment&, const Comment&) = default;
};

struct Topic {
  std::string id;
  std::string question;
  std::vector<std::string> comment_ids;

  friend bool operator==(const Topic&, const Topic&) = default;
};

/// Raw, untokenized record used to build a Corpus programmatically.
struct CommentRecord {
  std::string id;
  std::string text;
  std::uint64_t reply_count = 0;
};

struct TopicRecord {
  std::string id;
  std::string question;
  std::vector<CommentRecord> comments;
};

// Immutable topic > comment tree. Comments are stored flat in topic order;
// that position is the row index used by every embedding and similarity matrix.
class Corpus {
 public:
  Corpus(std::vector<TopicRecord> topics, TokenizerConfig config);

  const std::vector<Topic>& topics() const { return topics_; }
  const std::vector<Comment>& comments() const { return comments_; }
  const TokenizerConfig& tokenizer_config() const { return config_; }

  std::size_t size() const { return comments_.size(); }
  bool empty() const { return comments_.empty(); }

  std::optional<std::size_t> index_of(std::string_view comment_id) const;
  /// Throws ValidationError when the id is unknown.
  std::size_t require_index(std::string_view comment_id) const;
  const Comment& comment(std::string_view comment_id) const {
    return comments_[require_index(comment_id)];
  }
  const Topic* find_topic(std::string_view topic_id) const;

  std::vector<std::string> comment_ids() const;

  friend bool operator==(const Corpus& a, const Corpus& b) {
    return a.topics_ == b.topics_ && a.comments_ == b.comments_;
  }

 private:
  std::vector<Topic> topics_;
  std::vector<Comment> comments_;
  std::unordered_map<std::string, std::size_t> comment_index_;
  std::unordered_map<std::string, std::size_t> topic_index_;
  TokenizerConfig config_;
};

/// Score used for ranking: the number of replies.
inline std::uint64_t score_of(const Comment& comment) { return comment.reply_count; }

Corpus parse_corpus(std::string_view json_text, const TokenizerConfig& config);
Corpus load_corpus(const std::filesystem::path& path, const TokenizerConfig& config);

/// Serializes to the corpus JSON format (tokens are derived and not written).
std::string corpus_to_json(const Corpus& corpus);

}  // namespace forumdiv
