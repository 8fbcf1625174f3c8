#include "forumdiv/corpus.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "forumdiv/error.hpp"

namespace forumdiv {

using nlohmann::json;

Corpus::Corpus(std::vector<TopicRecord> topics, TokenizerConfig config) : config_(std::move(config)) {
  for (auto& record : topics) {
    if (record.id.empty()) throw ValidationError("topic with empty id");
    if (!topic_index_.emplace(record.id, topics_.size()).second) {
      throw ValidationError("duplicate topic id \"" + record.id + "\"");
    }
    Topic topic{record.id, std::move(record.question), {}};
    for (auto& c : record.comments) {
      if (c.id.empty()) throw ValidationError("comment with empty id in topic \"" + record.id + "\"");
      if (!comment_index_.emplace(c.id, comments_.size()).second) {
        throw ValidationError("duplicate comment id \"" + c.id + "\"");
      }
      topic.comment_ids.push_back(c.id);
      auto tokens = tokenize(c.text, config_);
      comments_.push_back(Comment{std::move(c.id), record.id, std::move(c.text), c.reply_count,
                                  std::move(tokens)});
    }
    topics_.push_back(std::move(topic));
  }
}

std::optional<std::size_t> Corpus::index_of(std::string_view comment_id) const {
  auto it = comment_index_.find(std::string(comment_id));
  if (it == comment_index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Corpus::require_index(std::string_view comment_id) const {
  if (auto idx = index_of(comment_id)) return *idx;
  throw ValidationError("unknown comment id \"" + std::string(comment_id) + "\"");
}

const Topic* Corpus::find_topic(std::string_view topic_id) const {
  auto it = topic_index_.find(std::string(topic_id));
  return it == topic_index_.end() ? nullptr : &topics_[it->second];
}

std::vector<std::string> Corpus::comment_ids() const {
  std::vector<std::string> ids;
  ids.reserve(comments_.size());
  for (const auto& c : comments_) ids.push_back(c.id);
  return ids;
}

namespace {

std::string line_context(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  std::size_t line = 1;
  std::size_t line_start = 0;
  for (std::size_t i = 0; i + 1 < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      line_start = i + 1;
    }
  }
  auto line_end = text.find('\n', line_start);
  if (line_end == std::string_view::npos) line_end = text.size();
  std::ostringstream msg;
  msg << "line " << line << ", column " << (byte - line_start) << ": "
      << text.substr(line_start, std::min<std::size_t>(line_end - line_start, 120));
  return msg.str();
}

const json& require_field(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError(where + ": missing field \"" + key + "\"");
  return *it;
}

std::string require_string(const json& obj, const char* key, const std::string& where) {
  const auto& v = require_field(obj, key, where);
  if (!v.is_string()) throw ValidationError(where + ": field \"" + key + "\" must be a string");
  return v.get<std::string>();
}

}  // namespace

Corpus parse_corpus(std::string_view json_text, const TokenizerConfig& config) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError("malformed corpus JSON at " + line_context(json_text, e.byte) + " (" +
                     e.what() + ")");
  }
  if (!doc.is_object() || !doc.contains("topics") || !doc["topics"].is_array()) {
    throw ValidationError("corpus JSON must be an object with a \"topics\" array");
  }
  std::unordered_set<std::string> topic_ids;
  for (const auto& t : doc["topics"]) {
    if (t.is_object() && t.contains("id") && t["id"].is_string()) topic_ids.insert(t["id"].get<std::string>());
  }

  std::vector<TopicRecord> records;
  std::size_t ti = 0;
  for (const auto& t : doc["topics"]) {
    const std::string where = "topic #" + std::to_string(ti++);
    if (!t.is_object()) throw ValidationError(where + ": must be an object");
    TopicRecord record;
    record.id = require_string(t, "id", where);
    record.question = t.contains("question") ? require_string(t, "question", where) : std::string();
    const auto& comments = require_field(t, "comments", where);
    if (!comments.is_array()) throw ValidationError(where + ": \"comments\" must be an array");
    for (const auto& c : comments) {
      const std::string cwhere = "topic \"" + record.id + "\" comment";
      if (!c.is_object()) throw ValidationError(cwhere + ": must be an object");
      CommentRecord cr;
      cr.id = require_string(c, "id", cwhere);
      cr.text = require_string(c, "text", cwhere + " \"" + cr.id + "\"");
      const auto& rc = require_field(c, "reply_count", cwhere + " \"" + cr.id + "\"");
      if (!rc.is_number_integer() || (rc.is_number_integer() && !rc.is_number_unsigned() && rc.get<std::int64_t>() < 0)) {
        throw ValidationError("comment \"" + cr.id + "\": reply_count must be a non-negative integer");
      }
      cr.reply_count = rc.get<std::uint64_t>();
      if (auto it = c.find("topic_id"); it != c.end()) {
        const auto ref = it->is_string() ? it->get<std::string>() : std::string();
        if (!topic_ids.contains(ref)) {
          throw ValidationError("comment \"" + cr.id + "\" references unknown topic \"" + ref + "\"");
        }
        if (ref != record.id) {
          throw ValidationError("comment \"" + cr.id + "\" declares topic \"" + ref +
                                "\" but is nested under \"" + record.id + "\"");
        }
      }
      record.comments.push_back(std::move(cr));
    }
    records.push_back(std::move(record));
  }
  return Corpus(std::move(records), config);
}

Corpus load_corpus(const std::filesystem::path& path, const TokenizerConfig& config) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParameterError("cannot read corpus file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_corpus(buf.str(), config);
}

std::string corpus_to_json(const Corpus& corpus) {
  json topics = json::array();
  for (const auto& t : corpus.topics()) {
    json comments = json::array();
    for (const auto& id : t.comment_ids) {
      const auto& c = corpus.comment(id);
      comments.push_back({{"id", c.id}, {"text", c.text}, {"reply_count", c.reply_count}});
    }
    topics.push_back({{"id", t.id}, {"question", t.question}, {"comments", std::move(comments)}});
  }
  return json{{"topics", std::move(topics)}}.dump(2) + "\n";
}

}  // namespace forumdiv
