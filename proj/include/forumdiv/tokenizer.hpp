#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace forumdiv {

struct TokenizerConfig {
  std::set<std::string> stopwords;
  std::size_t min_token_length = 2;  // in code points
  bool lowercase = true;
};

/// Lowercases, splits on maximal runs of non-alphanumeric code points, then
/// drops short tokens and stopwords. Input is UTF-8; invalid bytes act as
/// separators.
std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& config);

/// One token per line, `#` starts a comment, blank lines ignored. Entries are
/// lowercased with the tokenizer's case folding.
std::set<std::string> load_stopwords(const std::filesystem::path& path);
std::set<std::string> parse_stopwords(std::string_view contents);

/// The English list shipped in data/stopwords.txt, compiled in.
const std::set<std::string>& default_stopwords();

}  // namespace forumdiv
