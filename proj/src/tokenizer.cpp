#include "forumdiv/tokenizer.hpp"

#include <fstream>
#include <sstream>

#include "forumdiv/error.hpp"
#include "stopwords_data.hpp"

namespace forumdiv {
namespace {

constexpr char32_t kInvalid = 0xFFFD;

// Decodes one UTF-8 sequence at `pos`, advancing it. Malformed or overlong
// sequences yield U+FFFD and consume a single byte.
char32_t decode_utf8(std::string_view s, std::size_t& pos) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  if (b0 < 0x80) {
    ++pos;
    return b0;
  }
  int len = 0;
  char32_t cp = 0;
  char32_t min = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2, cp = b0 & 0x1F, min = 0x80;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3, cp = b0 & 0x0F, min = 0x800;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4, cp = b0 & 0x07, min = 0x10000;
  } else {
    ++pos;
    return kInvalid;
  }
  if (pos + len > s.size()) {
    ++pos;
    return kInvalid;
  }
  for (int i = 1; i < len; ++i) {
    const auto b = static_cast<unsigned char>(s[pos + i]);
    if ((b & 0xC0) != 0x80) {
      ++pos;
      return kInvalid;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
    ++pos;
    return kInvalid;
  }
  pos += len;
  return cp;
}

void encode_utf8(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool in(char32_t c, char32_t lo, char32_t hi) { return c >= lo && c <= hi; }

// Letters, digits and combining marks count as word characters. Outside ASCII
// this is a block-level approximation: punctuation, symbol and emoji blocks
// separate words, everything else is treated as part of a word.
bool is_word_char(char32_t c) {
  if (c < 0x80) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
  }
  if (in(c, 0x80, 0xBF)) return c == 0xAA || c == 0xB5 || c == 0xBA;
  if (c == 0xD7 || c == 0xF7) return false;
  if (in(c, 0x2000, 0x2BFF) || in(c, 0x3000, 0x303F) || in(c, 0xE000, 0xF8FF) ||
      in(c, 0xFE10, 0xFE1F) || in(c, 0xFE30, 0xFE4F) || in(c, 0xFF00, 0xFF0F) ||
      in(c, 0xFF1A, 0xFF20) || in(c, 0xFF3B, 0xFF40) || in(c, 0xFF5B, 0xFF65) ||
      in(c, 0xFFF0, 0xFFFF) || in(c, 0x1F000, 0x1FAFF)) {
    return false;
  }
  return true;
}

// Simple (one-to-one) lowercase mapping for Latin, Greek, Cyrillic, Armenian
// and fullwidth Latin. Idempotent: no target is itself remapped.
char32_t to_lower(char32_t c) {
  if (c < 0x80) return (c >= 'A' && c <= 'Z') ? c + 0x20 : c;
  if (in(c, 0xC0, 0xDE) && c != 0xD7) return c + 0x20;
  if (in(c, 0x100, 0x12F) || in(c, 0x132, 0x137) || in(c, 0x14A, 0x177)) {
    return (c % 2 == 0) ? c + 1 : c;
  }
  if (c == 0x130) return U'i';
  if (in(c, 0x139, 0x148) || in(c, 0x179, 0x17E)) return (c % 2 == 1) ? c + 1 : c;
  if (c == 0x178) return 0xFF;
  if (in(c, 0x391, 0x3A9) && c != 0x3A2) return c + 0x20;
  if (c == 0x386) return 0x3AC;
  if (in(c, 0x388, 0x38A)) return c + 0x25;
  if (c == 0x38C) return 0x3CC;
  if (in(c, 0x38E, 0x38F)) return c + 0x3F;
  if (in(c, 0x400, 0x40F)) return c + 0x50;
  if (in(c, 0x410, 0x42F)) return c + 0x20;
  if (in(c, 0x460, 0x481) || in(c, 0x48A, 0x4BF)) return (c % 2 == 0) ? c + 1 : c;
  if (in(c, 0x531, 0x556)) return c + 0x30;
  if (in(c, 0x1E00, 0x1E95) || in(c, 0x1EA0, 0x1EFF)) return (c % 2 == 0) ? c + 1 : c;
  if (c == 0x1E9E) return 0xDF;
  if (in(c, 0xFF21, 0xFF3A)) return c + 0x20;
  return c;
}

std::string lowercase_utf8(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t pos = 0;
  while (pos < s.size()) encode_utf8(to_lower(decode_utf8(s, pos)), out);
  return out;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& config) {
  std::vector<std::string> tokens;
  std::string current;
  std::size_t current_len = 0;
  auto flush = [&] {
    if (current_len >= config.min_token_length && !config.stopwords.contains(current)) {
      tokens.push_back(current);
    }
    current.clear();
    current_len = 0;
  };
  std::size_t pos = 0;
  while (pos < text.size()) {
    char32_t cp = decode_utf8(text, pos);
    if (!is_word_char(cp)) {
      if (current_len > 0) flush();
      continue;
    }
    if (config.lowercase) cp = to_lower(cp);
    encode_utf8(cp, current);
    ++current_len;
  }
  if (current_len > 0) flush();
  return tokens;
}

std::set<std::string> parse_stopwords(std::string_view contents) {
  std::set<std::string> words;
  std::istringstream in{std::string(contents)};
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r\n");
    words.insert(lowercase_utf8(std::string_view(line).substr(first, last - first + 1)));
  }
  return words;
}

std::set<std::string> load_stopwords(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParameterError("cannot read stopword file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_stopwords(buf.str());
}

const std::set<std::string>& default_stopwords() {
  static const std::set<std::string> words = parse_stopwords(kDefaultStopwords);
  return words;
}

}  // namespace forumdiv
