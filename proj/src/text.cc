#include "cso/text.h"

#include <algorithm>
#include <unordered_set>

namespace cso {

namespace {

// NLTK-style English stop words.
const char *const kStopWords[] = {
    "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you",
    "your", "yours", "yourself", "yourselves", "he", "him", "his", "himself",
    "she", "her", "hers", "herself", "it", "its", "itself", "they", "them",
    "their", "theirs", "themselves", "what", "which", "who", "whom", "this",
    "that", "these", "those", "am", "is", "are", "was", "were", "be", "been",
    "being", "have", "has", "had", "having", "do", "does", "did", "doing",
    "a", "an", "the", "and", "but", "if", "or", "because", "as", "until",
    "while", "of", "at", "by", "for", "with", "about", "against", "between",
    "into", "through", "during", "before", "after", "above", "below", "to",
    "from", "up", "down", "in", "out", "on", "off", "over", "under", "again",
    "further", "then", "once", "here", "there", "when", "where", "why", "how",
    "all", "any", "both", "each", "few", "more", "most", "other", "some",
    "such", "no", "nor", "not", "only", "own", "same", "so", "than", "too",
    "very", "s", "t", "can", "will", "just", "don", "should", "now", "d",
    "ll", "m", "o", "re", "ve", "y", "ain", "aren", "couldn", "didn",
    "doesn", "hadn", "hasn", "haven", "isn", "ma", "mightn", "mustn",
    "needn", "shan", "shouldn", "wasn", "weren", "won", "wouldn", "also",
    "however", "thus", "therefore", "via", "within", "without", "among",
    "upon", "whether", "yet", "may", "might", "must", "would", "could",
    "shall", "us"};

const std::unordered_set<std::string_view> &StopWords() {
  static const std::unordered_set<std::string_view> words(
      std::begin(kStopWords), std::end(kStopWords));
  return words;
}

bool IsWordByte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
         (c >= 'A' && c <= 'Z') || c == '_' || c >= 0x80;
}

bool IsTokenSeparator(unsigned char c) {
  return c == ' ' || c == '\t' || c == '-' || c == '\'';
}

}  // namespace

std::u32string DecodeUtf8(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  size_t i = 0;
  while (i < text.size()) {
    auto c = static_cast<unsigned char>(text[i]);
    size_t extra = 0;
    char32_t cp = c;
    if (c >= 0xC0 && c < 0xE0) {
      extra = 1;
      cp = c & 0x1F;
    } else if (c >= 0xE0 && c < 0xF0) {
      extra = 2;
      cp = c & 0x0F;
    } else if (c >= 0xF0 && c < 0xF8) {
      extra = 3;
      cp = c & 0x07;
    }
    bool ok = (c < 0x80 || extra > 0) && i + extra < text.size();
    for (size_t k = 1; ok && k <= extra; ++k) {
      auto cc = static_cast<unsigned char>(text[i + k]);
      if ((cc & 0xC0) != 0x80) ok = false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    if (!ok) {
      // Stray continuation byte, invalid lead or truncated sequence.
      out.push_back(c);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += extra + 1;
  }
  return out;
}

size_t Utf8Length(std::string_view text) { return DecodeUtf8(text).size(); }

size_t LevenshteinDistance(std::string_view a, std::string_view b) {
  std::u32string s = DecodeUtf8(a);
  std::u32string t = DecodeUtf8(b);
  if (s.size() < t.size()) std::swap(s, t);
  if (t.empty()) return s.size();
  std::vector<size_t> row(t.size() + 1);
  for (size_t j = 0; j <= t.size(); ++j) row[j] = j;
  for (size_t i = 1; i <= s.size(); ++i) {
    size_t diag = row[0];
    row[0] = i;
    for (size_t j = 1; j <= t.size(); ++j) {
      size_t above = row[j];
      size_t cost = s[i - 1] == t[j - 1] ? 0 : 1;
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + cost});
      diag = above;
    }
  }
  return row[t.size()];
}

double NormalizedLevenshteinSimilarity(std::string_view a, std::string_view b) {
  size_t longest = std::max(Utf8Length(a), Utf8Length(b));
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(LevenshteinDistance(a, b)) /
                   static_cast<double>(longest);
}

std::string AsciiLower(std::string_view text) {
  std::string out(text);
  for (char &c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string_view Trim(std::string_view text) {
  auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
           c == '\v';
  };
  while (!text.empty() && is_space(text.front())) text.remove_prefix(1);
  while (!text.empty() && is_space(text.back())) text.remove_suffix(1);
  return text;
}

bool IsStopWord(std::string_view token) { return StopWords().count(token) > 0; }

std::vector<std::vector<std::string>> TokenRuns(std::string_view text) {
  std::vector<std::vector<std::string>> runs;
  std::vector<std::string> run;
  std::string token;
  auto flush_token = [&] {
    if (!token.empty()) run.push_back(AsciiLower(token));
    token.clear();
  };
  auto flush_run = [&] {
    flush_token();
    if (!run.empty()) runs.push_back(std::move(run));
    run.clear();
  };
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (IsWordByte(c)) {
      token.push_back(ch);
    } else if (IsTokenSeparator(c)) {
      flush_token();
    } else {
      flush_run();
    }
  }
  flush_run();
  return runs;
}

std::vector<std::string> Tokenize(std::string_view text) {
  std::vector<std::string> out;
  for (auto &run : TokenRuns(text)) {
    for (auto &token : run) out.push_back(std::move(token));
  }
  return out;
}

std::string Join(const std::vector<std::string> &parts, std::string_view sep) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out.append(sep);
    out.append(parts[i]);
  }
  return out;
}

std::vector<std::string> Split(std::string_view text, char sep) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(text.substr(start));
      break;
    }
    out.emplace_back(text.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

}  // namespace cso
