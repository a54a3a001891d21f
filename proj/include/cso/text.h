#ifndef CSO_TEXT_H_
#define CSO_TEXT_H_

#include <string>
#include <string_view>
#include <vector>

namespace cso {

// Decodes UTF-8 into code points. Invalid bytes decode to themselves so that
// distances stay defined on malformed input.
std::u32string DecodeUtf8(std::string_view text);

// Number of code points in a UTF-8 string.
size_t Utf8Length(std::string_view text);

// Edit distance (insert, delete, substitute; unit costs) over code points.
size_t LevenshteinDistance(std::string_view a, std::string_view b);

// 1 - lev(a, b) / max(|a|, |b|); 1 for two empty strings.
double NormalizedLevenshteinSimilarity(std::string_view a, std::string_view b);

// ASCII lowercase; bytes outside ASCII pass through.
std::string AsciiLower(std::string_view text);

// Trims ASCII whitespace from both ends.
std::string_view Trim(std::string_view text);

// Closed English stop-word list.
bool IsStopWord(std::string_view token);

// Splits text into contiguous runs of word tokens. Whitespace, hyphens and
// apostrophes separate tokens inside a run; any other punctuation ends the
// run. Tokens are lowercased. Word characters are ASCII alphanumerics,
// underscore, and all non-ASCII bytes.
std::vector<std::vector<std::string>> TokenRuns(std::string_view text);

// All tokens of TokenRuns() flattened in order.
std::vector<std::string> Tokenize(std::string_view text);

// Joins parts with a separator.
std::string Join(const std::vector<std::string> &parts, std::string_view sep);

// Splits on a separator character; empty pieces are kept.
std::vector<std::string> Split(std::string_view text, char sep);

}  // namespace cso

#endif  // CSO_TEXT_H_
