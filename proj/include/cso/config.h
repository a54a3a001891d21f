#ifndef CSO_CONFIG_H_
#define CSO_CONFIG_H_

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cso/error.h"

namespace cso {

struct KeyValue {
  std::string key;
  std::string value;
  int line = 0;
};

// Parses flat "key = value" text. Blank lines and lines starting with '#'
// are ignored. Duplicate keys are an error.
std::vector<KeyValue> ParseKeyValues(std::string_view text);

// Renders entries as "key = value" lines in the given order.
std::string FormatKeyValues(const std::vector<std::pair<std::string, std::string>> &entries);

double ParseDouble(const KeyValue &kv);
long long ParseInteger(const KeyValue &kv);

std::string ReadFile(const std::filesystem::path &path);
void WriteFile(const std::filesystem::path &path, std::string_view contents);

// Lines of a text file with trailing '\r' stripped; the final empty line after
// a terminating newline is dropped.
std::vector<std::string> SplitLines(std::string_view text);

// Formats a double with the shortest representation that round-trips.
std::string FormatDouble(double value);

}  // namespace cso

#endif  // CSO_CONFIG_H_
