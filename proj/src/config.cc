#include "cso/config.h"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "cso/text.h"

namespace cso {

std::vector<KeyValue> ParseKeyValues(std::string_view text) {
  std::vector<KeyValue> out;
  std::set<std::string> seen;
  int line_no = 0;
  for (const std::string &raw : SplitLines(text)) {
    ++line_no;
    std::string_view line = Trim(raw);
    if (line.empty() || line.front() == '#') continue;
    size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw InputError("line " + std::to_string(line_no) +
                       ": expected 'key = value'");
    }
    KeyValue kv;
    kv.key = std::string(Trim(line.substr(0, eq)));
    kv.value = std::string(Trim(line.substr(eq + 1)));
    kv.line = line_no;
    if (kv.key.empty()) {
      throw InputError("line " + std::to_string(line_no) + ": empty key");
    }
    if (!seen.insert(kv.key).second) {
      throw InputError("line " + std::to_string(line_no) +
                       ": duplicate key '" + kv.key + "'");
    }
    out.push_back(std::move(kv));
  }
  return out;
}

std::string FormatKeyValues(
    const std::vector<std::pair<std::string, std::string>> &entries) {
  std::string out;
  for (const auto &[key, value] : entries) {
    out += key;
    out += " = ";
    out += value;
    out += '\n';
  }
  return out;
}

double ParseDouble(const KeyValue &kv) {
  double value = 0;
  const char *begin = kv.value.data();
  const char *end = begin + kv.value.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw InputError("line " + std::to_string(kv.line) + ": '" + kv.key +
                     "' expects a number, got '" + kv.value + "'");
  }
  return value;
}

long long ParseInteger(const KeyValue &kv) {
  long long value = 0;
  const char *begin = kv.value.data();
  const char *end = begin + kv.value.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw InputError("line " + std::to_string(kv.line) + ": '" + kv.key +
                     "' expects an integer, got '" + kv.value + "'");
  }
  return value;
}

std::string ReadFile(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteFile(const std::filesystem::path &path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw InputError("write failed: " + path.string());
}

std::vector<std::string> SplitLines(std::string_view text) {
  std::vector<std::string> lines = Split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  for (std::string &line : lines) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
  }
  return lines;
}

std::string FormatDouble(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

}  // namespace cso
