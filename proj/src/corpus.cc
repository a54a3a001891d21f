#include "cso/corpus.h"

#include <algorithm>
#include <set>

#include "cso/config.h"
#include "cso/text.h"
#include "json.hpp"

namespace cso {

namespace {

using nlohmann::json;

constexpr int kMinYear = 1900;

[[noreturn]] void RecordError(size_t index, const std::string &what) {
  throw InputError("record " + std::to_string(index) + ": " + what);
}

std::string RequireString(const json &obj, const char *field, size_t index) {
  auto it = obj.find(field);
  if (it == obj.end()) RecordError(index, std::string("missing field: ") + field);
  if (!it->is_string()) {
    RecordError(index, std::string("field '") + field + "' must be a string");
  }
  return it->get<std::string>();
}

std::pair<std::string, std::string> PairKey(std::string_view x,
                                            std::string_view y) {
  if (y < x) std::swap(x, y);
  return {std::string(x), std::string(y)};
}

const YearCounts &EmptyYearCounts() {
  static const YearCounts empty;
  return empty;
}

}  // namespace

Document ParseDocument(std::string_view line, size_t record_index) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error &e) {
    RecordError(record_index, std::string("malformed record: ") + e.what());
  }
  if (!obj.is_object()) RecordError(record_index, "record is not an object");

  Document doc;
  doc.id = RequireString(obj, "id", record_index);
  if (doc.id.empty()) RecordError(record_index, "field 'id' is empty");
  doc.title = RequireString(obj, "title", record_index);
  if (auto it = obj.find("abstract"); it != obj.end() && !it->is_null()) {
    if (!it->is_string()) {
      RecordError(record_index, "field 'abstract' must be a string");
    }
    doc.abstract = it->get<std::string>();
  }

  auto kw = obj.find("keywords");
  if (kw == obj.end()) RecordError(record_index, "missing field: keywords");
  if (!kw->is_array()) {
    RecordError(record_index, "field 'keywords' must be an array");
  }
  for (const json &k : *kw) {
    if (!k.is_string()) {
      RecordError(record_index, "field 'keywords' must hold strings");
    }
    doc.keywords.push_back(k.get<std::string>());
  }

  auto year = obj.find("year");
  if (year == obj.end()) RecordError(record_index, "missing field: year");
  if (!year->is_number_integer()) {
    RecordError(record_index, "field 'year' must be an integer");
  }
  long long y = year->get<long long>();
  if (y < kMinYear || y > 9999) {
    RecordError(record_index, "field 'year' out of range: " + std::to_string(y));
  }
  doc.year = static_cast<int>(y);
  return doc;
}

std::vector<Document> ParseCorpus(std::string_view text) {
  std::vector<Document> docs;
  std::set<std::string> ids;
  size_t index = 0;
  for (const std::string &line : SplitLines(text)) {
    ++index;
    if (Trim(line).empty()) continue;
    Document doc = ParseDocument(line, index);
    if (!ids.insert(doc.id).second) {
      RecordError(index, "duplicate id '" + doc.id + "'");
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::string FormatDocument(const Document &doc) {
  json obj;
  obj["id"] = doc.id;
  obj["title"] = doc.title;
  obj["abstract"] = doc.abstract;
  obj["keywords"] = doc.keywords;
  obj["year"] = doc.year;
  return obj.dump();
}

std::optional<std::string> NormalizeKeyword(std::string_view raw) {
  std::string out;
  bool pending_space = false;
  for (char c : AsciiLower(raw)) {
    bool space = c == ' ' || c == '\t' || c == '\n' || c == '\r' ||
                 c == '\f' || c == '\v' || c == '-';
    if (space) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  if (out.empty()) return std::nullopt;
  return out;
}

KeywordSet ToKeywordSet(const Document &doc) {
  KeywordSet set;
  set.year = doc.year;
  for (const std::string &raw : doc.keywords) {
    if (auto k = NormalizeKeyword(raw)) set.keywords.push_back(std::move(*k));
  }
  std::sort(set.keywords.begin(), set.keywords.end());
  set.keywords.erase(std::unique(set.keywords.begin(), set.keywords.end()),
                     set.keywords.end());
  return set;
}

CooccurrenceIndex CooccurrenceIndex::Build(std::span<const Document> documents) {
  CooccurrenceIndex index;
  for (const Document &doc : documents) index.Add(ToKeywordSet(doc));
  return index;
}

CooccurrenceIndex CooccurrenceIndex::FromKeywordSets(
    std::span<const KeywordSet> sets) {
  CooccurrenceIndex index;
  for (const KeywordSet &set : sets) index.Add(set);
  return index;
}

void CooccurrenceIndex::Add(const KeywordSet &set) {
  ++doc_count_;
  std::vector<std::string> kws = set.keywords;
  std::sort(kws.begin(), kws.end());
  kws.erase(std::unique(kws.begin(), kws.end()), kws.end());
  records_.push_back({set.year, kws});
  for (const std::string &k : kws) {
    auto [it, inserted] = keywords_.try_emplace(k);
    KeywordStats &stats = it->second;
    if (inserted || set.year < stats.debut) stats.debut = set.year;
    ++stats.total;
    ++stats.by_year[set.year];
  }
  for (size_t i = 0; i < kws.size(); ++i) {
    for (size_t j = i + 1; j < kws.size(); ++j) {
      ++pairs_[{kws[i], kws[j]}][set.year];
      ++keywords_.find(kws[i])->second.neighbors[kws[j]];
      ++keywords_.find(kws[j])->second.neighbors[kws[i]];
    }
  }
}

void CooccurrenceIndex::Merge(const CooccurrenceIndex &other) {
  doc_count_ += other.doc_count_;
  for (const auto &[k, theirs] : other.keywords_) {
    auto [it, inserted] = keywords_.try_emplace(k);
    KeywordStats &mine = it->second;
    if (inserted || theirs.debut < mine.debut) mine.debut = theirs.debut;
    mine.total += theirs.total;
    for (const auto &[year, n] : theirs.by_year) mine.by_year[year] += n;
    for (const auto &[nb, n] : theirs.neighbors) mine.neighbors[nb] += n;
  }
  for (const auto &[key, years] : other.pairs_) {
    YearCounts &mine = pairs_[key];
    for (const auto &[year, n] : years) mine[year] += n;
  }
  records_.insert(records_.end(), other.records_.begin(), other.records_.end());
}

bool CooccurrenceIndex::operator==(const CooccurrenceIndex &other) const {
  if (doc_count_ != other.doc_count_ || keywords_ != other.keywords_ ||
      pairs_ != other.pairs_) {
    return false;
  }
  std::vector<KeywordSet> mine = records_, theirs = other.records_;
  std::sort(mine.begin(), mine.end());
  std::sort(theirs.begin(), theirs.end());
  return mine == theirs;
}

bool CooccurrenceIndex::Contains(std::string_view keyword) const {
  return keywords_.find(keyword) != keywords_.end();
}

std::vector<std::string> CooccurrenceIndex::Vocabulary() const {
  std::vector<std::string> out;
  out.reserve(keywords_.size());
  for (const auto &entry : keywords_) out.push_back(entry.first);
  return out;
}

const CooccurrenceIndex::KeywordStats &CooccurrenceIndex::Stats(
    std::string_view keyword) const {
  auto it = keywords_.find(keyword);
  if (it == keywords_.end()) {
    throw NotFoundError("keyword not in vocabulary: " + std::string(keyword));
  }
  return it->second;
}

long long CooccurrenceIndex::Occurrence(std::string_view keyword) const {
  auto it = keywords_.find(keyword);
  return it == keywords_.end() ? 0 : it->second.total;
}

const YearCounts &CooccurrenceIndex::OccurrenceByYear(
    std::string_view keyword) const {
  return Stats(keyword).by_year;
}

int CooccurrenceIndex::Debut(std::string_view keyword) const {
  return Stats(keyword).debut;
}

long long CooccurrenceIndex::PairCount(std::string_view x,
                                       std::string_view y) const {
  if (x == y) return Occurrence(x);
  auto it = keywords_.find(x);
  if (it == keywords_.end()) return 0;
  auto nb = it->second.neighbors.find(y);
  return nb == it->second.neighbors.end() ? 0 : nb->second;
}

const YearCounts &CooccurrenceIndex::PairByYear(std::string_view x,
                                                std::string_view y) const {
  if (x == y) {
    auto it = keywords_.find(x);
    return it == keywords_.end() ? EmptyYearCounts() : it->second.by_year;
  }
  auto it = pairs_.find(PairKey(x, y));
  return it == pairs_.end() ? EmptyYearCounts() : it->second;
}

std::vector<std::pair<std::string, std::string>>
CooccurrenceIndex::CandidatePairs(long long min_cooccurrence) const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto &[x, stats] : keywords_) {
    // Each pair is visited once, from its lexicographically smaller member.
    for (auto it = stats.neighbors.upper_bound(x); it != stats.neighbors.end();
         ++it) {
      if (it->second >= min_cooccurrence) out.emplace_back(x, it->first);
    }
  }
  return out;
}

ContextVector CooccurrenceIndex::Context(std::string_view keyword) const {
  const KeywordStats &stats = Stats(keyword);
  ContextVector v;
  v.owner = std::string(keyword);
  for (const auto &[nb, n] : stats.neighbors) {
    if (n > 0) v.weights.emplace(nb, static_cast<double>(n));
  }
  return v;
}

long long CooccurrenceIndex::ContextMass(std::string_view keyword) const {
  long long mass = 0;
  for (const auto &entry : Stats(keyword).neighbors) mass += entry.second;
  return mass;
}

}  // namespace cso
