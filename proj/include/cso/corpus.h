#ifndef CSO_CORPUS_H_
#define CSO_CORPUS_H_

#include <compare>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cso/error.h"

namespace cso {

// One publication's metadata.
struct Document {
  std::string id;
  std::string title;
  std::string abstract;
  std::vector<std::string> keywords;
  int year = 0;

  bool operator==(const Document &) const = default;
};

// Parses one corpus record: a JSON object with fields "id", "title",
// "abstract" (optional), "keywords" and "year". `record_index` is only used
// for error messages.
Document ParseDocument(std::string_view line, size_t record_index = 0);

// Parses line-delimited records, skipping blank lines. Ids must be unique.
std::vector<Document> ParseCorpus(std::string_view text);

// Renders a document in the record format accepted by ParseDocument.
std::string FormatDocument(const Document &doc);

// Lowercases, maps hyphens to spaces, collapses whitespace runs and trims.
// Returns nullopt for a keyword that is empty after normalization.
std::optional<std::string> NormalizeKeyword(std::string_view raw);

// Normalized, de-duplicated keywords of one document, sorted.
struct KeywordSet {
  int year = 0;
  std::vector<std::string> keywords;

  auto operator<=>(const KeywordSet &) const = default;
  bool operator==(const KeywordSet &) const = default;
};

KeywordSet ToKeywordSet(const Document &doc);

using YearCounts = std::map<int, long long>;

// Keywords co-occurring with `owner`, weighted by co-occurrence count.
struct ContextVector {
  std::string owner;
  std::map<std::string, double> weights;
};

// Document-level keyword statistics: occurrence and pair counts broken down
// by year, plus debut years. Counts are numbers of documents.
class CooccurrenceIndex {
 public:
  CooccurrenceIndex() = default;

  static CooccurrenceIndex Build(std::span<const Document> documents);
  static CooccurrenceIndex FromKeywordSets(std::span<const KeywordSet> sets);

  // Adds one document. Keywords must already be normalized; duplicates are
  // counted once.
  void Add(const KeywordSet &set);

  // Sums counts and takes the minimum of debuts. Associative and commutative.
  void Merge(const CooccurrenceIndex &other);

  long long doc_count() const { return doc_count_; }
  bool empty() const { return keywords_.empty(); }
  size_t vocabulary_size() const { return keywords_.size(); }
  bool Contains(std::string_view keyword) const;

  // Sorted vocabulary.
  std::vector<std::string> Vocabulary() const;

  // Number of documents containing `keyword`; 0 when absent.
  long long Occurrence(std::string_view keyword) const;
  // Throws NotFoundError when absent.
  const YearCounts &OccurrenceByYear(std::string_view keyword) const;
  int Debut(std::string_view keyword) const;

  // Number of documents containing both keywords. PairCount(x, x) equals
  // Occurrence(x).
  long long PairCount(std::string_view x, std::string_view y) const;
  // Per-year co-occurrence; empty when the pair never co-occurs.
  const YearCounts &PairByYear(std::string_view x, std::string_view y) const;

  // Unordered pairs (lexicographically smaller first) with total
  // co-occurrence >= min_cooccurrence, sorted.
  std::vector<std::pair<std::string, std::string>> CandidatePairs(
      long long min_cooccurrence) const;

  // Co-occurrence weights of `keyword` with every other keyword. Throws
  // NotFoundError for an unknown keyword.
  ContextVector Context(std::string_view keyword) const;

  // Total co-occurrence mass of `keyword` with all other keywords.
  long long ContextMass(std::string_view keyword) const;

  // Per-document keyword sets in insertion order; Klink rewrites these when
  // it merges or splits keywords.
  const std::vector<KeywordSet> &records() const { return records_; }

  // Equal counts and equal multisets of records.
  bool operator==(const CooccurrenceIndex &other) const;

 private:
  struct KeywordStats {
    long long total = 0;
    int debut = 0;
    YearCounts by_year;
    // Total co-occurrence with each other keyword.
    std::map<std::string, long long, std::less<>> neighbors;

    bool operator==(const KeywordStats &) const = default;
  };

  const KeywordStats &Stats(std::string_view keyword) const;

  long long doc_count_ = 0;
  std::map<std::string, KeywordStats, std::less<>> keywords_;
  std::map<std::pair<std::string, std::string>, YearCounts> pairs_;
  std::vector<KeywordSet> records_;
};

}  // namespace cso

#endif  // CSO_CORPUS_H_
