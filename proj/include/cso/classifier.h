#ifndef CSO_CLASSIFIER_H_
#define CSO_CLASSIFIER_H_

#include <functional>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cso/corpus.h"
#include "cso/embeddings.h"
#include "cso/ontology.h"

namespace cso {

struct ClassifierConfig {
  double syntactic_threshold = 0.94;
  int top_k_neighbors = 10;
  double neighbor_min_cosine = 0.7;
  int ngram_max = 3;

  void Check() const;
  static ClassifierConfig Parse(std::string_view text);
  std::vector<std::pair<std::string, std::string>> Entries() const;
};

using Ngram = std::vector<std::string>;

// Title, abstract and each keyword are tokenized into runs; stop words split
// a run further. n-grams up to max_n are taken inside each piece, all
// unigrams first, then bigrams, then trigrams. Duplicates are kept.
std::vector<Ngram> ExtractNgrams(const Document &doc, int max_n = 3);

// Topic labels of an ontology, normalized for matching, each mapped to the
// preferred topic of its cluster.
class LabelIndex {
 public:
  explicit LabelIndex(const Ontology &o);

  struct Entry {
    std::string label;  // tokens joined by single spaces
    std::string uri;
    std::string preferred;
    size_t length = 0;  // code points
  };
  const std::vector<Entry> &entries() const { return entries_; }

  // Preferred topics whose normalized label equals `label`.
  std::vector<std::string> Exact(std::string_view label) const;

 private:
  std::vector<Entry> entries_;
  std::map<std::string, std::set<std::string>, std::less<>> by_label_;
};

// Tokens joined by spaces after retokenizing; the form labels and n-grams are
// compared in.
std::string NormalizeLabel(std::string_view text);

// Preferred topics with a label whose normalized Levenshtein similarity to
// some n-gram is >= syntactic_threshold.
std::set<std::string> SyntacticClassify(const Document &doc, const LabelIndex &labels,
                                        const ClassifierConfig &cfg);
std::set<std::string> SyntacticClassify(const Document &doc, const Ontology &o,
                                        const ClassifierConfig &cfg);

enum class Tag { kNoun, kAdj, kOther };

using Tagger = std::function<Tag(std::string_view token)>;

// Stop words and common verbs are OTHER; a closed adjective list and the
// suffixes -al, -ic, -ous, -ive, -based are ADJ; everything else is NOUN.
Tag DefaultTag(std::string_view token);

// Maximal (ADJ|NOUN)* NOUN spans of one tagged run.
std::vector<Ngram> CandidateSpans(
    const std::vector<std::pair<std::string, Tag>> &tagged);

// Candidate terms of a document, tagging each token run with `tagger`.
std::vector<Ngram> ExtractCandidates(const Document &doc,
                                     const Tagger &tagger = DefaultTag);

// Every n-gram (n <= max_n) of each candidate, in order.
std::vector<Ngram> CandidateNgrams(const std::vector<Ngram> &candidates,
                                   int max_n = 3);

// One neighbour list per candidate n-gram occurrence.
struct NgramNeighbours {
  std::string ngram;  // space-joined
  std::vector<std::pair<std::string, double>> neighbours;
};

// frequency x diversity for every topic hit by the neighbour lists: a
// neighbour whose underscore-expanded form equals a label identifies its
// preferred topic once. Sorted by relevance descending, then uri.
std::vector<std::pair<std::string, double>> ScoreTopics(
    const std::vector<NgramNeighbours> &lists, const LabelIndex &labels);

// Number of leading scores to keep: the 0-based index of the point lying
// furthest below the chord from the first to the last point, in coordinates
// normalized to [0, 1]. Ties keep the larger index; flat lists and lists of
// at most two entries are kept whole.
size_t ElbowCutoff(std::span<const double> scores);

// Topics scored by the embedding neighbourhoods of candidate n-grams, cut at
// the elbow.
std::vector<std::pair<std::string, double>> SemanticClassify(
    const Document &doc, const LabelIndex &labels, const EmbeddingModel &m,
    const ClassifierConfig &cfg, const Tagger &tagger = DefaultTag);

// Topics plus all their ancestors. Throws NotFoundError for an unknown topic.
std::set<std::string> Enrich(const std::set<std::string> &topics,
                             const Ontology &o);

struct Annotation {
  std::string doc_id;
  std::set<std::string> syntactic;
  std::vector<std::pair<std::string, double>> semantic;
  std::set<std::string> union_topics;
  std::set<std::string> enhanced;

  bool operator==(const Annotation &) const = default;
};

// `model` may be null, which skips the semantic module.
Annotation Classify(const Document &doc, const Ontology &o, const LabelIndex &labels,
                    const EmbeddingModel *model, const ClassifierConfig &cfg);

// The document's record with "syntactic", "semantic" ([{topic, relevance}]),
// "union" and "enhanced" added.
std::string FormatAnnotation(const Document &doc, const Annotation &a);
// Reads the fields written by FormatAnnotation.
Annotation ParseAnnotation(std::string_view line, size_t record_index = 0);

}  // namespace cso

#endif  // CSO_CLASSIFIER_H_
