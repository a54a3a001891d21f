#ifndef CSO_KLINK_H_
#define CSO_KLINK_H_

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "cso/corpus.h"
#include "cso/ontology.h"

namespace cso {

enum class DirectionRule { kConjunction, kMajority };

struct KlinkConfig {
  long long min_cooccurrence = 5;
  double gamma = 2.0;
  double hierarchy_threshold = 0.1;
  double equivalence_threshold = 0.97;
  double string_similarity_floor = 0.1;
  int max_iterations = 10;
  DirectionRule direction_rule = DirectionRule::kConjunction;
  double generic_doc_fraction = 0.25;
  double generic_entropy_percentile = 0.95;
  double split_min_component_mass = 0.3;

  // Throws InputError when a field is out of range.
  void Check() const;

  // Reads "key = value" text; unknown keys are rejected, missing keys keep
  // their defaults.
  static KlinkConfig Parse(std::string_view text);
  std::vector<std::pair<std::string, std::string>> Entries() const;
};

// Cosine between two context vectors after removing each owner from the
// other's vector. 0 when either side is all-zero.
double CosineContextSimilarity(const ContextVector &vx, const ContextVector &vy);

// max(floor, 1 - lev(x, y) / max(|x|, |y|)).
double NameSimilarity(std::string_view x, std::string_view y, double floor);

// (I(x,y)/I(x,x) - I(y,x)/I(y,y)) * c(x,y) * n(x,y). Positive when y is the
// broader keyword. Throws NotFoundError for unknown keywords.
double HierarchicalMetric(const CooccurrenceIndex &index, std::string_view x,
                          std::string_view y, double name_floor = 0.1);

// HierarchicalMetric with each yearly count weighted by
// (year - debut + 1)^-gamma, using debut(x) for x's ratio and debut(y) for
// y's.
double TemporalMetric(const CooccurrenceIndex &index, std::string_view x,
                      std::string_view y, double gamma, double name_floor = 0.1);

// c / (max(c_super, c_sib) + 1).
double SimilarityMetric(double cxy, double c_super, double c_sib);

struct PairMetrics {
  std::string x;
  std::string y;
  double h = 0;
  double t = 0;
  double s = 0;
  long long support = 0;
};

enum class EdgeKind { kSuperTopicOf, kContributesTo, kRelatedEquivalent };

std::string_view EdgeKindName(EdgeKind kind);

struct Edge {
  std::string source;
  std::string target;
  EdgeKind kind = EdgeKind::kSuperTopicOf;
  double weight = 0;
};

// Decides the relation suggested by one pair's metrics:
//  - relatedEquivalent when s >= equivalence_threshold;
//  - otherwise, when max(|h|, |t|) >= hierarchy_threshold, a hierarchical
//    edge whose parent p is the keyword the subsumption evidence marks as
//    broader (h(c, p) > 0). It is superTopicOf(p -> c) when p debuted no
//    later, occurs at least as often and t(c, p) > 0 (all three, or two of
//    three under the majority rule), else contributesTo(c -> p);
//  - otherwise nothing.
std::optional<Edge> InferRelationship(const PairMetrics &m,
                                      const CooccurrenceIndex &index,
                                      const KlinkConfig &cfg);

// Working graph of inferred relations. relatedEquivalent edges are stored in
// both directions; self edges are dropped; a repeated edge keeps the larger
// weight.
class TopicGraph {
 public:
  void AddNode(std::string_view node);
  void AddEdge(const Edge &edge);
  bool RemoveEdge(std::string_view source, std::string_view target,
                  EdgeKind kind);
  bool HasEdge(std::string_view source, std::string_view target,
               EdgeKind kind) const;
  std::optional<double> Weight(std::string_view source,
                               std::string_view target, EdgeKind kind) const;

  const std::set<std::string, std::less<>> &nodes() const { return nodes_; }
  // Edges sorted by (source, target, kind).
  std::vector<Edge> Edges() const;
  std::vector<Edge> Edges(EdgeKind kind) const;
  size_t edge_count() const { return edges_.size(); }

  // Members merged into each representative (the representative included).
  // Nodes that never merged have no entry.
  const std::map<std::string, std::set<std::string>> &clusters() const {
    return clusters_;
  }
  std::map<std::string, std::set<std::string>> &mutable_clusters() {
    return clusters_;
  }

 private:
  using Key = std::tuple<std::string, std::string, EdgeKind>;
  std::set<std::string, std::less<>> nodes_;
  std::map<Key, double> edges_;
  std::map<std::string, std::set<std::string>> clusters_;
};

// Repeatedly finds a directed superTopicOf cycle and deletes its
// minimum-weight edge (ties: smallest (source, target)) until none remains.
// Other edge kinds are untouched.
TopicGraph RemoveCycles(TopicGraph g);

// True when the superTopicOf subgraph admits a topological order.
bool IsSuperTopicAcyclic(const TopicGraph &g);

// Collapses relatedEquivalent clusters (union-find) into one node each. The
// representative is the member with the highest count (ties: smallest
// keyword); hierarchical edges are re-attached to representatives and the
// member sets are recorded in clusters().
TopicGraph MergeEquivalents(const TopicGraph &g, const CooccurrenceIndex &index);
TopicGraph MergeEquivalents(const TopicGraph &g,
                            const std::map<std::string, long long> &counts);

// One sense of a keyword: the context keywords of a connected component of
// its context graph.
struct Sense {
  std::string label;
  std::set<std::string> context;
  double mass = 0;
};

// Builds the graph over x's context keywords with an edge wherever the
// cosine of their self-inclusive context vectors (x removed) is >= 0.1, and
// returns one sense per component holding at least split_min_component_mass
// of x's co-occurrence mass. Fewer than two such components means x is not
// ambiguous and the result is empty. Throws NotFoundError for unknown x.
std::vector<Sense> AnalyzeSenses(const CooccurrenceIndex &index,
                                 std::string_view x, const KlinkConfig &cfg);

// Sense labels "x (top-context-term)", or {x} when x is not ambiguous.
std::vector<std::string> SplitAmbiguous(const CooccurrenceIndex &index,
                                        std::string_view x,
                                        const KlinkConfig &cfg);

// Replaces x in every record that contains it by one of its senses: the sense
// sharing the most keywords with the record, ties and records without
// overlap going to the heaviest sense.
void RepartitionRecords(std::vector<KeywordSet> &records, std::string_view x,
                        const std::vector<Sense> &senses);

// Normalized Shannon entropy of a context vector (entropy / ln(support));
// 0 for fewer than two context keywords.
double ContextEntropy(const ContextVector &v);

// Keywords kept after dropping stoplist members and keywords that appear in
// more than generic_doc_fraction of documents while their context entropy
// exceeds the generic_entropy_percentile of the vocabulary.
std::set<std::string> FilterGeneric(const CooccurrenceIndex &index,
                                    const KlinkConfig &cfg,
                                    const std::set<std::string> &stoplist);

// Computes metrics for every candidate pair. `taxonomy` is the previous
// iteration's graph (empty on the first) and feeds the similarity metric.
std::vector<PairMetrics> ComputePairMetrics(const CooccurrenceIndex &index,
                                            const KlinkConfig &cfg,
                                            const TopicGraph &taxonomy,
                                            int workers = 1);

struct KlinkOptions {
  int workers = 1;
  std::string ns = std::string(kDefaultNamespace);
};

struct KlinkResult {
  Ontology ontology;
  TopicGraph graph;
  int iterations = 0;
  std::set<std::string> filtered;
};

// Iterates filtering, metric computation, inference, cycle removal,
// equivalence merging and sense splitting until no merge or split happens or
// max_iterations is reached. Throws InputError("empty corpus") on an empty
// index.
KlinkResult Run(const CooccurrenceIndex &index, const KlinkConfig &cfg,
                const std::set<std::string> &stoplist,
                const KlinkOptions &options = {});

}  // namespace cso

#endif  // CSO_KLINK_H_
