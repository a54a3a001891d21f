#include "cso/klink.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "cso/config.h"
#include "cso/text.h"

namespace cso {

namespace {

constexpr double kSenseEdgeCosine = 0.1;
constexpr size_t kMaxSiblings = 10;

[[noreturn]] void BadConfig(const std::string &key, const std::string &why) {
  throw InputError("config: '" + key + "' " + why);
}

double Norm(const std::map<std::string, double> &w, std::string_view skip) {
  double sum = 0;
  for (const auto &[k, v] : w) {
    if (k != skip) sum += v * v;
  }
  return std::sqrt(sum);
}

// Plain cosine of two sparse vectors.
double SparseCosine(const std::map<std::string, double> &a,
                    const std::map<std::string, double> &b) {
  double dot = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (i->first < j->first) {
      ++i;
    } else if (j->first < i->first) {
      ++j;
    } else {
      dot += i->second * j->second;
      ++i;
      ++j;
    }
  }
  double na = Norm(a, {});
  double nb = Norm(b, {});
  if (na == 0 || nb == 0) return 0;
  return std::clamp(dot / (na * nb), 0.0, 1.0);
}

double WeightedCount(const YearCounts &counts, int debut, double gamma) {
  double sum = 0;
  for (const auto &[year, n] : counts) {
    double w = std::pow(static_cast<double>(year - debut + 1), -gamma);
    sum += static_cast<double>(n) * w;
  }
  return sum;
}

void RequireKnown(const CooccurrenceIndex &index, std::string_view k) {
  if (!index.Contains(k)) {
    throw NotFoundError("keyword not in vocabulary: " + std::string(k));
  }
}

double ConditionalDifference(const CooccurrenceIndex &index, std::string_view x,
                             std::string_view y) {
  RequireKnown(index, x);
  RequireKnown(index, y);
  double ixy = static_cast<double>(index.PairCount(x, y));
  return ixy / static_cast<double>(index.Occurrence(x)) -
         ixy / static_cast<double>(index.Occurrence(y));
}

double TemporalDifference(const CooccurrenceIndex &index, std::string_view x,
                          std::string_view y, double gamma) {
  int dx = index.Debut(x);
  int dy = index.Debut(y);
  const YearCounts &pair = index.PairByYear(x, y);
  double wxy = WeightedCount(pair, dx, gamma);
  double wyx = WeightedCount(pair, dy, gamma);
  double wxx = WeightedCount(index.OccurrenceByYear(x), dx, gamma);
  double wyy = WeightedCount(index.OccurrenceByYear(y), dy, gamma);
  return wxy / wxx - wyx / wyy;
}

// Mean pairwise cosine between the context vectors of two groups; 0 when
// either group is empty.
double MeanCosine(const std::vector<const ContextVector *> &a,
                  const std::vector<const ContextVector *> &b) {
  if (a.empty() || b.empty()) return 0;
  double sum = 0;
  for (const ContextVector *u : a) {
    for (const ContextVector *v : b) sum += CosineContextSimilarity(*u, *v);
  }
  return sum / static_cast<double>(a.size() * b.size());
}

class UnionFind {
 public:
  explicit UnionFind(size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), size_t{0});
  }
  size_t Find(size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void Union(size_t a, size_t b) {
    a = Find(a);
    b = Find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<size_t> parent_;
};

// Finds one directed superTopicOf cycle, returned as its edges in order.
std::vector<std::pair<std::string, std::string>> FindCycle(
    const std::map<std::string, std::vector<std::string>> &adj) {
  std::map<std::string, int> state;  // 0 unseen, 1 on stack, 2 done
  std::vector<std::string> stack;
  std::vector<std::pair<std::string, std::string>> cycle;

  // Iterative DFS keeping an explicit child cursor per frame.
  for (const auto &entry : adj) {
    if (state[entry.first] != 0) continue;
    std::vector<std::pair<std::string, size_t>> frames{{entry.first, 0}};
    state[entry.first] = 1;
    stack.push_back(entry.first);
    while (!frames.empty()) {
      auto &[node, cursor] = frames.back();
      auto it = adj.find(node);
      if (it == adj.end() || cursor >= it->second.size()) {
        state[node] = 2;
        stack.pop_back();
        frames.pop_back();
        continue;
      }
      const std::string &next = it->second[cursor++];
      int s = state[next];
      if (s == 1) {
        auto from = std::find(stack.begin(), stack.end(), next);
        for (auto p = from; p + 1 != stack.end(); ++p) cycle.emplace_back(*p, *(p + 1));
        cycle.emplace_back(stack.back(), next);
        return cycle;
      }
      if (s == 0) {
        state[next] = 1;
        stack.push_back(next);
        frames.emplace_back(next, 0);
      }
    }
  }
  return cycle;
}

std::string TopContextTerm(const ContextVector &ctx,
                           const std::vector<std::string> &members) {
  const std::string *best = nullptr;
  double best_w = -1;
  for (const std::string &m : members) {
    double w = ctx.weights.at(m);
    if (w > best_w || (w == best_w && m < *best)) {
      best = &m;
      best_w = w;
    }
  }
  return *best;
}

}  // namespace

void KlinkConfig::Check() const {
  if (min_cooccurrence < 1) BadConfig("min_cooccurrence", "must be >= 1");
  if (!(gamma > 0)) BadConfig("gamma", "must be > 0");
  if (!(hierarchy_threshold >= 0 && hierarchy_threshold <= 1)) {
    BadConfig("hierarchy_threshold", "must be in [0, 1]");
  }
  if (!(equivalence_threshold >= 0 && equivalence_threshold <= 1)) {
    BadConfig("equivalence_threshold", "must be in [0, 1]");
  }
  if (!(string_similarity_floor >= 0 && string_similarity_floor <= 1)) {
    BadConfig("string_similarity_floor", "must be in [0, 1]");
  }
  if (max_iterations < 1) BadConfig("max_iterations", "must be >= 1");
  if (!(generic_doc_fraction >= 0 && generic_doc_fraction <= 1)) {
    BadConfig("generic_doc_fraction", "must be in [0, 1]");
  }
  if (!(generic_entropy_percentile >= 0 && generic_entropy_percentile <= 1)) {
    BadConfig("generic_entropy_percentile", "must be in [0, 1]");
  }
  if (!(split_min_component_mass > 0 && split_min_component_mass <= 1)) {
    BadConfig("split_min_component_mass", "must be in (0, 1]");
  }
}

KlinkConfig KlinkConfig::Parse(std::string_view text) {
  KlinkConfig cfg;
  for (const KeyValue &kv : ParseKeyValues(text)) {
    if (kv.key == "min_cooccurrence") {
      cfg.min_cooccurrence = ParseInteger(kv);
    } else if (kv.key == "gamma") {
      cfg.gamma = ParseDouble(kv);
    } else if (kv.key == "hierarchy_threshold") {
      cfg.hierarchy_threshold = ParseDouble(kv);
    } else if (kv.key == "equivalence_threshold") {
      cfg.equivalence_threshold = ParseDouble(kv);
    } else if (kv.key == "string_similarity_floor") {
      cfg.string_similarity_floor = ParseDouble(kv);
    } else if (kv.key == "max_iterations") {
      long long n = ParseInteger(kv);
      if (n < 1 || n > 1000000) BadConfig(kv.key, "must be in [1, 1000000]");
      cfg.max_iterations = static_cast<int>(n);
    } else if (kv.key == "direction_rule") {
      if (kv.value == "conjunction") {
        cfg.direction_rule = DirectionRule::kConjunction;
      } else if (kv.value == "majority") {
        cfg.direction_rule = DirectionRule::kMajority;
      } else {
        throw InputError("line " + std::to_string(kv.line) +
                         ": direction_rule must be conjunction or majority");
      }
    } else if (kv.key == "generic_doc_fraction") {
      cfg.generic_doc_fraction = ParseDouble(kv);
    } else if (kv.key == "generic_entropy_percentile") {
      cfg.generic_entropy_percentile = ParseDouble(kv);
    } else if (kv.key == "split_min_component_mass") {
      cfg.split_min_component_mass = ParseDouble(kv);
    } else {
      throw InputError("line " + std::to_string(kv.line) + ": unknown key '" +
                       kv.key + "'");
    }
  }
  cfg.Check();
  return cfg;
}

std::vector<std::pair<std::string, std::string>> KlinkConfig::Entries() const {
  return {
      {"min_cooccurrence", std::to_string(min_cooccurrence)},
      {"gamma", FormatDouble(gamma)},
      {"hierarchy_threshold", FormatDouble(hierarchy_threshold)},
      {"equivalence_threshold", FormatDouble(equivalence_threshold)},
      {"string_similarity_floor", FormatDouble(string_similarity_floor)},
      {"max_iterations", std::to_string(max_iterations)},
      {"direction_rule", direction_rule == DirectionRule::kConjunction
                             ? "conjunction"
                             : "majority"},
      {"generic_doc_fraction", FormatDouble(generic_doc_fraction)},
      {"generic_entropy_percentile", FormatDouble(generic_entropy_percentile)},
      {"split_min_component_mass", FormatDouble(split_min_component_mass)},
  };
}

double CosineContextSimilarity(const ContextVector &vx, const ContextVector &vy) {
  // Evaluate in a canonical order so the result is exactly symmetric.
  const ContextVector &a = vx.owner <= vy.owner ? vx : vy;
  const ContextVector &b = vx.owner <= vy.owner ? vy : vx;
  double dot = 0;
  auto i = a.weights.begin();
  auto j = b.weights.begin();
  while (i != a.weights.end() && j != b.weights.end()) {
    if (i->first < j->first) {
      ++i;
    } else if (j->first < i->first) {
      ++j;
    } else {
      if (i->first != b.owner && i->first != a.owner) {
        dot += i->second * j->second;
      }
      ++i;
      ++j;
    }
  }
  double na = Norm(a.weights, b.owner);
  double nb = Norm(b.weights, a.owner);
  if (na == 0 || nb == 0) return 0;
  return std::clamp(dot / (na * nb), 0.0, 1.0);
}

double NameSimilarity(std::string_view x, std::string_view y, double floor) {
  return std::max(floor, NormalizedLevenshteinSimilarity(x, y));
}

double HierarchicalMetric(const CooccurrenceIndex &index, std::string_view x,
                          std::string_view y, double name_floor) {
  double diff = ConditionalDifference(index, x, y);
  if (x == y) return 0;
  double c = CosineContextSimilarity(index.Context(x), index.Context(y));
  return diff * (c * NameSimilarity(x, y, name_floor));
}

double TemporalMetric(const CooccurrenceIndex &index, std::string_view x,
                      std::string_view y, double gamma, double name_floor) {
  double diff = TemporalDifference(index, x, y, gamma);
  if (x == y) return 0;
  double c = CosineContextSimilarity(index.Context(x), index.Context(y));
  return diff * (c * NameSimilarity(x, y, name_floor));
}

double SimilarityMetric(double cxy, double c_super, double c_sib) {
  return cxy / (std::max(c_super, c_sib) + 1);
}

std::string_view EdgeKindName(EdgeKind kind) {
  switch (kind) {
    case EdgeKind::kSuperTopicOf:
      return "superTopicOf";
    case EdgeKind::kContributesTo:
      return "contributesTo";
    case EdgeKind::kRelatedEquivalent:
      return "relatedEquivalent";
  }
  return "unknown";
}

std::optional<Edge> InferRelationship(const PairMetrics &m,
                                      const CooccurrenceIndex &index,
                                      const KlinkConfig &cfg) {
  if (m.x == m.y) return std::nullopt;
  if (m.s >= cfg.equivalence_threshold) {
    return Edge{m.x, m.y, EdgeKind::kRelatedEquivalent, m.s};
  }
  double weight = std::max(std::abs(m.h), std::abs(m.t));
  if (weight < cfg.hierarchy_threshold) return std::nullopt;

  // h(x, y) > 0 says y is the broader keyword. T breaks a tie in H.
  double sign = m.h != 0 ? m.h : m.t;
  if (sign == 0) return std::nullopt;
  const std::string &parent = sign > 0 ? m.y : m.x;
  const std::string &child = sign > 0 ? m.x : m.y;
  double t_child_parent = sign > 0 ? m.t : -m.t;

  int votes = 0;
  if (index.Debut(parent) <= index.Debut(child)) ++votes;
  if (index.Occurrence(parent) >= index.Occurrence(child)) ++votes;
  if (t_child_parent > 0) ++votes;
  int needed = cfg.direction_rule == DirectionRule::kConjunction ? 3 : 2;
  if (votes >= needed) return Edge{parent, child, EdgeKind::kSuperTopicOf, weight};
  return Edge{child, parent, EdgeKind::kContributesTo, weight};
}

void TopicGraph::AddNode(std::string_view node) { nodes_.emplace(node); }

void TopicGraph::AddEdge(const Edge &edge) {
  if (edge.source == edge.target) return;
  AddNode(edge.source);
  AddNode(edge.target);
  auto put = [&](const std::string &s, const std::string &t) {
    auto [it, inserted] = edges_.try_emplace(Key{s, t, edge.kind}, edge.weight);
    if (!inserted) it->second = std::max(it->second, edge.weight);
  };
  put(edge.source, edge.target);
  if (edge.kind == EdgeKind::kRelatedEquivalent) put(edge.target, edge.source);
}

bool TopicGraph::RemoveEdge(std::string_view source, std::string_view target,
                            EdgeKind kind) {
  bool removed =
      edges_.erase(Key{std::string(source), std::string(target), kind}) > 0;
  if (kind == EdgeKind::kRelatedEquivalent) {
    edges_.erase(Key{std::string(target), std::string(source), kind});
  }
  return removed;
}

bool TopicGraph::HasEdge(std::string_view source, std::string_view target,
                         EdgeKind kind) const {
  return edges_.count(Key{std::string(source), std::string(target), kind}) > 0;
}

std::optional<double> TopicGraph::Weight(std::string_view source,
                                         std::string_view target,
                                         EdgeKind kind) const {
  auto it = edges_.find(Key{std::string(source), std::string(target), kind});
  if (it == edges_.end()) return std::nullopt;
  return it->second;
}

std::vector<Edge> TopicGraph::Edges() const {
  std::vector<Edge> out;
  out.reserve(edges_.size());
  for (const auto &[key, w] : edges_) {
    out.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), w});
  }
  return out;
}

std::vector<Edge> TopicGraph::Edges(EdgeKind kind) const {
  std::vector<Edge> out;
  for (const auto &[key, w] : edges_) {
    if (std::get<2>(key) == kind) {
      out.push_back({std::get<0>(key), std::get<1>(key), kind, w});
    }
  }
  return out;
}

TopicGraph RemoveCycles(TopicGraph g) {
  while (true) {
    std::map<std::string, std::vector<std::string>> adj;
    for (const Edge &e : g.Edges(EdgeKind::kSuperTopicOf)) {
      adj[e.source].push_back(e.target);
    }
    auto cycle = FindCycle(adj);
    if (cycle.empty()) return g;
    const std::pair<std::string, std::string> *victim = nullptr;
    double victim_w = 0;
    for (const auto &e : cycle) {
      double w = *g.Weight(e.first, e.second, EdgeKind::kSuperTopicOf);
      if (victim == nullptr || w < victim_w || (w == victim_w && e < *victim)) {
        victim = &e;
        victim_w = w;
      }
    }
    g.RemoveEdge(victim->first, victim->second, EdgeKind::kSuperTopicOf);
  }
}

bool IsSuperTopicAcyclic(const TopicGraph &g) {
  std::map<std::string, int> indegree;
  std::map<std::string, std::vector<std::string>> adj;
  for (const std::string &n : g.nodes()) indegree[n] = 0;
  for (const Edge &e : g.Edges(EdgeKind::kSuperTopicOf)) {
    adj[e.source].push_back(e.target);
    ++indegree[e.target];
    indegree.try_emplace(e.source, 0);
  }
  std::vector<std::string> ready;
  for (const auto &[n, d] : indegree) {
    if (d == 0) ready.push_back(n);
  }
  size_t visited = 0;
  while (!ready.empty()) {
    std::string n = std::move(ready.back());
    ready.pop_back();
    ++visited;
    for (const std::string &t : adj[n]) {
      if (--indegree[t] == 0) ready.push_back(t);
    }
  }
  return visited == indegree.size();
}

TopicGraph MergeEquivalents(const TopicGraph &g, const CooccurrenceIndex &index) {
  std::map<std::string, long long> counts;
  for (const std::string &n : g.nodes()) counts[n] = index.Occurrence(n);
  return MergeEquivalents(g, counts);
}

TopicGraph MergeEquivalents(const TopicGraph &g,
                            const std::map<std::string, long long> &counts) {
  std::vector<std::string> nodes(g.nodes().begin(), g.nodes().end());
  std::map<std::string, size_t> id;
  for (size_t i = 0; i < nodes.size(); ++i) id[nodes[i]] = i;
  UnionFind uf(nodes.size());
  for (const Edge &e : g.Edges(EdgeKind::kRelatedEquivalent)) {
    uf.Union(id.at(e.source), id.at(e.target));
  }

  auto count_of = [&](const std::string &n) -> long long {
    auto it = counts.find(n);
    return it == counts.end() ? 0 : it->second;
  };
  std::map<size_t, std::vector<std::string>> groups;
  for (size_t i = 0; i < nodes.size(); ++i) groups[uf.Find(i)].push_back(nodes[i]);

  std::map<std::string, std::string> rep_of;
  TopicGraph out;
  out.mutable_clusters() = g.clusters();
  for (const auto &[root, members] : groups) {
    // Members are sorted, so a strict comparison keeps the smaller keyword.
    const std::string *rep = &members.front();
    for (const std::string &m : members) {
      if (count_of(m) > count_of(*rep)) rep = &m;
    }
    for (const std::string &m : members) rep_of[m] = *rep;
    out.AddNode(*rep);
    if (members.size() < 2) continue;
    std::set<std::string> merged;
    for (const std::string &m : members) {
      auto it = out.mutable_clusters().find(m);
      if (it != out.mutable_clusters().end()) {
        merged.insert(it->second.begin(), it->second.end());
        out.mutable_clusters().erase(it);
      } else {
        merged.insert(m);
      }
    }
    out.mutable_clusters()[*rep] = std::move(merged);
  }
  for (const Edge &e : g.Edges()) {
    if (e.kind == EdgeKind::kRelatedEquivalent) continue;
    out.AddEdge({rep_of.at(e.source), rep_of.at(e.target), e.kind, e.weight});
  }
  return out;
}

std::vector<Sense> AnalyzeSenses(const CooccurrenceIndex &index,
                                 std::string_view x, const KlinkConfig &cfg) {
  ContextVector ctx = index.Context(x);
  std::vector<std::string> members;
  double total = 0;
  for (const auto &[k, w] : ctx.weights) {
    members.push_back(k);
    total += w;
  }
  if (members.size() < 2 || total == 0) return {};

  // Self-inclusive context of each member with x removed.
  std::vector<std::map<std::string, double>> vecs;
  std::map<std::string, std::vector<size_t>> postings;
  for (size_t i = 0; i < members.size(); ++i) {
    std::map<std::string, double> v = index.Context(members[i]).weights;
    v.erase(std::string(x));
    v[members[i]] = static_cast<double>(index.Occurrence(members[i]));
    for (const auto &entry : v) postings[entry.first].push_back(i);
    vecs.push_back(std::move(v));
  }

  UnionFind uf(members.size());
  std::set<std::pair<size_t, size_t>> tried;
  for (const auto &[dim, list] : postings) {
    for (size_t a = 0; a < list.size(); ++a) {
      for (size_t b = a + 1; b < list.size(); ++b) {
        size_t i = list[a], j = list[b];
        if (uf.Find(i) == uf.Find(j)) continue;
        if (!tried.emplace(i, j).second) continue;
        if (SparseCosine(vecs[i], vecs[j]) >= kSenseEdgeCosine) uf.Union(i, j);
      }
    }
  }

  std::map<size_t, std::vector<std::string>> comps;
  for (size_t i = 0; i < members.size(); ++i) comps[uf.Find(i)].push_back(members[i]);
  std::vector<Sense> senses;
  for (const auto &[root, comp] : comps) {
    double mass = 0;
    for (const std::string &m : comp) mass += ctx.weights.at(m);
    mass /= total;
    if (mass < cfg.split_min_component_mass) continue;
    Sense s;
    s.label = std::string(x) + " (" + TopContextTerm(ctx, comp) + ")";
    s.context.insert(comp.begin(), comp.end());
    s.mass = mass;
    senses.push_back(std::move(s));
  }
  if (senses.size() < 2) return {};
  std::sort(senses.begin(), senses.end(), [](const Sense &a, const Sense &b) {
    return a.mass != b.mass ? a.mass > b.mass : a.label < b.label;
  });
  return senses;
}

std::vector<std::string> SplitAmbiguous(const CooccurrenceIndex &index,
                                        std::string_view x,
                                        const KlinkConfig &cfg) {
  std::vector<Sense> senses = AnalyzeSenses(index, x, cfg);
  if (senses.empty()) return {std::string(x)};
  std::vector<std::string> labels;
  for (const Sense &s : senses) labels.push_back(s.label);
  return labels;
}

void RepartitionRecords(std::vector<KeywordSet> &records, std::string_view x,
                        const std::vector<Sense> &senses) {
  if (senses.empty()) return;
  for (KeywordSet &rec : records) {
    auto pos = std::find(rec.keywords.begin(), rec.keywords.end(), x);
    if (pos == rec.keywords.end()) continue;
    size_t best = 0;
    size_t best_overlap = 0;
    for (size_t i = 0; i < senses.size(); ++i) {
      size_t overlap = 0;
      for (const std::string &k : rec.keywords) overlap += senses[i].context.count(k);
      if (overlap > best_overlap) {
        best = i;
        best_overlap = overlap;
      }
    }
    *pos = senses[best].label;
    std::sort(rec.keywords.begin(), rec.keywords.end());
    rec.keywords.erase(std::unique(rec.keywords.begin(), rec.keywords.end()),
                       rec.keywords.end());
  }
}

double ContextEntropy(const ContextVector &v) {
  if (v.weights.size() < 2) return 0;
  double total = 0;
  for (const auto &entry : v.weights) total += entry.second;
  if (total <= 0) return 0;
  double h = 0;
  for (const auto &entry : v.weights) {
    double p = entry.second / total;
    if (p > 0) h -= p * std::log(p);
  }
  return h / std::log(static_cast<double>(v.weights.size()));
}

std::set<std::string> FilterGeneric(const CooccurrenceIndex &index,
                                    const KlinkConfig &cfg,
                                    const std::set<std::string> &stoplist) {
  std::set<std::string> stop;
  for (const std::string &s : stoplist) {
    if (auto k = NormalizeKeyword(s)) stop.insert(*k);
  }
  std::vector<std::string> vocab = index.Vocabulary();
  std::vector<double> entropy(vocab.size());
  for (size_t i = 0; i < vocab.size(); ++i) {
    entropy[i] = ContextEntropy(index.Context(vocab[i]));
  }
  double cut = 0;
  if (!entropy.empty()) {
    std::vector<double> sorted = entropy;
    std::sort(sorted.begin(), sorted.end());
    double pos = cfg.generic_entropy_percentile * static_cast<double>(sorted.size() - 1);
    size_t lo = static_cast<size_t>(std::floor(pos));
    size_t hi = std::min(lo + 1, sorted.size() - 1);
    cut = sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
  }
  double docs = static_cast<double>(index.doc_count());
  std::set<std::string> kept;
  for (size_t i = 0; i < vocab.size(); ++i) {
    if (stop.count(vocab[i])) continue;
    double fraction = static_cast<double>(index.Occurrence(vocab[i])) / docs;
    if (fraction > cfg.generic_doc_fraction && entropy[i] > cut) continue;
    kept.insert(vocab[i]);
  }
  return kept;
}

std::vector<PairMetrics> ComputePairMetrics(const CooccurrenceIndex &index,
                                            const KlinkConfig &cfg,
                                            const TopicGraph &taxonomy,
                                            int workers) {
  std::vector<std::pair<std::string, std::string>> pairs =
      index.CandidatePairs(cfg.min_cooccurrence);

  std::map<std::string, ContextVector> contexts;
  for (const std::string &k : index.Vocabulary()) contexts.emplace(k, index.Context(k));

  // Direct supers and siblings from the previous taxonomy, restricted to
  // keywords still present.
  std::map<std::string, std::vector<const ContextVector *>> supers, siblings;
  std::map<std::string, std::vector<std::string>> children;
  std::map<std::string, std::vector<std::string>> parents;
  for (const Edge &e : taxonomy.Edges(EdgeKind::kSuperTopicOf)) {
    if (!contexts.count(e.source) || !contexts.count(e.target)) continue;
    children[e.source].push_back(e.target);
    parents[e.target].push_back(e.source);
  }
  for (const auto &[child, ps] : parents) {
    std::set<std::string> sib;
    for (const std::string &p : ps) {
      supers[child].push_back(&contexts.at(p));
      for (const std::string &s : children[p]) {
        if (s != child) sib.insert(s);
      }
    }
    std::vector<std::string> ranked(sib.begin(), sib.end());
    std::stable_sort(ranked.begin(), ranked.end(),
                     [&](const std::string &a, const std::string &b) {
                       return index.Occurrence(a) > index.Occurrence(b);
                     });
    if (ranked.size() > kMaxSiblings) ranked.resize(kMaxSiblings);
    for (const std::string &s : ranked) siblings[child].push_back(&contexts.at(s));
  }
  auto group = [](const auto &m, const std::string &k) {
    auto it = m.find(k);
    return it == m.end() ? std::vector<const ContextVector *>{} : it->second;
  };

  std::vector<PairMetrics> out(pairs.size());
  auto work = [&](size_t begin, size_t step) {
    for (size_t i = begin; i < pairs.size(); i += step) {
      const auto &[x, y] = pairs[i];
      const ContextVector &cx = contexts.at(x);
      const ContextVector &cy = contexts.at(y);
      double c = CosineContextSimilarity(cx, cy);
      double factor = c * NameSimilarity(x, y, cfg.string_similarity_floor);
      PairMetrics &m = out[i];
      m.x = x;
      m.y = y;
      m.support = index.PairCount(x, y);
      m.h = ConditionalDifference(index, x, y) * factor;
      m.t = TemporalDifference(index, x, y, cfg.gamma) * factor;
      double c_super = MeanCosine(group(supers, x), group(supers, y));
      double c_sib = MeanCosine(group(siblings, x), group(siblings, y));
      m.s = SimilarityMetric(c, c_super, c_sib);
    }
  };
  size_t n = static_cast<size_t>(std::max(1, workers));
  if (n == 1 || pairs.size() < 2) {
    work(0, 1);
  } else {
    std::vector<std::thread> threads;
    for (size_t w = 0; w < n; ++w) threads.emplace_back(work, w, n);
    for (std::thread &t : threads) t.join();
  }
  return out;
}

KlinkResult Run(const CooccurrenceIndex &index, const KlinkConfig &cfg,
                const std::set<std::string> &stoplist,
                const KlinkOptions &options) {
  if (index.empty()) throw InputError("empty corpus");
  cfg.Check();

  std::vector<KeywordSet> records = index.records();
  std::map<std::string, long long> counts;
  for (const std::string &k : index.Vocabulary()) counts[k] = index.Occurrence(k);

  KlinkResult result;
  TopicGraph taxonomy;
  for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
    result.iterations = iter;
    CooccurrenceIndex cur = CooccurrenceIndex::FromKeywordSets(records);
    std::set<std::string> kept = FilterGeneric(cur, cfg, stoplist);
    if (kept.size() < cur.vocabulary_size()) {
      for (KeywordSet &rec : records) {
        std::vector<std::string> ks;
        for (std::string &k : rec.keywords) {
          if (kept.count(k)) {
            ks.push_back(std::move(k));
          } else {
            result.filtered.insert(k);
          }
        }
        rec.keywords = std::move(ks);
      }
      cur = CooccurrenceIndex::FromKeywordSets(records);
    }

    TopicGraph g;
    for (const std::string &k : cur.Vocabulary()) g.AddNode(k);
    for (const auto &[rep, members] : taxonomy.clusters()) {
      if (cur.Contains(rep)) g.mutable_clusters()[rep] = members;
    }
    for (const PairMetrics &m :
         ComputePairMetrics(cur, cfg, taxonomy, options.workers)) {
      if (auto e = InferRelationship(m, cur, cfg)) g.AddEdge(*e);
    }
    g = RemoveCycles(std::move(g));
    TopicGraph merged = RemoveCycles(MergeEquivalents(g, counts));
    bool changed = merged.nodes().size() < g.nodes().size();
    if (changed) {
      std::map<std::string, std::string> rep_of;
      for (const auto &[rep, members] : merged.clusters()) {
        for (const std::string &m : members) rep_of[m] = rep;
      }
      for (KeywordSet &rec : records) {
        for (std::string &k : rec.keywords) {
          auto it = rep_of.find(k);
          if (it != rep_of.end()) k = it->second;
        }
        std::sort(rec.keywords.begin(), rec.keywords.end());
        rec.keywords.erase(std::unique(rec.keywords.begin(), rec.keywords.end()),
                           rec.keywords.end());
      }
    }
    taxonomy = std::move(merged);
    if (iter == cfg.max_iterations) break;

    CooccurrenceIndex after = CooccurrenceIndex::FromKeywordSets(records);
    std::vector<std::pair<std::string, std::vector<Sense>>> splits;
    for (const std::string &k : after.Vocabulary()) {
      std::vector<Sense> senses = AnalyzeSenses(after, k, cfg);
      if (!senses.empty()) splits.emplace_back(k, std::move(senses));
    }
    for (const auto &[k, senses] : splits) {
      RepartitionRecords(records, k, senses);
      taxonomy.mutable_clusters().erase(k);
      changed = true;
    }
    if (!splits.empty()) {
      CooccurrenceIndex split_index = CooccurrenceIndex::FromKeywordSets(records);
      for (const auto &[k, senses] : splits) {
        for (const Sense &s : senses) counts[s.label] = split_index.Occurrence(s.label);
      }
    }
    if (!changed) break;
  }
  result.graph = taxonomy;

  Ontology o(options.ns);
  std::map<std::string, long long> uri_counts;
  auto add = [&](const std::string &label) {
    std::string uri = o.AddTopic(label);
    auto it = counts.find(label);
    uri_counts[uri] = it == counts.end() ? 0 : it->second;
    return uri;
  };
  for (const std::string &n : taxonomy.nodes()) {
    auto it = taxonomy.clusters().find(n);
    if (it == taxonomy.clusters().end()) {
      add(n);
      continue;
    }
    std::vector<std::string> uris;
    for (const std::string &m : it->second) uris.push_back(add(m));
    for (size_t i = 0; i < uris.size(); ++i) {
      for (size_t j = i + 1; j < uris.size(); ++j) {
        o.AddRelation(uris[i], RelationKind::kRelatedEquivalent, uris[j]);
      }
    }
  }
  o = AssignPreferential(std::move(o), uri_counts);
  for (const Edge &e : taxonomy.Edges()) {
    RelationKind kind;
    if (e.kind == EdgeKind::kSuperTopicOf) {
      kind = RelationKind::kSuperTopicOf;
    } else if (e.kind == EdgeKind::kContributesTo) {
      kind = RelationKind::kContributesTo;
    } else {
      continue;
    }
    std::string s = PreferredTopic(o, TopicUri(e.source, o.ns()));
    std::string t = PreferredTopic(o, TopicUri(e.target, o.ns()));
    if (s != t) o.AddRelation(s, kind, t);
  }
  result.ontology = std::move(o);
  return result;
}

}  // namespace cso
