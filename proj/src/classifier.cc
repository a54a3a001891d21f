#include "cso/classifier.h"

#include <algorithm>
#include <cmath>

#include "cso/config.h"
#include "cso/text.h"
#include "json.hpp"

namespace cso {

namespace {

using nlohmann::json;

const std::set<std::string, std::less<>> &OtherWords() {
  static const std::set<std::string, std::less<>> words = {
      "achieve",     "achieved",   "achieves",    "allow",       "allows",
      "apply",       "applied",    "applies",     "compare",     "compared",
      "consider",    "considered", "demonstrate", "demonstrated", "demonstrates",
      "describe",    "described",  "describes",   "develop",     "developed",
      "develops",    "discuss",    "discussed",   "discusses",   "evaluate",
      "evaluated",   "evaluates",  "explore",     "explored",    "explores",
      "find",        "found",      "improve",     "improved",    "improves",
      "introduce",   "introduced", "introduces",  "investigate", "investigated",
      "investigates", "obtain",    "obtained",    "outperform",  "outperforms",
      "present",     "presented",  "presents",    "propose",     "proposed",
      "proposes",    "provide",    "provided",    "provides",    "report",
      "reported",    "show",       "showed",      "shown",       "shows",
      "use",         "used",       "uses",        "using",       "yield",
      "yields",
  };
  return words;
}

const std::set<std::string, std::less<>> &Adjectives() {
  static const std::set<std::string, std::less<>> words = {
      "accurate", "better",   "big",      "best",      "complex",  "deep",
      "different", "early",   "effective", "efficient", "existing", "fast",
      "few",      "good",     "high",     "large",     "low",      "many",
      "modern",   "multiple", "new",      "novel",     "open",     "real",
      "recent",   "robust",   "scalable", "several",   "simple",   "small",
      "smart",    "various",  "wide",
  };
  return words;
}

// Words ending like adjectives that are usually nouns.
const std::set<std::string, std::less<>> &SuffixExceptions() {
  static const std::set<std::string, std::less<>> words = {
      "alternative", "archive",   "arithmetic", "initiative", "interval",
      "journal",     "logic",     "manual",     "music",      "objective",
      "perspective", "portal",    "proposal",   "rhetoric",   "signal",
      "topic",       "tutorial",
  };
  return words;
}

bool EndsWith(std::string_view s, std::string_view suffix) {
  return s.size() > suffix.size() + 1 &&
         s.substr(s.size() - suffix.size()) == suffix;
}

bool IsNumber(std::string_view token) {
  return std::all_of(token.begin(), token.end(),
                     [](char c) { return c >= '0' && c <= '9'; });
}

// Title, abstract and each keyword are separate segments.
std::vector<std::string> Segments(const Document &doc) {
  std::vector<std::string> out = {doc.title, doc.abstract};
  out.insert(out.end(), doc.keywords.begin(), doc.keywords.end());
  return out;
}

std::vector<std::string> ToStrings(const json &arr, const char *field,
                                   size_t index) {
  if (!arr.is_array()) {
    throw InputError("record " + std::to_string(index) + ": field '" + field +
                     "' must be an array");
  }
  std::vector<std::string> out;
  for (const json &v : arr) {
    if (!v.is_string()) {
      throw InputError("record " + std::to_string(index) + ": field '" + field +
                       "' must hold strings");
    }
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace

void ClassifierConfig::Check() const {
  if (!(syntactic_threshold > 0 && syntactic_threshold <= 1)) {
    throw InputError("config: 'syntactic_threshold' must be in (0, 1]");
  }
  if (top_k_neighbors < 1) throw InputError("config: 'top_k_neighbors' must be >= 1");
  if (!(neighbor_min_cosine >= -1 && neighbor_min_cosine <= 1)) {
    throw InputError("config: 'neighbor_min_cosine' must be in [-1, 1]");
  }
  if (ngram_max < 1) throw InputError("config: 'ngram_max' must be >= 1");
}

ClassifierConfig ClassifierConfig::Parse(std::string_view text) {
  ClassifierConfig cfg;
  auto small_int = [](const KeyValue &kv) {
    long long v = ParseInteger(kv);
    if (v < 0 || v > 1000000) {
      throw InputError("line " + std::to_string(kv.line) + ": '" + kv.key +
                       "' out of range");
    }
    return static_cast<int>(v);
  };
  for (const KeyValue &kv : ParseKeyValues(text)) {
    if (kv.key == "syntactic_threshold") {
      cfg.syntactic_threshold = ParseDouble(kv);
    } else if (kv.key == "top_k_neighbors") {
      cfg.top_k_neighbors = small_int(kv);
    } else if (kv.key == "neighbor_min_cosine") {
      cfg.neighbor_min_cosine = ParseDouble(kv);
    } else if (kv.key == "ngram_max") {
      cfg.ngram_max = small_int(kv);
    } else {
      throw InputError("line " + std::to_string(kv.line) + ": unknown key '" +
                       kv.key + "'");
    }
  }
  cfg.Check();
  return cfg;
}

std::vector<std::pair<std::string, std::string>> ClassifierConfig::Entries() const {
  return {
      {"syntactic_threshold", FormatDouble(syntactic_threshold)},
      {"top_k_neighbors", std::to_string(top_k_neighbors)},
      {"neighbor_min_cosine", FormatDouble(neighbor_min_cosine)},
      {"ngram_max", std::to_string(ngram_max)},
  };
}

std::vector<Ngram> ExtractNgrams(const Document &doc, int max_n) {
  std::vector<Ngram> out;
  for (const std::string &segment : Segments(doc)) {
    for (const auto &run : TokenRuns(segment)) {
      std::vector<std::vector<std::string>> pieces(1);
      for (const std::string &t : run) {
        if (IsStopWord(t)) {
          if (!pieces.back().empty()) pieces.emplace_back();
        } else {
          pieces.back().push_back(t);
        }
      }
      for (const auto &piece : pieces) {
        for (size_t n = 1; n <= static_cast<size_t>(max_n); ++n) {
          for (size_t i = 0; i + n <= piece.size(); ++i) {
            out.emplace_back(piece.begin() + i, piece.begin() + i + n);
          }
        }
      }
    }
  }
  return out;
}

std::string NormalizeLabel(std::string_view text) { return Join(Tokenize(text), " "); }

LabelIndex::LabelIndex(const Ontology &o) {
  for (const Topic &t : o.Topics()) {
    std::string label = NormalizeLabel(t.label);
    if (label.empty()) continue;
    Entry e{label, t.uri, PreferredTopic(o, t.uri), Utf8Length(label)};
    by_label_[label].insert(e.preferred);
    entries_.push_back(std::move(e));
  }
}

std::vector<std::string> LabelIndex::Exact(std::string_view label) const {
  auto it = by_label_.find(label);
  if (it == by_label_.end()) return {};
  return {it->second.begin(), it->second.end()};
}

std::set<std::string> SyntacticClassify(const Document &doc, const LabelIndex &labels,
                                        const ClassifierConfig &cfg) {
  std::set<std::string> grams;
  for (const Ngram &g : ExtractNgrams(doc, cfg.ngram_max)) grams.insert(Join(g, " "));
  std::set<std::string> out;
  double slack = 1 - cfg.syntactic_threshold;
  for (const std::string &g : grams) {
    size_t len = Utf8Length(g);
    for (const LabelIndex::Entry &e : labels.entries()) {
      if (out.count(e.preferred)) continue;
      size_t longest = std::max(len, e.length);
      size_t diff = len > e.length ? len - e.length : e.length - len;
      // The length difference bounds the edit distance from below.
      if (static_cast<double>(diff) > slack * static_cast<double>(longest) + 1e-9) {
        continue;
      }
      if (NormalizedLevenshteinSimilarity(g, e.label) >= cfg.syntactic_threshold) {
        out.insert(e.preferred);
      }
    }
  }
  return out;
}

std::set<std::string> SyntacticClassify(const Document &doc, const Ontology &o,
                                        const ClassifierConfig &cfg) {
  return SyntacticClassify(doc, LabelIndex(o), cfg);
}

Tag DefaultTag(std::string_view token) {
  if (token.empty() || IsStopWord(token) || IsNumber(token) ||
      OtherWords().count(token)) {
    return Tag::kOther;
  }
  if (Adjectives().count(token)) return Tag::kAdj;
  if (SuffixExceptions().count(token)) return Tag::kNoun;
  for (std::string_view suffix : {"al", "ic", "ous", "ive", "based"}) {
    if (EndsWith(token, suffix)) return Tag::kAdj;
  }
  return Tag::kNoun;
}

std::vector<Ngram> CandidateSpans(
    const std::vector<std::pair<std::string, Tag>> &tagged) {
  std::vector<Ngram> out;
  size_t i = 0;
  while (i < tagged.size()) {
    if (tagged[i].second == Tag::kOther) {
      ++i;
      continue;
    }
    size_t end = i;
    while (end < tagged.size() && tagged[end].second != Tag::kOther) ++end;
    size_t last = end;
    while (last > i && tagged[last - 1].second != Tag::kNoun) --last;
    if (last > i) {
      Ngram span;
      for (size_t k = i; k < last; ++k) span.push_back(tagged[k].first);
      out.push_back(std::move(span));
    }
    i = end;
  }
  return out;
}

std::vector<Ngram> ExtractCandidates(const Document &doc, const Tagger &tagger) {
  std::vector<Ngram> out;
  for (const std::string &segment : Segments(doc)) {
    for (const auto &run : TokenRuns(segment)) {
      std::vector<std::pair<std::string, Tag>> tagged;
      for (const std::string &t : run) tagged.emplace_back(t, tagger(t));
      for (Ngram &span : CandidateSpans(tagged)) out.push_back(std::move(span));
    }
  }
  return out;
}

std::vector<Ngram> CandidateNgrams(const std::vector<Ngram> &candidates, int max_n) {
  std::vector<Ngram> out;
  for (const Ngram &c : candidates) {
    for (size_t n = 1; n <= static_cast<size_t>(max_n); ++n) {
      for (size_t i = 0; i + n <= c.size(); ++i) {
        out.emplace_back(c.begin() + i, c.begin() + i + n);
      }
    }
  }
  return out;
}

std::vector<std::pair<std::string, double>> ScoreTopics(
    const std::vector<NgramNeighbours> &lists, const LabelIndex &labels) {
  std::map<std::string, long long> frequency;
  std::map<std::string, std::set<std::string>> diversity;
  for (const NgramNeighbours &list : lists) {
    for (const auto &neighbour : list.neighbours) {
      std::string expanded = neighbour.first;
      std::replace(expanded.begin(), expanded.end(), '_', ' ');
      for (const std::string &topic : labels.Exact(NormalizeLabel(expanded))) {
        ++frequency[topic];
        diversity[topic].insert(list.ngram);
      }
    }
  }
  std::vector<std::pair<std::string, double>> out;
  for (const auto &[topic, f] : frequency) {
    out.emplace_back(topic, static_cast<double>(f) *
                                static_cast<double>(diversity[topic].size()));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto &a, const auto &b) { return a.second > b.second; });
  return out;
}

size_t ElbowCutoff(std::span<const double> scores) {
  size_t n = scores.size();
  if (n <= 2) return n;
  double first = scores.front();
  double last = scores.back();
  if (first == last) return n;
  // (1 - x) - y scaled by (n - 1) * (first - last), which keeps integer
  // scores exact so ties are detected reliably.
  double span = first - last;
  double steps = static_cast<double>(n - 1);
  size_t best = 0;
  double best_d = 0;
  for (size_t i = 0; i < n; ++i) {
    double d = (steps - static_cast<double>(i)) * span - steps * (scores[i] - last);
    if (i == 0 || d >= best_d) {
      best = i;
      best_d = d;
    }
  }
  return best;
}

std::vector<std::pair<std::string, double>> SemanticClassify(
    const Document &doc, const LabelIndex &labels, const EmbeddingModel &m,
    const ClassifierConfig &cfg, const Tagger &tagger) {
  std::vector<NgramNeighbours> lists;
  for (const Ngram &g :
       CandidateNgrams(ExtractCandidates(doc, tagger), cfg.ngram_max)) {
    std::optional<std::vector<float>> v = VectorForNgram(m, g);
    if (!v) continue;
    std::string glued = Join(g, "_");
    std::string_view exclude = m.Find(glued) ? std::string_view(glued) : std::string_view();
    NgramNeighbours list;
    list.ngram = Join(g, " ");
    for (auto &hit : MostSimilar(m, *v, static_cast<size_t>(cfg.top_k_neighbors), exclude)) {
      if (hit.second >= cfg.neighbor_min_cosine) list.neighbours.push_back(std::move(hit));
    }
    lists.push_back(std::move(list));
  }
  std::vector<std::pair<std::string, double>> scored = ScoreTopics(lists, labels);
  std::vector<double> values;
  for (const auto &entry : scored) values.push_back(entry.second);
  scored.resize(ElbowCutoff(values));
  return scored;
}

std::set<std::string> Enrich(const std::set<std::string> &topics, const Ontology &o) {
  std::set<std::string> out;
  for (const std::string &t : topics) {
    if (!o.HasTopic(t)) throw NotFoundError("unknown topic: " + t);
    out.insert(t);
    std::set<std::string> up = Ancestors(o, t);
    out.insert(up.begin(), up.end());
  }
  return out;
}

Annotation Classify(const Document &doc, const Ontology &o, const LabelIndex &labels,
                    const EmbeddingModel *model, const ClassifierConfig &cfg) {
  Annotation a;
  a.doc_id = doc.id;
  a.syntactic = SyntacticClassify(doc, labels, cfg);
  if (model != nullptr) a.semantic = SemanticClassify(doc, labels, *model, cfg);
  a.union_topics = a.syntactic;
  for (const auto &entry : a.semantic) a.union_topics.insert(entry.first);
  a.enhanced = Enrich(a.union_topics, o);
  return a;
}

std::string FormatAnnotation(const Document &doc, const Annotation &a) {
  json obj = json::parse(FormatDocument(doc));
  obj["syntactic"] = a.syntactic;
  json semantic = json::array();
  for (const auto &[topic, relevance] : a.semantic) {
    semantic.push_back({{"topic", topic}, {"relevance", relevance}});
  }
  obj["semantic"] = semantic;
  obj["union"] = a.union_topics;
  obj["enhanced"] = a.enhanced;
  return obj.dump();
}

Annotation ParseAnnotation(std::string_view line, size_t record_index) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error &e) {
    throw InputError("record " + std::to_string(record_index) +
                     ": malformed record: " + e.what());
  }
  auto require = [&](const char *field) -> const json & {
    auto it = obj.find(field);
    if (it == obj.end()) {
      throw InputError("record " + std::to_string(record_index) +
                       ": missing field: " + field);
    }
    return *it;
  };
  if (!obj.is_object()) {
    throw InputError("record " + std::to_string(record_index) + ": record is not an object");
  }
  Annotation a;
  const json &id = require("id");
  if (!id.is_string()) {
    throw InputError("record " + std::to_string(record_index) +
                     ": field 'id' must be a string");
  }
  a.doc_id = id.get<std::string>();
  for (std::string &t : ToStrings(require("enhanced"), "enhanced", record_index)) {
    a.enhanced.insert(std::move(t));
  }
  if (obj.contains("syntactic")) {
    for (std::string &t : ToStrings(obj["syntactic"], "syntactic", record_index)) {
      a.syntactic.insert(std::move(t));
    }
  }
  if (obj.contains("union")) {
    for (std::string &t : ToStrings(obj["union"], "union", record_index)) {
      a.union_topics.insert(std::move(t));
    }
  }
  if (obj.contains("semantic")) {
    for (const json &s : obj["semantic"]) {
      if (!s.is_object() || !s.contains("topic") || !s["topic"].is_string() ||
          !s.contains("relevance") || !s["relevance"].is_number()) {
        throw InputError("record " + std::to_string(record_index) +
                         ": malformed semantic entry");
      }
      a.semantic.emplace_back(s["topic"].get<std::string>(),
                              s["relevance"].get<double>());
    }
  }
  return a;
}

}  // namespace cso
