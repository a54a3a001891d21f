#include "cso/ontology.h"

#include <algorithm>
#include <functional>
#include <numeric>

#include "cso/config.h"
#include "cso/text.h"

namespace cso {

namespace {

struct KindInfo {
  RelationKind kind;
  std::string_view name;
  std::string_view predicate;
};

const KindInfo kKinds[] = {
    {RelationKind::kSuperTopicOf, "superTopicOf",
     "https://cso.kmi.open.ac.uk/schema/cso#superTopicOf"},
    {RelationKind::kContributesTo, "contributesTo",
     "https://cso.kmi.open.ac.uk/schema/cso#contributesTo"},
    {RelationKind::kRelatedEquivalent, "relatedEquivalent",
     "https://cso.kmi.open.ac.uk/schema/cso#relatedEquivalent"},
    {RelationKind::kPreferentialEquivalent, "preferentialEquivalent",
     "https://cso.kmi.open.ac.uk/schema/cso#preferentialEquivalent"},
    {RelationKind::kSameAs, "sameAs", "http://www.w3.org/2002/07/owl#sameAs"},
    {RelationKind::kRelatedLink, "relatedLink", "http://schema.org/relatedLink"},
    {RelationKind::kTypeOf, "type",
     "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"},
    {RelationKind::kLabelOf, "label",
     "http://www.w3.org/2000/01/rdf-schema#label"},
};

const KindInfo &Info(RelationKind kind) {
  for (const KindInfo &info : kKinds) {
    if (info.kind == kind) return info;
  }
  throw std::logic_error("unknown relation kind");
}

bool NeedsPercentEncoding(unsigned char c) {
  switch (c) {
    case '<': case '>': case '"': case '{': case '}': case '|':
    case '\\': case '^': case '`': case '%': case '_':
      return true;
    default:
      return c <= 0x20 || c == 0x7F;
  }
}

// Tarjan's strongly connected components over superTopicOf.
std::vector<std::vector<std::string>> SuperTopicCycles(const Ontology &o) {
  std::map<std::string, std::vector<std::string>> children;
  std::set<std::string> nodes;
  for (const Relation &r : o.relations()) {
    if (r.kind != RelationKind::kSuperTopicOf) continue;
    children[r.subject].push_back(r.object);
    nodes.insert(r.subject);
    nodes.insert(r.object);
  }
  std::map<std::string, int> index, low;
  std::set<std::string> on_stack;
  std::vector<std::string> stack;
  std::vector<std::vector<std::string>> cycles;
  int counter = 0;

  std::function<void(const std::string &)> visit = [&](const std::string &v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack.insert(v);
    for (const std::string &w : children[v]) {
      if (!index.count(w)) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack.count(w)) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<std::string> component;
      std::string w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack.erase(w);
        component.push_back(w);
      } while (w != v);
      bool self_loop = std::count(children[v].begin(), children[v].end(), v) > 0;
      if (component.size() > 1 || self_loop) {
        std::sort(component.begin(), component.end());
        cycles.push_back(std::move(component));
      }
    }
  };
  for (const std::string &n : nodes) {
    if (!index.count(n)) visit(n);
  }
  std::sort(cycles.begin(), cycles.end());
  return cycles;
}

std::string EscapeLiteral(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '"': out += "\\\""; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out;
}

std::string NTriplesLine(const Relation &r) {
  std::string line = "<" + r.subject + "> <" +
                     std::string(PredicateUri(r.kind)) + "> ";
  if (r.kind == RelationKind::kLabelOf) {
    line += "\"" + EscapeLiteral(r.object) + "\"";
  } else {
    line += "<" + r.object + ">";
  }
  line += " .";
  return line;
}

// Relations paired with their N-Triples line, sorted by that line.
std::vector<std::pair<std::string, const Relation *>> SortedLines(
    const Ontology &o) {
  std::vector<std::pair<std::string, const Relation *>> lines;
  lines.reserve(o.relations().size());
  for (const Relation &r : o.relations()) lines.emplace_back(NTriplesLine(r), &r);
  std::sort(lines.begin(), lines.end(),
            [](const auto &a, const auto &b) { return a.first < b.first; });
  return lines;
}

void RequireValid(const Ontology &o) {
  std::vector<Violation> violations = Validate(o);
  if (violations.empty()) return;
  std::string what = "invalid ontology:";
  for (const Violation &v : violations) what += "\n  " + v.message;
  throw ValidationError(what, std::move(violations));
}

[[noreturn]] void LineError(size_t line, const std::string &what) {
  throw InputError("line " + std::to_string(line) + ": " + what);
}

class LineParser {
 public:
  LineParser(std::string_view text, size_t line) : text_(text), line_(line) {}

  void SkipSpaces() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) {
      ++pos_;
    }
  }

  bool AtEnd() const { return pos_ >= text_.size(); }
  char Peek() const { return text_[pos_]; }

  std::string Iri(const char *what) {
    SkipSpaces();
    if (AtEnd() || Peek() != '<') LineError(line_, std::string("expected <") + what + ">");
    size_t end = text_.find('>', pos_);
    if (end == std::string_view::npos) LineError(line_, "unterminated IRI");
    std::string iri(text_.substr(pos_ + 1, end - pos_ - 1));
    if (iri.empty()) LineError(line_, "empty IRI");
    for (char c : iri) {
      if (c == ' ' || c == '<' || c == '"') LineError(line_, "invalid character in IRI");
    }
    pos_ = end + 1;
    return iri;
  }

  std::string Literal() {
    SkipSpaces();
    if (AtEnd() || Peek() != '"') LineError(line_, "expected literal");
    ++pos_;
    std::string out;
    while (true) {
      if (AtEnd()) LineError(line_, "unterminated literal");
      char c = text_[pos_++];
      if (c == '"') break;
      if (c != '\\') {
        out += c;
        continue;
      }
      if (AtEnd()) LineError(line_, "dangling escape");
      char e = text_[pos_++];
      switch (e) {
        case '\\': out += '\\'; break;
        case '"': out += '"'; break;
        case '\'': out += '\''; break;
        case 'n': out += '\n'; break;
        case 'r': out += '\r'; break;
        case 't': out += '\t'; break;
        case 'b': out += '\b'; break;
        case 'f': out += '\f'; break;
        default: LineError(line_, std::string("unknown escape \\") + e);
      }
    }
    return out;
  }

  void Terminator() {
    if (AtEnd() || text_.substr(pos_) != " .") {
      LineError(line_, "missing terminal ' .'");
    }
    pos_ = text_.size();
  }

 private:
  std::string_view text_;
  size_t line_;
  size_t pos_ = 0;
};

std::string CsvField(std::string_view field) {
  bool quote = field.find_first_of(",\"\r\n") != std::string_view::npos;
  if (!quote) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

// RFC 4180 records; quoted fields may span lines. Each record carries the
// line on which it starts.
std::vector<std::pair<size_t, std::vector<std::string>>> ParseCsvRecords(
    std::string_view text) {
  std::vector<std::pair<size_t, std::vector<std::string>>> records;
  std::vector<std::string> fields;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  size_t line = 1;
  size_t record_line = 1;
  auto end_record = [&] {
    fields.push_back(std::move(field));
    field.clear();
    records.emplace_back(record_line, std::move(fields));
    fields.clear();
    field_started = false;
  };
  for (size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    if (c == '"' && field.empty()) {
      in_quotes = true;
      field_started = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      field_started = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      end_record();
      ++line;
      record_line = line;
    } else {
      field += c;
      field_started = true;
    }
  }
  if (in_quotes) LineError(record_line, "unterminated quoted field");
  if (field_started || !fields.empty() || !field.empty()) end_record();
  return records;
}

}  // namespace

std::string_view RelationName(RelationKind kind) { return Info(kind).name; }

std::string_view PredicateUri(RelationKind kind) { return Info(kind).predicate; }

std::optional<RelationKind> KindFromPredicate(std::string_view uri) {
  for (const KindInfo &info : kKinds) {
    if (info.predicate == uri) return info.kind;
  }
  return std::nullopt;
}

bool LinksTopics(RelationKind kind) {
  return kind == RelationKind::kSuperTopicOf ||
         kind == RelationKind::kContributesTo ||
         kind == RelationKind::kRelatedEquivalent ||
         kind == RelationKind::kPreferentialEquivalent;
}

std::string TopicUri(std::string_view label, std::string_view ns) {
  static const char kHex[] = "0123456789ABCDEF";
  std::string out(ns);
  for (char ch : AsciiLower(Trim(label))) {
    auto c = static_cast<unsigned char>(ch);
    if (c == ' ') {
      out += '_';
    } else if (NeedsPercentEncoding(c)) {
      out += '%';
      out += kHex[c >> 4];
      out += kHex[c & 0xF];
    } else {
      out += ch;
    }
  }
  return out;
}

std::string Ontology::AddTopic(std::string_view label) {
  std::string_view trimmed = Trim(label);
  if (trimmed.empty()) throw InputError("empty topic label");
  std::string uri = TopicUri(trimmed, ns_);
  if (HasTopic(uri)) {
    std::string existing = Label(uri);
    if (existing != trimmed) {
      throw InputError("label '" + std::string(trimmed) + "' collides with '" +
                       existing + "' at " + uri);
    }
    return uri;
  }
  InsertUnchecked({uri, RelationKind::kTypeOf, std::string(kTopicClass)});
  InsertUnchecked({uri, RelationKind::kLabelOf, std::string(trimmed)});
  return uri;
}

void Ontology::AddRelation(std::string_view subject, RelationKind kind,
                           std::string_view object) {
  if (!HasTopic(subject)) {
    throw NotFoundError("unknown subject topic: " + std::string(subject));
  }
  if (LinksTopics(kind) && !HasTopic(object)) {
    throw NotFoundError("unknown object topic: " + std::string(object));
  }
  if (kind == RelationKind::kTypeOf && object != kTopicClass) {
    throw InputError("type must be " + std::string(kTopicClass));
  }
  if (kind == RelationKind::kLabelOf) {
    std::string existing = Label(subject);
    if (!existing.empty() && existing != object) {
      throw InputError("topic already labelled: " + std::string(subject));
    }
  }
  if ((kind == RelationKind::kContributesTo ||
       kind == RelationKind::kRelatedEquivalent) &&
      subject == object) {
    throw InputError(std::string(RelationName(kind)) + " on itself: " +
                     std::string(subject));
  }
  if (kind == RelationKind::kSuperTopicOf) {
    if (Has({std::string(subject), kind, std::string(object)})) return;
    // subject -> object closes a cycle iff subject already lies below object.
    std::set<std::string> seen;
    std::vector<std::string> pending = {std::string(object)};
    while (!pending.empty()) {
      std::string node = std::move(pending.back());
      pending.pop_back();
      if (node == subject) throw InputError("cycle");
      if (!seen.insert(node).second) continue;
      for (const std::string &child : Objects(node, RelationKind::kSuperTopicOf)) {
        pending.push_back(child);
      }
    }
  }
  InsertUnchecked({std::string(subject), kind, std::string(object)});
  if (kind == RelationKind::kRelatedEquivalent) {
    InsertUnchecked({std::string(object), kind, std::string(subject)});
  }
}

bool Ontology::InsertUnchecked(const Relation &relation) {
  if (!relations_.insert(relation).second) return false;
  if (relation.kind == RelationKind::kTypeOf && relation.object == kTopicClass) {
    typed_.insert(relation.subject);
  } else if (relation.kind == RelationKind::kSuperTopicOf) {
    parents_[relation.object].insert(relation.subject);
  }
  return true;
}

bool Ontology::Remove(const Relation &relation) {
  if (relations_.erase(relation) == 0) return false;
  if (relation.kind == RelationKind::kTypeOf && relation.object == kTopicClass) {
    typed_.erase(relation.subject);
  } else if (relation.kind == RelationKind::kSuperTopicOf) {
    auto it = parents_.find(relation.object);
    it->second.erase(relation.subject);
    if (it->second.empty()) parents_.erase(it);
  }
  return true;
}

bool Ontology::HasTopic(std::string_view uri) const {
  return typed_.find(uri) != typed_.end();
}

std::vector<Topic> Ontology::Topics() const {
  std::vector<Topic> out;
  out.reserve(typed_.size());
  for (const std::string &uri : typed_) out.push_back({uri, Label(uri)});
  return out;
}

std::string Ontology::Label(std::string_view uri) const {
  std::vector<std::string> labels = Objects(uri, RelationKind::kLabelOf);
  return labels.empty() ? std::string() : labels.front();
}

bool Ontology::Has(const Relation &relation) const {
  return relations_.count(relation) > 0;
}

std::vector<std::string> Ontology::Objects(std::string_view subject,
                                           RelationKind kind) const {
  std::vector<std::string> out;
  Relation probe{std::string(subject), kind, std::string()};
  for (auto it = relations_.lower_bound(probe);
       it != relations_.end() && it->subject == subject && it->kind == kind;
       ++it) {
    out.push_back(it->object);
  }
  return out;
}

std::vector<std::string> Ontology::Parents(std::string_view uri) const {
  auto it = parents_.find(uri);
  if (it == parents_.end()) return {};
  return {it->second.begin(), it->second.end()};
}

std::vector<Violation> Validate(const Ontology &o) {
  std::vector<Violation> out;
  auto add = [&](std::string kind, std::string message,
                 std::vector<std::string> uris) {
    out.push_back({std::move(kind), std::move(message), std::move(uris)});
  };

  std::map<std::string, int> label_count;
  for (const Relation &r : o.relations()) {
    if (r.kind == RelationKind::kLabelOf) ++label_count[r.subject];
  }
  for (const Topic &t : o.Topics()) {
    int n = label_count[t.uri];
    if (n == 0 || t.label.empty()) {
      add("label", "topic without label: " + t.uri, {t.uri});
    } else if (n > 1) {
      add("label", "topic with several labels: " + t.uri, {t.uri});
    } else if (TopicUri(t.label, o.ns()) != t.uri) {
      add("uri", "uri not derived from label '" + t.label + "': " + t.uri,
          {t.uri});
    }
  }

  for (const Relation &r : o.relations()) {
    std::string name(RelationName(r.kind));
    if (r.kind == RelationKind::kTypeOf) {
      if (r.object != kTopicClass) {
        add("type", "unexpected type " + r.object + " for " + r.subject,
            {r.subject});
      }
      continue;
    }
    if (!o.HasTopic(r.subject)) {
      add("dangling", name + " subject is not a topic: " + r.subject,
          {r.subject});
    }
    if (LinksTopics(r.kind) && !o.HasTopic(r.object)) {
      add("dangling", name + " object is not a topic: " + r.object,
          {r.subject, r.object});
    }
    if ((r.kind == RelationKind::kContributesTo ||
         r.kind == RelationKind::kRelatedEquivalent) &&
        r.subject == r.object) {
      add("self", name + " on itself: " + r.subject, {r.subject});
    }
    if (r.kind == RelationKind::kRelatedEquivalent &&
        !o.Has({r.object, r.kind, r.subject})) {
      add("symmetry",
          "relatedEquivalent without its twin: " + r.subject + " -> " + r.object,
          {r.subject, r.object});
    }
  }

  for (const auto &cycle : SuperTopicCycles(o)) {
    add("cycle", "superTopicOf cycle through " + Join(cycle, ", "), cycle);
  }

  // Singletons may omit preferentialEquivalent; otherwise every member points
  // at exactly one target, shared by the cluster and inside it.
  for (const auto &cluster : EquivalenceClusters(o)) {
    std::set<std::string> targets;
    bool every_member_has_one = true;
    bool any = false;
    for (const std::string &m : cluster) {
      auto prefs = o.Objects(m, RelationKind::kPreferentialEquivalent);
      if (prefs.size() != 1) every_member_has_one = false;
      if (!prefs.empty()) any = true;
      targets.insert(prefs.begin(), prefs.end());
    }
    bool consistent = every_member_has_one && targets.size() == 1 &&
                      std::binary_search(cluster.begin(), cluster.end(),
                                         *targets.begin());
    if (cluster.size() == 1 && !any) consistent = true;
    if (!consistent) {
      add("preferential",
          "inconsistent preferentialEquivalent in cluster {" +
              Join(cluster, ", ") + "}",
          cluster);
    }
  }
  return out;
}

std::set<std::string> Ancestors(const Ontology &o, std::string_view uri) {
  if (!o.HasTopic(uri)) {
    throw NotFoundError("unknown topic: " + std::string(uri));
  }
  std::set<std::string> out;
  std::vector<std::string> pending = o.Parents(uri);
  while (!pending.empty()) {
    std::string node = std::move(pending.back());
    pending.pop_back();
    if (node == uri || !out.insert(node).second) continue;
    for (std::string &p : o.Parents(node)) pending.push_back(std::move(p));
  }
  return out;
}

std::vector<std::vector<std::string>> EquivalenceClusters(const Ontology &o) {
  std::vector<Topic> topics = o.Topics();
  std::map<std::string, size_t> id;
  for (size_t i = 0; i < topics.size(); ++i) id[topics[i].uri] = i;
  std::vector<size_t> parent(topics.size());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<size_t(size_t)> find = [&](size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const Relation &r : o.relations()) {
    if (r.kind != RelationKind::kRelatedEquivalent) continue;
    auto a = id.find(r.subject);
    auto b = id.find(r.object);
    if (a == id.end() || b == id.end()) continue;
    size_t ra = find(a->second), rb = find(b->second);
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  }
  std::map<size_t, std::vector<std::string>> groups;
  for (size_t i = 0; i < topics.size(); ++i) {
    groups[find(i)].push_back(topics[i].uri);
  }
  std::vector<std::vector<std::string>> out;
  for (auto &entry : groups) out.push_back(std::move(entry.second));
  std::sort(out.begin(), out.end());
  return out;
}

Ontology AssignPreferential(
    Ontology o, const std::map<std::string, long long> &article_counts) {
  std::vector<Relation> stale;
  for (const Relation &r : o.relations()) {
    if (r.kind == RelationKind::kPreferentialEquivalent) stale.push_back(r);
  }
  for (const Relation &r : stale) o.Remove(r);

  for (const auto &cluster : EquivalenceClusters(o)) {
    const std::string *best = nullptr;
    long long best_count = 0;
    for (const std::string &m : cluster) {
      auto it = article_counts.find(m);
      if (it == article_counts.end()) {
        throw InputError("missing article count for topic " + m);
      }
      // Members are sorted, so a strict comparison keeps the smaller uri.
      if (best == nullptr || it->second > best_count) {
        best = &m;
        best_count = it->second;
      }
    }
    for (const std::string &m : cluster) {
      o.InsertUnchecked({m, RelationKind::kPreferentialEquivalent, *best});
    }
  }
  return o;
}

std::string PreferredTopic(const Ontology &o, std::string_view uri) {
  auto prefs = o.Objects(uri, RelationKind::kPreferentialEquivalent);
  return prefs.empty() ? std::string(uri) : prefs.front();
}

std::string SerializeNTriples(const Ontology &o) {
  RequireValid(o);
  std::string out;
  for (const auto &[line, relation] : SortedLines(o)) {
    out += line;
    out += '\n';
  }
  return out;
}

Ontology ParseNTriples(std::string_view text, std::string_view ns) {
  Ontology o{std::string(ns)};
  size_t line_no = 0;
  for (const std::string &line : SplitLines(text)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    LineParser p(line, line_no);
    Relation r;
    r.subject = p.Iri("subject");
    std::string predicate = p.Iri("predicate");
    auto kind = KindFromPredicate(predicate);
    if (!kind) LineError(line_no, "unknown predicate <" + predicate + ">");
    r.kind = *kind;
    p.SkipSpaces();
    if (!p.AtEnd() && p.Peek() == '"') {
      if (r.kind != RelationKind::kLabelOf) {
        LineError(line_no, "literal object for " +
                               std::string(RelationName(r.kind)));
      }
      r.object = p.Literal();
    } else {
      if (r.kind == RelationKind::kLabelOf) LineError(line_no, "label must be a literal");
      r.object = p.Iri("object");
    }
    p.Terminator();
    o.InsertUnchecked(r);
  }
  return o;
}

std::string SerializeCsv(const Ontology &o) {
  RequireValid(o);
  std::string out = "subject,predicate,object\n";
  for (const auto &[line, r] : SortedLines(o)) {
    out += CsvField(r->subject);
    out += ',';
    out += CsvField(PredicateUri(r->kind));
    out += ',';
    out += CsvField(r->object);
    out += '\n';
  }
  return out;
}

Ontology ParseCsv(std::string_view text, std::string_view ns) {
  Ontology o{std::string(ns)};
  auto records = ParseCsvRecords(text);
  if (records.empty()) throw InputError("line 1: missing header");
  const auto &header = records.front().second;
  if (header != std::vector<std::string>{"subject", "predicate", "object"}) {
    LineError(records.front().first, "expected header subject,predicate,object");
  }
  for (size_t i = 1; i < records.size(); ++i) {
    const auto &[line, fields] = records[i];
    if (fields.size() == 1 && fields[0].empty()) continue;
    if (fields.size() != 3) {
      LineError(line, "expected 3 fields, got " + std::to_string(fields.size()));
    }
    auto kind = KindFromPredicate(fields[1]);
    if (!kind) LineError(line, "unknown predicate <" + fields[1] + ">");
    if (fields[0].empty() || fields[2].empty()) LineError(line, "empty field");
    o.InsertUnchecked({fields[0], *kind, fields[2]});
  }
  return o;
}

void ImportMappings(Ontology &o, std::string_view text, RelationKind kind) {
  if (kind != RelationKind::kSameAs && kind != RelationKind::kRelatedLink) {
    throw std::invalid_argument("mappings are sameAs or relatedLink");
  }
  size_t line_no = 0;
  for (const std::string &line : SplitLines(text)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    std::vector<std::string> parts = Split(line, '\t');
    if (parts.size() != 2 || Trim(parts[0]).empty() || Trim(parts[1]).empty()) {
      LineError(line_no, "expected topic-uri<TAB>external-uri");
    }
    std::string topic(Trim(parts[0]));
    if (!o.HasTopic(topic)) LineError(line_no, "unknown topic " + topic);
    o.AddRelation(topic, kind, Trim(parts[1]));
  }
}

}  // namespace cso
