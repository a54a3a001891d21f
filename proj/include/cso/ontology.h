#ifndef CSO_ONTOLOGY_H_
#define CSO_ONTOLOGY_H_

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cso/error.h"

namespace cso {

// The eight relations of the topic data model. kTypeOf and kLabelOf are
// rdf:type and rdfs:label.
enum class RelationKind {
  kSuperTopicOf,
  kContributesTo,
  kRelatedEquivalent,
  kPreferentialEquivalent,
  kSameAs,
  kRelatedLink,
  kTypeOf,
  kLabelOf,
};

inline constexpr RelationKind kAllRelationKinds[] = {
    RelationKind::kSuperTopicOf,      RelationKind::kContributesTo,
    RelationKind::kRelatedEquivalent, RelationKind::kPreferentialEquivalent,
    RelationKind::kSameAs,            RelationKind::kRelatedLink,
    RelationKind::kTypeOf,            RelationKind::kLabelOf,
};

inline constexpr std::string_view kDefaultNamespace =
    "https://cso.kmi.open.ac.uk/topics/";
inline constexpr std::string_view kTopicClass =
    "https://cso.kmi.open.ac.uk/schema/cso#Topic";

std::string_view RelationName(RelationKind kind);
std::string_view PredicateUri(RelationKind kind);
std::optional<RelationKind> KindFromPredicate(std::string_view uri);

// Objects of these kinds must be topics of the same ontology.
bool LinksTopics(RelationKind kind);

// Namespace + label lowercased with spaces mapped to underscores. Bytes that
// cannot appear in an IRI are percent-encoded.
std::string TopicUri(std::string_view label,
                     std::string_view ns = kDefaultNamespace);

struct Topic {
  std::string uri;
  std::string label;
};

// A triple. For kLabelOf the object is the literal label text.
struct Relation {
  std::string subject;
  RelationKind kind = RelationKind::kSuperTopicOf;
  std::string object;

  auto operator<=>(const Relation &) const = default;
  bool operator==(const Relation &) const = default;
};

struct Violation {
  std::string kind;  // cycle, dangling, preferential, ...
  std::string message;
  std::vector<std::string> uris;
};

// Raised when an operation that requires a valid ontology meets an invalid
// one. The message lists the violations.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(const std::string &what, std::vector<Violation> violations)
      : std::runtime_error(what), violations_(std::move(violations)) {}
  const std::vector<Violation> &violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

class Ontology {
 public:
  explicit Ontology(std::string ns = std::string(kDefaultNamespace))
      : ns_(std::move(ns)) {}

  const std::string &ns() const { return ns_; }

  // Adds a topic whose uri is derived from the label and returns the uri.
  // Re-adding the same label is a no-op; a different label mapping to an
  // existing uri is an error.
  std::string AddTopic(std::string_view label);

  // Checked insertion. The subject must be a topic; objects of topic-linking
  // kinds must be topics. relatedEquivalent also inserts the symmetric twin.
  // A superTopicOf edge that would close a cycle throws InputError("cycle").
  // Duplicates are ignored.
  void AddRelation(std::string_view subject, RelationKind kind,
                   std::string_view object);

  // Raw insertion used by parsers; performs no checks, so the result may be
  // invalid. Returns false for a duplicate.
  bool InsertUnchecked(const Relation &relation);

  // Removes a relation if present.
  bool Remove(const Relation &relation);

  bool HasTopic(std::string_view uri) const;
  // Topics (subjects typed as kTopicClass), keyed by uri.
  std::vector<Topic> Topics() const;
  size_t topic_count() const { return typed_.size(); }
  // First label of `uri`, or empty.
  std::string Label(std::string_view uri) const;

  const std::set<Relation> &relations() const { return relations_; }
  bool Has(const Relation &relation) const;

  // Objects o with (subject, kind, o), sorted.
  std::vector<std::string> Objects(std::string_view subject,
                                   RelationKind kind) const;
  // Direct super-topics of `uri`, sorted.
  std::vector<std::string> Parents(std::string_view uri) const;

  bool operator==(const Ontology &other) const {
    return ns_ == other.ns_ && relations_ == other.relations_;
  }

 private:
  std::string ns_;
  std::set<Relation> relations_;
  std::set<std::string, std::less<>> typed_;
  std::map<std::string, std::set<std::string>, std::less<>> parents_;
};

std::vector<Violation> Validate(const Ontology &o);

// Transitive super-topics of `uri`, excluding itself. Throws NotFoundError
// for an unknown topic.
std::set<std::string> Ancestors(const Ontology &o, std::string_view uri);

// Connected components of the relatedEquivalent graph over all topics,
// singletons included, each sorted; clusters ordered by first member.
std::vector<std::vector<std::string>> EquivalenceClusters(const Ontology &o);

// Replaces all preferentialEquivalent relations: every member of every
// equivalence cluster points at the member with the largest count, ties going
// to the lexicographically smaller uri. Throws InputError naming a topic
// without a count.
Ontology AssignPreferential(Ontology o,
                            const std::map<std::string, long long> &article_counts);

// preferentialEquivalent target of `uri`, or `uri` itself when it has none.
std::string PreferredTopic(const Ontology &o, std::string_view uri);

// Throws ValidationError on an invalid ontology.
std::string SerializeNTriples(const Ontology &o);
// Accepts the serializer's dialect. Errors carry the 1-based line number.
Ontology ParseNTriples(std::string_view text,
                       std::string_view ns = kDefaultNamespace);

std::string SerializeCsv(const Ontology &o);
Ontology ParseCsv(std::string_view text, std::string_view ns = kDefaultNamespace);

// Imports "topic-uri<TAB>external-uri" lines as sameAs or relatedLink.
void ImportMappings(Ontology &o, std::string_view text, RelationKind kind);

}  // namespace cso

#endif  // CSO_ONTOLOGY_H_
