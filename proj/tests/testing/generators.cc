#include "testing/generators.h"

#include <algorithm>
#include <cstdio>
#include <set>

namespace cso::testing {

namespace {

std::string Numbered(const char *prefix, int i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s %02d", prefix, i);
  return buf;
}

bool Chance(Rng &rng, double p) {
  return std::uniform_real_distribution<double>(0, 1)(rng) < p;
}

int Uniform(Rng &rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

Document MakeDoc(int n, std::vector<std::string> keywords, int year) {
  Document d;
  d.id = "d" + std::to_string(n);
  d.title = "Document " + std::to_string(n);
  d.keywords = std::move(keywords);
  d.year = year;
  return d;
}

}  // namespace

PlantedTaxonomy PlantTaxonomy(uint64_t seed, const PlantedOptions &options) {
  Rng rng(seed);
  PlantedTaxonomy p;
  for (int i = 0; i < 20; ++i) p.topics.push_back(Numbered("topic", i));
  const std::string &root = p.topics[0];
  std::vector<int> parent_of(20, -1);
  for (int m = 1; m <= 4; ++m) {
    parent_of[m] = 0;
    p.edges.emplace_back(root, p.topics[m]);
  }
  for (int l = 5; l < 20; ++l) {
    parent_of[l] = 1 + (l - 5) % 4;
    p.edges.emplace_back(p.topics[parent_of[l]], p.topics[l]);
  }

  for (int d = 0; d < options.docs; ++d) {
    int offset = d * options.years / options.docs;
    int year = options.first_year + offset;
    int focal = offset == 0 ? 0 : offset == 1 ? Uniform(rng, 1, 4) : Uniform(rng, 5, 19);
    std::vector<std::string> kws = {p.topics[focal]};
    for (int a = parent_of[focal]; a >= 0; a = parent_of[a]) {
      if (Chance(rng, options.ancestor_prob)) kws.push_back(p.topics[a]);
    }
    p.docs.push_back(MakeDoc(d, std::move(kws), year));
  }
  return p;
}

TwoSenseCorpus PlantTwoSense(uint64_t seed, int java_docs, double programming_share) {
  TwoSenseCorpus c;
  c.planted = PlantTaxonomy(seed);
  c.docs = c.planted.docs;
  c.programming = {"bytecode", "garbage collection", "jvm", "object orientation"};
  c.geography = {"coffee", "indonesia", "island", "volcano"};
  Rng rng(seed ^ 0x5eed);
  int n = static_cast<int>(c.docs.size());
  for (int i = 0; i < java_docs; ++i) {
    bool programming = i < static_cast<int>(java_docs * programming_share + 0.5);
    const auto &cluster = programming ? c.programming : c.geography;
    std::vector<std::string> picked = cluster;
    std::shuffle(picked.begin(), picked.end(), rng);
    picked.resize(2);
    picked.push_back("Java");
    c.docs.push_back(MakeDoc(n + i, std::move(picked), Uniform(rng, 2000, 2004)));
  }
  return c;
}

std::vector<Document> GlueCorpus(uint64_t seed, int docs, double glue_prob) {
  Rng rng(seed);
  std::vector<Document> out;
  for (int d = 0; d < docs; ++d) {
    int pair = Uniform(rng, 0, 9);
    std::vector<std::string> kws = {Numbered("base", 2 * pair), Numbered("base", 2 * pair + 1)};
    if (Chance(rng, glue_prob)) kws.push_back("glue");
    out.push_back(MakeDoc(d, std::move(kws), Uniform(rng, 2000, 2004)));
  }
  return out;
}

std::vector<Document> RandomCorpus(Rng &rng, const RandomCorpusOptions &options) {
  std::vector<Document> out;
  for (int d = 0; d < options.docs; ++d) {
    int k = Uniform(rng, 0, options.max_keywords);
    std::vector<std::string> kws;
    for (int i = 0; i < k; ++i) {
      int w = Uniform(rng, 0, options.vocabulary - 1);
      std::string base = "kw " + std::string(1, static_cast<char>('a' + w % 26)) +
                         std::to_string(w / 26);
      switch (Uniform(rng, 0, 3)) {
        case 0:
          kws.push_back(base);
          break;
        case 1:
          kws.push_back(" KW  " + base.substr(3) + " ");
          break;
        case 2:
          kws.push_back("Kw-" + base.substr(3));
          break;
        default:
          kws.push_back(base);
          kws.push_back(base);  // repeated within the document
      }
    }
    int year = options.first_year + Uniform(rng, 0, options.years - 1);
    out.push_back(MakeDoc(d, std::move(kws), year));
  }
  return out;
}

std::string RandomLabel(Rng &rng) {
  static const char *const kWords[] = {
      "semantic", "web",     "data",      "mining",     "caf\xc3\xa9",
      "graph",    "neural",  "say \"hi\"", "a, b",       "back\\slash",
      "two\nlines", "tab\there", "<angle>", "x_y",       "\xe6\x97\xa5\xe6\x9c\xac",
      "percent%", "C++",     "learning",  "{brace}",    "logic"};
  int n = Uniform(rng, 1, 3);
  std::string out;
  for (int i = 0; i < n; ++i) {
    if (i > 0) out += ' ';
    out += kWords[Uniform(rng, 0, std::size(kWords) - 1)];
  }
  return out;
}

Ontology RandomOntology(Rng &rng, int topics) {
  Ontology o;
  std::vector<std::string> uris;
  std::set<std::string> seen;
  while (static_cast<int>(uris.size()) < topics) {
    std::string label = RandomLabel(rng) + " " + std::to_string(uris.size());
    std::string uri = TopicUri(label, o.ns());
    if (!seen.insert(uri).second) continue;
    uris.push_back(o.AddTopic(label));
  }
  int n = static_cast<int>(uris.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (Chance(rng, 0.15)) o.AddRelation(uris[i], RelationKind::kSuperTopicOf, uris[j]);
    }
  }
  for (int e = 0; e < n / 3; ++e) {
    int a = Uniform(rng, 0, n - 1);
    int b = Uniform(rng, 0, n - 1);
    if (a != b) o.AddRelation(uris[a], RelationKind::kContributesTo, uris[b]);
  }
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  int pos = 0;
  for (int c = 0; c < 2 && pos + 3 <= n; ++c) {
    int size = Uniform(rng, 2, 3);
    for (int k = 1; k < size; ++k) {
      o.AddRelation(uris[order[pos]], RelationKind::kRelatedEquivalent,
                    uris[order[pos + k]]);
    }
    pos += size;
  }
  for (int i = 0; i < n; ++i) {
    if (Chance(rng, 0.2)) {
      o.AddRelation(uris[i], RelationKind::kSameAs,
                    "http://dbpedia.org/resource/Topic_" + std::to_string(i));
    }
    if (Chance(rng, 0.2)) {
      o.AddRelation(uris[i], RelationKind::kRelatedLink,
                    "https://en.wikipedia.org/wiki/Topic_" + std::to_string(i));
    }
  }
  std::map<std::string, long long> counts;
  for (const std::string &u : uris) counts[u] = Uniform(rng, 1, 5);
  return AssignPreferential(std::move(o), counts);
}

TopicGraph RandomTopicGraph(Rng &rng, int nodes, int edges) {
  TopicGraph g;
  for (int i = 0; i < nodes; ++i) g.AddNode("n" + std::to_string(i));
  for (int e = 0; e < edges; ++e) {
    int a = Uniform(rng, 0, nodes - 1);
    int b = Uniform(rng, 0, nodes - 1);
    int roll = Uniform(rng, 0, 9);
    EdgeKind kind = roll < 6   ? EdgeKind::kSuperTopicOf
                    : roll < 8 ? EdgeKind::kContributesTo
                               : EdgeKind::kRelatedEquivalent;
    // Two decimals so equal weights, and hence tie-breaks, occur.
    double w = Uniform(rng, 1, 100) / 100.0;
    g.AddEdge({"n" + std::to_string(a), "n" + std::to_string(b), kind, w});
  }
  return g;
}

SynonymCorpus PlantSynonyms(uint64_t seed, int sentences, int pool) {
  Rng rng(seed);
  SynonymCorpus c;
  for (int p = 0; p < 5; ++p) {
    c.pairs.emplace_back("syn" + std::to_string(p) + "a", "syn" + std::to_string(p) + "b");
  }
  for (int i = 0; i < sentences; ++i) {
    int p = Uniform(rng, 0, 4);
    std::vector<std::string> s;
    for (int k = 0; k < 4; ++k) {
      s.push_back("ctx" + std::to_string(p) + "_" + std::to_string(Uniform(rng, 0, pool - 1)));
    }
    const auto &pair = c.pairs[p];
    s.insert(s.begin() + Uniform(rng, 0, 4), Chance(rng, 0.5) ? pair.first : pair.second);
    c.sentences.push_back(std::move(s));
  }
  return c;
}

Ontology FixtureOntology() {
  Ontology o;
  auto t = [&](const char *label) { return o.AddTopic(label); };
  std::string cs = t("computer science");
  std::string ai = t("artificial intelligence");
  std::string ml = t("machine learning");
  std::string nn = t("neural networks");
  std::string dl = t("deep learning");
  std::string sw = t("semantic web");
  std::string om = t("ontology matching");
  std::string omap = t("ontology mapping");
  std::string ir = t("information retrieval");
  std::string sws = t("semantic web services");
  o.AddRelation(cs, RelationKind::kSuperTopicOf, ai);
  o.AddRelation(ai, RelationKind::kSuperTopicOf, ml);
  o.AddRelation(ml, RelationKind::kSuperTopicOf, nn);
  o.AddRelation(nn, RelationKind::kSuperTopicOf, dl);
  o.AddRelation(cs, RelationKind::kSuperTopicOf, sw);
  o.AddRelation(cs, RelationKind::kSuperTopicOf, ir);
  o.AddRelation(sw, RelationKind::kSuperTopicOf, om);
  o.AddRelation(sw, RelationKind::kSuperTopicOf, sws);
  o.AddRelation(om, RelationKind::kRelatedEquivalent, omap);
  o.AddRelation(ml, RelationKind::kContributesTo, ir);
  std::map<std::string, long long> counts;
  for (const Topic &topic : o.Topics()) counts[topic.uri] = 10;
  counts[om] = 120;
  counts[omap] = 80;
  return AssignPreferential(std::move(o), counts);
}

}  // namespace cso::testing
