#include <gtest/gtest.h>

#include <algorithm>

#include "cso/classifier.h"
#include "cso/text.h"
#include "testing/generators.h"
#include "testing/oracles.h"

namespace cso {
namespace {

Document TitleDoc(std::string title, std::string abstract = "") {
  Document d;
  d.id = "doc";
  d.title = std::move(title);
  d.abstract = std::move(abstract);
  d.year = 2020;
  return d;
}

std::vector<std::string> Joined(const std::vector<Ngram> &grams) {
  std::vector<std::string> out;
  for (const Ngram &g : grams) out.push_back(Join(g, " "));
  return out;
}

class FixtureTest : public ::testing::Test {
 protected:
  Ontology o_ = testing::FixtureOntology();
  LabelIndex labels_{o_};
  ClassifierConfig cfg_;
  std::string U(const char *label) { return TopicUri(label); }
};

TEST(ExtractNgramsTest, Examples) {
  EXPECT_EQ(Joined(ExtractNgrams(TitleDoc("the semantic web"))),
            (std::vector<std::string>{"semantic", "web", "semantic web"}));
  EXPECT_TRUE(ExtractNgrams(Document{}).empty());
  for (const std::string &g : Joined(ExtractNgrams(TitleDoc("deep learning, and e-learning")))) {
    EXPECT_EQ(g.find("learning e"), std::string::npos) << g;
    EXPECT_EQ(g.find("learning and"), std::string::npos) << g;
  }
}

TEST(ExtractNgramsTest, SegmentsDoNotJoinAndDuplicatesStay) {
  Document d = TitleDoc("graph mining", "graph");
  d.keywords = {"mining"};
  std::vector<std::string> grams = Joined(ExtractNgrams(d));
  EXPECT_EQ(grams, (std::vector<std::string>{"graph", "mining", "graph mining", "graph",
                                             "mining"}));
}

TEST(ExtractNgramsTest, OrderIsByLengthThenPosition) {
  EXPECT_EQ(Joined(ExtractNgrams(TitleDoc("alpha beta gamma"))),
            (std::vector<std::string>{"alpha", "beta", "gamma", "alpha beta", "beta gamma",
                                      "alpha beta gamma"}));
}

TEST_F(FixtureTest, ExactMentionMatches) {
  EXPECT_EQ(SyntacticClassify(TitleDoc("Advances in the Semantic Web"), o_, cfg_),
            std::set<std::string>{U("semantic web")});
}

TEST_F(FixtureTest, TypoFallsBelowDefaultThreshold) {
  Document d = TitleDoc("sematic web");
  EXPECT_NEAR(testing::OracleNameSimilarity("sematic web", "semantic web", 0), 1 - 1.0 / 12,
              1e-12);
  EXPECT_TRUE(SyntacticClassify(d, o_, cfg_).empty());
  ClassifierConfig loose;
  loose.syntactic_threshold = 0.9;
  EXPECT_EQ(SyntacticClassify(d, o_, loose), std::set<std::string>{U("semantic web")});
}

TEST_F(FixtureTest, EquivalentLabelMapsToPreferred) {
  EXPECT_EQ(SyntacticClassify(TitleDoc("robust ontology mapping"), o_, cfg_),
            std::set<std::string>{U("ontology matching")});
}

TEST_F(FixtureTest, RecallOnExactMentions) {
  testing::Rng rng(47);
  std::vector<Topic> topics = o_.Topics();
  const std::vector<std::string> filler = {"we", "study", "results", "on", "benchmark",
                                           "with", "a", "new", "approach", "of"};
  for (int i = 0; i < 100; ++i) {
    std::set<std::string> expected;
    std::string text;
    for (int k = 0; k < 3; ++k) {
      const Topic &t = topics[rng() % topics.size()];
      expected.insert(PreferredTopic(o_, t.uri));
      text += filler[rng() % filler.size()] + " " + t.label + ", ";
    }
    std::set<std::string> got = SyntacticClassify(TitleDoc(text), labels_, cfg_);
    for (const std::string &u : expected) ASSERT_TRUE(got.count(u)) << text << " / " << u;
  }
}

TEST_F(FixtureTest, ThresholdSoundnessAndMonotonicity) {
  testing::Rng rng(53);
  const std::vector<std::string> words = {"semantic", "sematic", "web", "webs", "ontology",
                                          "matching", "mapping", "neural", "network",
                                          "networks", "machine", "learning", "deep"};
  for (int i = 0; i < 200; ++i) {
    std::string text;
    for (int k = 0; k < 6; ++k) text += words[rng() % words.size()] + " ";
    Document d = TitleDoc(text);
    std::vector<std::string> grams = Joined(ExtractNgrams(d));
    std::set<std::string> prev;
    bool first = true;
    for (double th : {0.98, 0.94, 0.9, 0.8, 0.7}) {
      ClassifierConfig c;
      c.syntactic_threshold = th;
      std::set<std::string> got = SyntacticClassify(d, labels_, c);
      for (const std::string &u : got) {
        double best = 0;
        for (const auto &e : labels_.entries()) {
          if (e.preferred != u) continue;
          for (const std::string &g : grams) {
            best = std::max(best, testing::OracleNameSimilarity(g, e.label, 0));
          }
        }
        ASSERT_GE(best, th) << text << " -> " << u;
      }
      if (!first) {
        for (const std::string &u : prev) ASSERT_TRUE(got.count(u));
      }
      prev = got;
      first = false;
    }
  }
}

TEST(TaggerTest, DefaultTags) {
  EXPECT_EQ(DefaultTag("novel"), Tag::kAdj);
  EXPECT_EQ(DefaultTag("neural"), Tag::kAdj);
  EXPECT_EQ(DefaultTag("semantic"), Tag::kAdj);
  EXPECT_EQ(DefaultTag("architectures"), Tag::kNoun);
  EXPECT_EQ(DefaultTag("logic"), Tag::kNoun);
  EXPECT_EQ(DefaultTag("we"), Tag::kOther);
  EXPECT_EQ(DefaultTag("propose"), Tag::kOther);
  EXPECT_EQ(DefaultTag("2019"), Tag::kOther);
  EXPECT_EQ(DefaultTag("al"), Tag::kNoun);
}

TEST(CandidatesTest, Examples) {
  EXPECT_EQ(Joined(ExtractCandidates(TitleDoc("novel neural architectures"))),
            std::vector<std::string>{"novel neural architectures"});
  EXPECT_TRUE(ExtractCandidates(TitleDoc("we propose")).empty());
  EXPECT_EQ(Joined(CandidateSpans({{"graph", Tag::kNoun},
                                   {"networks", Tag::kNoun},
                                   {"neural", Tag::kAdj},
                                   {"we", Tag::kOther},
                                   {"fast", Tag::kAdj}})),
            std::vector<std::string>{"graph networks"});
  EXPECT_EQ(Joined(CandidateNgrams(ExtractCandidates(TitleDoc("novel neural architectures")))),
            (std::vector<std::string>{"novel", "neural", "architectures", "novel neural",
                                      "neural architectures", "novel neural architectures"}));
}

TEST(CandidatesTest, PluggableTagger) {
  Tagger all_nouns = [](std::string_view) { return Tag::kNoun; };
  EXPECT_EQ(Joined(ExtractCandidates(TitleDoc("we propose things"), all_nouns)),
            std::vector<std::string>{"we propose things"});
}

TEST_F(FixtureTest, RelevanceIsFrequencyTimesDiversity) {
  std::vector<NgramNeighbours> lists = {
      {"a", {{"machine_learning", 0.9}, {"semantic_web", 0.8}}},
      {"a", {{"machine_learning", 0.9}}},
      {"b", {{"machine_learning", 0.9}, {"ontology_mapping", 0.9}}},
      {"b", {{"machine_learning", 0.9}}},
      {"c", {{"machine_learning", 0.9}, {"unrelated", 0.95}}},
      {"c", {{"Machine_Learning", 0.7}, {"ontology_matching", 0.7}}},
  };
  auto scored = ScoreTopics(lists, labels_);
  // Recount by hand: machine learning 6 hits from {a, b, c}; ontology
  // matching 2 hits (one via its equivalent) from {b, c}; semantic web 1 from {a}.
  ASSERT_EQ(scored.size(), 3u);
  EXPECT_EQ(scored[0], (std::pair<std::string, double>{U("machine learning"), 18}));
  EXPECT_EQ(scored[1], (std::pair<std::string, double>{U("ontology matching"), 4}));
  EXPECT_EQ(scored[2], (std::pair<std::string, double>{U("semantic web"), 1}));
}

TEST_F(FixtureTest, RelevanceMatchesRecountOracle) {
  testing::Rng rng(59);
  std::vector<std::string> pool = {"machine_learning", "semantic_web", "deep_learning",
                                   "ontology_mapping", "ontology_matching", "noise",
                                   "neural_networks", "other"};
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<NgramNeighbours> lists;
    int n = static_cast<int>(rng() % 8);
    for (int i = 0; i < n; ++i) {
      NgramNeighbours l;
      l.ngram = "g" + std::to_string(rng() % 4);
      int k = static_cast<int>(rng() % 4);
      for (int j = 0; j < k; ++j) l.neighbours.emplace_back(pool[rng() % pool.size()], 0.9);
      lists.push_back(l);
    }
    std::map<std::string, std::pair<int, std::set<std::string>>> recount;
    for (const auto &l : lists) {
      for (const auto &[tok, cos] : l.neighbours) {
        std::string label = tok;
        std::replace(label.begin(), label.end(), '_', ' ');
        for (const Topic &t : o_.Topics()) {
          if (t.label != label) continue;
          std::string pref = PreferredTopic(o_, t.uri);
          ++recount[pref].first;
          recount[pref].second.insert(l.ngram);
        }
      }
    }
    auto scored = ScoreTopics(lists, labels_);
    ASSERT_EQ(scored.size(), recount.size());
    for (size_t i = 0; i < scored.size(); ++i) {
      const auto &r = recount.at(scored[i].first);
      ASSERT_EQ(scored[i].second, static_cast<double>(r.first) * r.second.size());
      if (i > 0) {
        ASSERT_TRUE(scored[i - 1].second > scored[i].second ||
                    (scored[i - 1].second == scored[i].second &&
                     scored[i - 1].first < scored[i].first));
      }
    }
  }
}

TEST(ElbowTest, Examples) {
  std::vector<double> a = {10, 9, 8, 1, 0.9, 0.8};
  EXPECT_EQ(ElbowCutoff(a), 3u);
  EXPECT_EQ(testing::OracleElbow(a), 3u);
  std::vector<double> flat = {5, 5, 5, 5};
  EXPECT_EQ(ElbowCutoff(flat), 4u);
  std::vector<double> one = {7};
  EXPECT_EQ(ElbowCutoff(one), 1u);
  std::vector<double> two = {7, 1};
  EXPECT_EQ(ElbowCutoff(two), 2u);
  EXPECT_EQ(ElbowCutoff(std::vector<double>{}), 0u);
}

TEST(ElbowTest, MatchesExhaustiveScan) {
  testing::Rng rng(61);
  for (int trial = 0; trial < 300; ++trial) {
    size_t n = 1 + rng() % 40;
    std::vector<double> s(n);
    // Coarse values so ties are common.
    for (double &v : s) v = static_cast<double>(rng() % 12);
    std::sort(s.rbegin(), s.rend());
    ASSERT_EQ(ElbowCutoff(s), testing::OracleElbow(s)) << trial;
  }
}

TEST_F(FixtureTest, EnrichFollowsTheChain) {
  EXPECT_EQ(Enrich({U("neural networks")}, o_),
            (std::set<std::string>{U("neural networks"), U("machine learning"),
                                   U("artificial intelligence"), U("computer science")}));
  EXPECT_EQ(Enrich({U("computer science")}, o_), std::set<std::string>{U("computer science")});
  EXPECT_THROW(Enrich({TopicUri("ghost")}, o_), NotFoundError);
}

TEST(EnrichTest, ClosureOnRandomOntologies) {
  testing::Rng rng(67);
  for (int trial = 0; trial < 50; ++trial) {
    Ontology o = testing::RandomOntology(rng);
    std::vector<Topic> topics = o.Topics();
    std::set<std::string> s;
    for (int k = 0; k < 3; ++k) s.insert(topics[rng() % topics.size()].uri);
    std::set<std::string> e = Enrich(s, o);
    ASSERT_EQ(Enrich(e, o), e);
    for (const std::string &u : s) ASSERT_TRUE(e.count(u));
    // Every non-seed member is needed: dropping it leaves the set unclosed.
    for (const std::string &u : e) {
      if (s.count(u)) continue;
      std::set<std::string> smaller = e;
      smaller.erase(u);
      ASSERT_NE(Enrich(smaller, o), smaller);
    }
  }
}

TEST_F(FixtureTest, ClassifyWithoutModel) {
  Document d = TitleDoc("Neural networks meet the semantic web");
  for (const EmbeddingModel *m : {static_cast<const EmbeddingModel *>(nullptr)}) {
    Annotation a = Classify(d, o_, labels_, m, cfg_);
    EXPECT_EQ(a.syntactic, (std::set<std::string>{U("neural networks"), U("semantic web")}));
    EXPECT_TRUE(a.semantic.empty());
    EXPECT_EQ(a.union_topics, a.syntactic);
    EXPECT_EQ(a.enhanced,
              (std::set<std::string>{U("neural networks"), U("machine learning"),
                                     U("artificial intelligence"), U("computer science"),
                                     U("semantic web")}));
  }
  EmbeddingModel empty;
  EXPECT_EQ(Classify(d, o_, labels_, &empty, cfg_), Classify(d, o_, labels_, nullptr, cfg_));
}

TEST_F(FixtureTest, SemanticModuleFindsNeighbourTopics) {
  EmbeddingModel m(3, {"nets", "deep", "neural_networks", "machine_learning", "cooking"},
                   {1, 0, 0, 1, 0.1f, 0, 1, 0.05f, 0, 1, 0, 0.1f, 0, 0, 1});
  Document d = TitleDoc("deep nets");
  auto semantic = SemanticClassify(d, labels_, m, cfg_);
  // Each of "deep", "nets" and "deep nets" hits both topics once.
  ASSERT_EQ(semantic.size(), 2u);
  EXPECT_EQ(semantic[0], (std::pair<std::string, double>{U("machine learning"), 9}));
  EXPECT_EQ(semantic[1], (std::pair<std::string, double>{U("neural networks"), 9}));
  Annotation a = Classify(d, o_, labels_, &m, cfg_);
  EXPECT_TRUE(a.syntactic.empty());
  EXPECT_TRUE(a.enhanced.count(U("computer science")));
  EXPECT_EQ(a, Classify(d, o_, labels_, &m, cfg_));
  EXPECT_TRUE(SemanticClassify(TitleDoc("cooking"), labels_, m, cfg_).empty());
  EXPECT_TRUE(SemanticClassify(TitleDoc("we propose"), labels_, m, cfg_).empty());
}

TEST_F(FixtureTest, GluedNgramDoesNotFindItself) {
  EmbeddingModel m(2, {"neural_networks", "deep_learning"}, {1, 0, 1, 0.01f});
  auto semantic = SemanticClassify(TitleDoc("neural networks"), labels_, m, cfg_);
  ASSERT_EQ(semantic.size(), 1u);
  EXPECT_EQ(semantic[0].first, U("deep learning"));
}

TEST_F(FixtureTest, AnnotationRoundTrip) {
  Document d = TitleDoc("Neural networks, \"quoted\"");
  d.keywords = {"semantic web"};
  Annotation a = Classify(d, o_, labels_, nullptr, cfg_);
  a.semantic = {{U("semantic web"), 2.5}};
  std::string line = FormatAnnotation(d, a);
  EXPECT_EQ(line.find('\n'), std::string::npos);
  EXPECT_EQ(ParseAnnotation(line), a);
  EXPECT_EQ(ParseDocument(line), d);
  EXPECT_THROW(ParseAnnotation("{\"id\": \"x\"}"), InputError);
  EXPECT_THROW(ParseAnnotation("not json"), InputError);
}

TEST(ClassifierConfigTest, Parse) {
  ClassifierConfig c = ClassifierConfig::Parse("syntactic_threshold = 0.9\ntop_k_neighbors = 4\n");
  EXPECT_EQ(c.syntactic_threshold, 0.9);
  EXPECT_EQ(c.top_k_neighbors, 4);
  EXPECT_THROW(ClassifierConfig::Parse("syntactic_threshold = 0\n"), InputError);
  EXPECT_THROW(ClassifierConfig::Parse("syntactic_threshold = 1.5\n"), InputError);
  EXPECT_THROW(ClassifierConfig::Parse("top_k_neighbors = 0\n"), InputError);
  EXPECT_THROW(ClassifierConfig::Parse("colour = red\n"), InputError);
}

}  // namespace
}  // namespace cso
