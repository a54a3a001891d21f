#include "cso/corpus.h"

#include <gtest/gtest.h>

#include "testing/generators.h"
#include "testing/oracles.h"

namespace cso {
namespace {

Document Doc(std::string id, std::vector<std::string> kws, int year) {
  Document d;
  d.id = std::move(id);
  d.title = "t";
  d.keywords = std::move(kws);
  d.year = year;
  return d;
}

std::vector<Document> ThreeDocs() {
  return {Doc("1", {"a", "b"}, 2000), Doc("2", {"a", "b"}, 2000), Doc("3", {"a", "c"}, 2001)};
}

TEST(ParseDocumentTest, MapsFields) {
  Document d = ParseDocument(
      R"({"id":"d1","title":"A Study","abstract":"x","keywords":["Semantic Web"],"year":2004})");
  EXPECT_EQ(d.id, "d1");
  EXPECT_EQ(d.title, "A Study");
  EXPECT_EQ(d.abstract, "x");
  EXPECT_EQ(d.keywords, std::vector<std::string>{"Semantic Web"});
  EXPECT_EQ(d.year, 2004);
}

TEST(ParseDocumentTest, MissingAbstractIsEmpty) {
  Document d = ParseDocument(R"({"id":"d1","title":"T","keywords":[],"year":2004})");
  EXPECT_EQ(d.abstract, "");
  EXPECT_TRUE(d.keywords.empty());
}

TEST(ParseDocumentTest, MissingYearIsNamed) {
  try {
    ParseDocument(R"({"id":"d1","title":"T","keywords":[]})", 7);
    FAIL();
  } catch (const InputError &e) {
    std::string what = e.what();
    EXPECT_NE(what.find("missing field: year"), std::string::npos);
    EXPECT_NE(what.find("record 7"), std::string::npos);
  }
}

TEST(ParseDocumentTest, RejectsBadRecords) {
  EXPECT_THROW(ParseDocument(R"({"title":"T","keywords":[],"year":2000})"), InputError);
  EXPECT_THROW(ParseDocument(R"({"id":"x","title":"T","keywords":"a","year":2000})"), InputError);
  EXPECT_THROW(ParseDocument(R"({"id":"x","title":"T","keywords":[],"year":1800})"), InputError);
  EXPECT_THROW(ParseDocument(R"({"id":"x","title":"T","keywords":[],"year":"2000"})"), InputError);
  EXPECT_THROW(ParseDocument("{not json"), InputError);
}

TEST(ParseCorpusTest, SkipsBlankLinesAndRejectsDuplicateIds) {
  std::string line = FormatDocument(Doc("a", {"x"}, 2001));
  EXPECT_EQ(ParseCorpus(line + "\n\n" + FormatDocument(Doc("b", {}, 2002)) + "\n").size(), 2u);
  EXPECT_THROW(ParseCorpus(line + "\n" + line + "\n"), InputError);
}

TEST(ParseCorpusTest, FormatRoundTrips) {
  Document d = Doc("q", {"A \"quoted\" one", "caf\xc3\xa9"}, 1999);
  d.abstract = "line\nbreak";
  EXPECT_EQ(ParseDocument(FormatDocument(d)), d);
}

TEST(NormalizeKeywordTest, Examples) {
  EXPECT_EQ(NormalizeKeyword("Semantic  Web "), "semantic web");
  EXPECT_EQ(NormalizeKeyword("Ontology-Matching"), "ontology matching");
  EXPECT_EQ(NormalizeKeyword("   "), std::nullopt);
  EXPECT_EQ(NormalizeKeyword("--"), std::nullopt);
}

TEST(BuildIndexTest, HandCountedExample) {
  auto docs = ThreeDocs();
  CooccurrenceIndex index = CooccurrenceIndex::Build(docs);
  EXPECT_EQ(index.doc_count(), 3);
  EXPECT_EQ(index.Occurrence("a"), 3);
  EXPECT_EQ(index.PairCount("a", "b"), 2);
  EXPECT_EQ(index.PairByYear("a", "b"), (YearCounts{{2000, 2}}));
  EXPECT_EQ(index.PairCount("a", "c"), 1);
  EXPECT_EQ(index.PairByYear("c", "a"), (YearCounts{{2001, 1}}));
  EXPECT_EQ(index.Debut("c"), 2001);
}

TEST(BuildIndexTest, EmptyStream) {
  CooccurrenceIndex index = CooccurrenceIndex::Build({});
  EXPECT_EQ(index.doc_count(), 0);
  EXPECT_TRUE(index.empty());
  EXPECT_TRUE(index.Vocabulary().empty());
}

TEST(BuildIndexTest, DuplicateKeywordCountsOnce) {
  std::vector<Document> docs = {Doc("1", {"a", "A "}, 2000)};
  CooccurrenceIndex index = CooccurrenceIndex::Build(docs);
  EXPECT_EQ(index.Occurrence("a"), 1);
  EXPECT_EQ(index.vocabulary_size(), 1u);
}

TEST(BuildIndexTest, SingleKeywordDocsCountOccurrenceOnly) {
  std::vector<Document> docs = {Doc("1", {"a"}, 1999), Doc("2", {"a", "b"}, 2005)};
  CooccurrenceIndex index = CooccurrenceIndex::Build(docs);
  EXPECT_EQ(index.Occurrence("a"), 2);
  EXPECT_EQ(index.Debut("a"), 1999);
  EXPECT_EQ(index.PairCount("a", "b"), 1);
}

TEST(CandidatePairsTest, Thresholds) {
  auto docs = ThreeDocs();
  CooccurrenceIndex index = CooccurrenceIndex::Build(docs);
  using Pairs = std::vector<std::pair<std::string, std::string>>;
  EXPECT_EQ(index.CandidatePairs(2), (Pairs{{"a", "b"}}));
  EXPECT_EQ(index.CandidatePairs(1), (Pairs{{"a", "b"}, {"a", "c"}}));
  EXPECT_TRUE(index.CandidatePairs(5).empty());
}

TEST(ContextVectorTest, Examples) {
  auto docs = ThreeDocs();
  CooccurrenceIndex index = CooccurrenceIndex::Build(docs);
  ContextVector v = index.Context("a");
  EXPECT_EQ(v.owner, "a");
  EXPECT_EQ(v.weights, (std::map<std::string, double>{{"b", 2}, {"c", 1}}));
  EXPECT_THROW(index.Context("zzz"), NotFoundError);
  EXPECT_THROW(index.Debut("zzz"), NotFoundError);

  std::vector<Document> alone = {Doc("1", {"solo"}, 2000), Doc("2", {"solo"}, 2001)};
  EXPECT_TRUE(CooccurrenceIndex::Build(alone).Context("solo").weights.empty());
}

TEST(IndexPropertyTest, RandomCorporaMatchRecount) {
  testing::Rng rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    auto docs = testing::RandomCorpus(rng);
    CooccurrenceIndex index = CooccurrenceIndex::Build(docs);
    testing::OracleCorpus oracle(docs);
    ASSERT_EQ(index.Vocabulary(), oracle.vocabulary);
    for (const std::string &x : oracle.vocabulary) {
      ASSERT_EQ(index.Occurrence(x), oracle.Count(x));
      ASSERT_EQ(index.Debut(x), oracle.Debut(x));
      ASSERT_GE(index.Occurrence(x), 1);
      for (const auto &[year, n] : index.OccurrenceByYear(x)) {
        ASSERT_GE(year, index.Debut(x));
        ASSERT_GT(n, 0);
      }
      for (const std::string &y : oracle.vocabulary) {
        if (x == y) continue;
        ASSERT_EQ(index.PairCount(x, y), index.PairCount(y, x));
        ASSERT_EQ(index.PairCount(x, y), oracle.Count(x, y));
        ASSERT_LE(index.PairCount(x, y),
                  std::min(index.Occurrence(x), index.Occurrence(y)));
        for (const auto &[year, n] : index.PairByYear(x, y)) {
          ASSERT_EQ(n, oracle.Count(x, y, year));
        }
      }
    }
  }
}

TEST(IndexPropertyTest, BuildIsIdempotent) {
  testing::Rng rng(5);
  auto docs = testing::RandomCorpus(rng);
  EXPECT_EQ(CooccurrenceIndex::Build(docs), CooccurrenceIndex::Build(docs));
}

TEST(IndexPropertyTest, ShardedMergeEqualsWholeBuild) {
  testing::Rng rng(3);
  auto docs = testing::RandomCorpus(rng);
  CooccurrenceIndex whole = CooccurrenceIndex::Build(docs);
  std::span<const Document> all(docs);
  auto a = CooccurrenceIndex::Build(all.subspan(0, 30));
  auto b = CooccurrenceIndex::Build(all.subspan(30, 40));
  auto c = CooccurrenceIndex::Build(all.subspan(70));

  CooccurrenceIndex left = a;
  left.Merge(b);
  left.Merge(c);
  CooccurrenceIndex right = c;
  CooccurrenceIndex bc = b;
  bc.Merge(a);
  right.Merge(bc);
  EXPECT_EQ(left, whole);
  EXPECT_EQ(right, whole);
}

}  // namespace
}  // namespace cso
