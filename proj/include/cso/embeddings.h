#ifndef CSO_EMBEDDINGS_H_
#define CSO_EMBEDDINGS_H_

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cso/error.h"

namespace cso {

// Sentences are token runs; collocations and training windows never cross
// a sentence boundary.
using Sentences = std::vector<std::vector<std::string>>;

// Underscore-joined multiword phrases with their collocation scores.
class PhraseTable {
 public:
  void Add(std::string phrase, double score);
  bool Contains(std::string_view phrase) const;
  std::optional<double> Score(std::string_view phrase) const;
  size_t size() const { return phrases_.size(); }
  const std::map<std::string, double, std::less<>> &phrases() const {
    return phrases_;
  }

  // "phrase<TAB>score" lines sorted by phrase.
  std::string Serialize() const;
  static PhraseTable Parse(std::string_view text);

 private:
  std::map<std::string, double, std::less<>> phrases_;
};

struct CollocationOptions {
  double delta = 5;
  double threshold = 1e-4;
  int passes = 2;
};

// Each pass scores adjacent pairs by (count(ab) - delta) / (count(a) *
// count(b)) and keeps those with count(ab) > delta and a score above the
// threshold; the stream is then rewritten with the kept pairs glued so the
// next pass can find longer phrases.
PhraseTable DetectCollocations(const Sentences &sentences,
                               const CollocationOptions &options = {});

// Glues multiword matches with underscores, longest match first, scanning
// left to right: ontology labels first, then phrases. Only tokens without an
// underscore take part in a match, so gluing is idempotent.
class Gluer {
 public:
  Gluer(const std::vector<std::string> &labels, const PhraseTable &phrases);

  std::vector<std::string> Glue(const std::vector<std::string> &tokens) const;
  // Tokenizes text into runs and glues each run.
  Sentences GlueText(std::string_view text) const;

 private:
  struct Patterns {
    std::set<std::vector<std::string>> seqs;
    size_t max_len = 0;
    void Add(std::vector<std::string> seq);
  };
  static std::vector<std::string> Apply(const Patterns &p,
                                        const std::vector<std::string> &tokens);

  Patterns labels_;
  Patterns phrases_;
};

// Tokenizes `text` and glues it; the flattened token stream.
std::vector<std::string> GlueTokens(std::string_view text,
                                    const std::vector<std::string> &labels,
                                    const PhraseTable &phrases);

struct TrainingMeta {
  int window = 5;
  int negatives = 5;
  int epochs = 5;
  uint64_t seed = 1;

  bool operator==(const TrainingMeta &) const = default;
};

// Input vectors of a trained skip-gram model. Tokens are sorted.
class EmbeddingModel {
 public:
  EmbeddingModel() = default;
  // `vectors` holds tokens.size() * dimension floats, row-major. Tokens are
  // sorted on construction.
  EmbeddingModel(int dimension, std::vector<std::string> tokens,
                 std::vector<float> vectors, TrainingMeta meta = {});

  int dimension() const { return dimension_; }
  size_t size() const { return tokens_.size(); }
  const std::vector<std::string> &tokens() const { return tokens_; }
  const TrainingMeta &meta() const { return meta_; }

  std::optional<size_t> Find(std::string_view token) const;
  std::span<const float> Vector(size_t index) const;
  double norm(size_t index) const { return norms_[index]; }

  // Binary format: "CSOEMB01" magic, u32 version, u32 dimension, u64 vocab
  // size, u32 window, u32 negatives, u32 epochs, u64 seed, then each token as
  // u32 length + bytes, then little-endian float32 vectors. All integers are
  // little-endian.
  std::string Serialize() const;
  static EmbeddingModel Deserialize(std::string_view bytes);

  bool operator==(const EmbeddingModel &other) const {
    return dimension_ == other.dimension_ && tokens_ == other.tokens_ &&
           vectors_ == other.vectors_ && meta_ == other.meta_;
  }

 private:
  int dimension_ = 0;
  std::vector<std::string> tokens_;
  std::vector<float> vectors_;
  std::vector<double> norms_;
  TrainingMeta meta_;
};

struct SgnsOptions {
  int dimension = 128;
  int window = 5;
  int negatives = 5;
  int epochs = 5;
  long long min_count = 2;
  double subsample = 1e-3;
  double learning_rate = 0.025;
  double min_learning_rate = 0.0001;
  uint64_t seed = 1;
  int workers = 1;

  void Check() const;
  // Flat "key = value" text; also accepts the collocation keys, which are
  // written to `collocations` when given.
  static SgnsOptions Parse(std::string_view text,
                           CollocationOptions *collocations = nullptr);
  std::vector<std::pair<std::string, std::string>> Entries() const;
};

// Skip-gram with negative sampling. Negatives follow unigram count^0.75; the
// learning rate decays linearly. With one worker the result depends only on
// the input and the seed; several workers update shared vectors without
// locks. Throws InputError when no token reaches min_count.
EmbeddingModel TrainSkipgram(const Sentences &sentences,
                             const SgnsOptions &options = {});

struct SgnsGradient {
  double loss = 0;
  std::vector<double> center;
  std::vector<double> context;
  std::vector<std::vector<double>> negatives;
};

// loss = -log s(u.v) - sum log s(-n.v) for center v, context u and negatives
// n, with the exact gradient with respect to each input.
SgnsGradient SgnsLossAndGradient(std::span<const double> center,
                                 std::span<const double> context,
                                 const std::vector<std::vector<double>> &negatives);

// Vector of the underscore-joined n-gram when it is in the vocabulary, else
// the mean of its in-vocabulary tokens; nullopt when none is known.
std::optional<std::vector<float>> VectorForNgram(
    const EmbeddingModel &m, const std::vector<std::string> &tokens);

// Top-k tokens by cosine to `query`, descending, ties broken by token.
// `exclude` is skipped.
std::vector<std::pair<std::string, double>> MostSimilar(
    const EmbeddingModel &m, std::span<const float> query, size_t k,
    std::string_view exclude = {});
// Neighbours of a vocabulary token, the token itself excluded. Throws
// NotFoundError for an unknown token.
std::vector<std::pair<std::string, double>> MostSimilar(
    const EmbeddingModel &m, std::string_view token, size_t k);

}  // namespace cso

#endif  // CSO_EMBEDDINGS_H_
