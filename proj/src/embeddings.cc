#include "cso/embeddings.h"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>
#include <unordered_map>

#include "cso/config.h"
#include "cso/text.h"

namespace cso {

namespace {

constexpr char kMagic[] = "CSOEMB01";
constexpr uint32_t kVersion = 1;

bool HasUnderscore(std::string_view token) {
  return token.find('_') != std::string_view::npos;
}

void PutU32(std::string &out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void PutU64(std::string &out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::string_view Take(size_t n) {
    if (bytes_.size() - pos_ < n) throw InputError("model: truncated file");
    std::string_view out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  uint64_t Uint(int width) {
    std::string_view b = Take(width);
    uint64_t v = 0;
    for (int i = width - 1; i >= 0; --i) {
      v = (v << 8) | static_cast<unsigned char>(b[i]);
    }
    return v;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::string_view bytes_;
  size_t pos_ = 0;
};

double Softplus(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double Sigmoid(double x) {
  if (x >= 0) return 1 / (1 + std::exp(-x));
  double e = std::exp(x);
  return e / (1 + e);
}

template <bool kShared>
float Load(const float *p) {
  if constexpr (kShared) {
    return std::atomic_ref<float>(*const_cast<float *>(p))
        .load(std::memory_order_relaxed);
  } else {
    return *p;
  }
}

template <bool kShared>
void Store(float *p, float v) {
  if constexpr (kShared) {
    std::atomic_ref<float>(*p).store(v, std::memory_order_relaxed);
  } else {
    *p = v;
  }
}

struct TrainingState {
  int dim = 0;
  std::vector<float> in;
  std::vector<float> out;
  std::vector<double> keep_prob;
  std::vector<double> neg_cdf;
};

template <bool kShared>
void TrainShard(TrainingState &st, const std::vector<std::vector<uint32_t>> &corpus,
                size_t begin, size_t end, const SgnsOptions &opt, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int dim = st.dim;
  const double neg_total = st.neg_cdf.empty() ? 0 : st.neg_cdf.back();

  long long shard_words = 0;
  for (size_t s = begin; s < end; ++s) shard_words += static_cast<long long>(corpus[s].size());
  double total_work = static_cast<double>(shard_words) * opt.epochs;
  long long done = 0;

  std::vector<float> grad(dim);
  std::vector<uint32_t> kept;
  auto update = [&](uint32_t center, uint32_t context, float alpha) {
    float *v = &st.in[static_cast<size_t>(center) * dim];
    std::fill(grad.begin(), grad.end(), 0.0f);
    for (int d = 0; d <= opt.negatives; ++d) {
      uint32_t target = context;
      float label = 1;
      if (d > 0) {
        double r = unit(rng) * neg_total;
        auto it = std::upper_bound(st.neg_cdf.begin(), st.neg_cdf.end(), r);
        if (it == st.neg_cdf.end()) --it;
        target = static_cast<uint32_t>(it - st.neg_cdf.begin());
        if (target == context) continue;
        label = 0;
      }
      float *u = &st.out[static_cast<size_t>(target) * dim];
      double f = 0;
      for (int k = 0; k < dim; ++k) f += Load<kShared>(v + k) * Load<kShared>(u + k);
      float g = static_cast<float>((label - Sigmoid(f)) * alpha);
      for (int k = 0; k < dim; ++k) {
        float uk = Load<kShared>(u + k);
        grad[k] += g * uk;
        Store<kShared>(u + k, uk + g * Load<kShared>(v + k));
      }
    }
    for (int k = 0; k < dim; ++k) Store<kShared>(v + k, Load<kShared>(v + k) + grad[k]);
  };

  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    for (size_t s = begin; s < end; ++s) {
      const std::vector<uint32_t> &sentence = corpus[s];
      double progress = total_work > 0 ? static_cast<double>(done) / total_work : 0;
      float alpha = static_cast<float>(std::max(
          opt.min_learning_rate,
          opt.learning_rate - (opt.learning_rate - opt.min_learning_rate) * progress));
      done += static_cast<long long>(sentence.size());
      kept.clear();
      for (uint32_t w : sentence) {
        if (st.keep_prob[w] >= 1 || unit(rng) < st.keep_prob[w]) kept.push_back(w);
      }
      for (size_t i = 0; i < kept.size(); ++i) {
        int span = opt.window - static_cast<int>(rng() % static_cast<uint64_t>(opt.window));
        size_t lo = i >= static_cast<size_t>(span) ? i - span : 0;
        size_t hi = std::min(kept.size() - 1, i + span);
        for (size_t j = lo; j <= hi; ++j) {
          if (j != i) update(kept[i], kept[j], alpha);
        }
      }
    }
  }
}

[[noreturn]] void BadOption(const std::string &key, const std::string &why) {
  throw InputError("config: '" + key + "' " + why);
}

}  // namespace

void PhraseTable::Add(std::string phrase, double score) {
  auto [it, inserted] = phrases_.try_emplace(std::move(phrase), score);
  if (!inserted) it->second = std::max(it->second, score);
}

bool PhraseTable::Contains(std::string_view phrase) const {
  return phrases_.find(phrase) != phrases_.end();
}

std::optional<double> PhraseTable::Score(std::string_view phrase) const {
  auto it = phrases_.find(phrase);
  if (it == phrases_.end()) return std::nullopt;
  return it->second;
}

std::string PhraseTable::Serialize() const {
  std::string out;
  for (const auto &[phrase, score] : phrases_) {
    out += phrase;
    out += '\t';
    out += FormatDouble(score);
    out += '\n';
  }
  return out;
}

PhraseTable PhraseTable::Parse(std::string_view text) {
  PhraseTable table;
  int line_no = 0;
  for (const std::string &line : SplitLines(text)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    std::vector<std::string> parts = Split(line, '\t');
    if (parts.size() != 2 || parts[0].empty()) {
      throw InputError("line " + std::to_string(line_no) +
                       ": expected 'phrase<TAB>score'");
    }
    table.Add(parts[0], ParseDouble({"score", parts[1], line_no}));
  }
  return table;
}

PhraseTable DetectCollocations(const Sentences &sentences,
                               const CollocationOptions &options) {
  PhraseTable table;
  Sentences cur = sentences;
  for (int pass = 0; pass < options.passes; ++pass) {
    std::unordered_map<std::string, long long> unigrams;
    std::map<std::pair<std::string, std::string>, long long> bigrams;
    for (const auto &s : cur) {
      for (size_t i = 0; i < s.size(); ++i) {
        ++unigrams[s[i]];
        if (i + 1 < s.size()) ++bigrams[{s[i], s[i + 1]}];
      }
    }
    std::set<std::pair<std::string, std::string>> found;
    for (const auto &[pair, n] : bigrams) {
      if (static_cast<double>(n) <= options.delta) continue;
      double score = (static_cast<double>(n) - options.delta) /
                     (static_cast<double>(unigrams[pair.first]) *
                      static_cast<double>(unigrams[pair.second]));
      if (score > options.threshold) {
        table.Add(pair.first + "_" + pair.second, score);
        found.insert(pair);
      }
    }
    if (found.empty()) break;
    for (auto &s : cur) {
      std::vector<std::string> rewritten;
      for (size_t i = 0; i < s.size(); ++i) {
        if (i + 1 < s.size() && found.count({s[i], s[i + 1]})) {
          rewritten.push_back(s[i] + "_" + s[i + 1]);
          ++i;
        } else {
          rewritten.push_back(s[i]);
        }
      }
      s = std::move(rewritten);
    }
  }
  return table;
}

void Gluer::Patterns::Add(std::vector<std::string> seq) {
  if (seq.size() < 2) return;
  for (const std::string &t : seq) {
    if (t.empty() || HasUnderscore(t)) return;
  }
  max_len = std::max(max_len, seq.size());
  seqs.insert(std::move(seq));
}

Gluer::Gluer(const std::vector<std::string> &labels, const PhraseTable &phrases) {
  for (const std::string &label : labels) labels_.Add(Tokenize(label));
  for (const auto &entry : phrases.phrases()) phrases_.Add(Split(entry.first, '_'));
}

std::vector<std::string> Gluer::Apply(const Patterns &p,
                                      const std::vector<std::string> &tokens) {
  std::vector<std::string> out;
  size_t n = tokens.size();
  size_t i = 0;
  while (i < n) {
    size_t run = 0;
    while (i + run < n && run < p.max_len && !HasUnderscore(tokens[i + run])) ++run;
    size_t matched = 0;
    for (size_t len = run; len >= 2; --len) {
      std::vector<std::string> slice(tokens.begin() + i, tokens.begin() + i + len);
      if (p.seqs.count(slice)) {
        matched = len;
        break;
      }
    }
    if (matched > 0) {
      out.push_back(Join({tokens.begin() + i, tokens.begin() + i + matched}, "_"));
      i += matched;
    } else {
      out.push_back(tokens[i]);
      ++i;
    }
  }
  return out;
}

std::vector<std::string> Gluer::Glue(const std::vector<std::string> &tokens) const {
  return Apply(phrases_, Apply(labels_, tokens));
}

Sentences Gluer::GlueText(std::string_view text) const {
  Sentences out;
  for (const auto &run : TokenRuns(text)) out.push_back(Glue(run));
  return out;
}

std::vector<std::string> GlueTokens(std::string_view text,
                                    const std::vector<std::string> &labels,
                                    const PhraseTable &phrases) {
  std::vector<std::string> out;
  for (auto &run : Gluer(labels, phrases).GlueText(text)) {
    for (auto &t : run) out.push_back(std::move(t));
  }
  return out;
}

EmbeddingModel::EmbeddingModel(int dimension, std::vector<std::string> tokens,
                               std::vector<float> vectors, TrainingMeta meta)
    : dimension_(dimension), meta_(meta) {
  if (dimension < 1) throw InputError("model: dimension must be >= 1");
  size_t dim = static_cast<size_t>(dimension);
  if (vectors.size() != tokens.size() * dim) {
    throw InputError("model: vector data does not match vocabulary size");
  }
  std::vector<size_t> order(tokens.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return tokens[a] < tokens[b]; });
  tokens_.reserve(tokens.size());
  vectors_.reserve(vectors.size());
  for (size_t i : order) {
    const std::string &t = tokens[i];
    if (t.empty() || t.find(' ') != std::string::npos) {
      throw InputError("model: invalid token '" + t + "'");
    }
    if (!tokens_.empty() && tokens_.back() == t) {
      throw InputError("model: duplicate token '" + t + "'");
    }
    tokens_.push_back(t);
    vectors_.insert(vectors_.end(), vectors.begin() + i * dim,
                    vectors.begin() + (i + 1) * dim);
  }
  norms_.resize(tokens_.size());
  for (size_t i = 0; i < tokens_.size(); ++i) {
    double sum = 0;
    for (float v : Vector(i)) sum += static_cast<double>(v) * v;
    norms_[i] = std::sqrt(sum);
  }
}

std::optional<size_t> EmbeddingModel::Find(std::string_view token) const {
  auto it = std::lower_bound(tokens_.begin(), tokens_.end(), token);
  if (it == tokens_.end() || *it != token) return std::nullopt;
  return static_cast<size_t>(it - tokens_.begin());
}

std::span<const float> EmbeddingModel::Vector(size_t index) const {
  size_t dim = static_cast<size_t>(dimension_);
  return std::span<const float>(vectors_).subspan(index * dim, dim);
}

std::string EmbeddingModel::Serialize() const {
  std::string out(kMagic, 8);
  PutU32(out, kVersion);
  PutU32(out, static_cast<uint32_t>(dimension_));
  PutU64(out, tokens_.size());
  PutU32(out, static_cast<uint32_t>(meta_.window));
  PutU32(out, static_cast<uint32_t>(meta_.negatives));
  PutU32(out, static_cast<uint32_t>(meta_.epochs));
  PutU64(out, meta_.seed);
  for (const std::string &t : tokens_) {
    PutU32(out, static_cast<uint32_t>(t.size()));
    out += t;
  }
  for (float v : vectors_) PutU32(out, std::bit_cast<uint32_t>(v));
  return out;
}

EmbeddingModel EmbeddingModel::Deserialize(std::string_view bytes) {
  Reader r(bytes);
  if (r.Take(8) != std::string_view(kMagic, 8)) throw InputError("model: bad magic");
  uint64_t version = r.Uint(4);
  if (version != kVersion) {
    throw InputError("model: unsupported version " + std::to_string(version));
  }
  uint64_t dim = r.Uint(4);
  uint64_t count = r.Uint(8);
  TrainingMeta meta;
  meta.window = static_cast<int>(r.Uint(4));
  meta.negatives = static_cast<int>(r.Uint(4));
  meta.epochs = static_cast<int>(r.Uint(4));
  meta.seed = r.Uint(8);
  if (dim == 0 || dim > (1u << 20)) throw InputError("model: bad dimension");
  if (count > bytes.size()) throw InputError("model: truncated file");
  std::vector<std::string> tokens;
  tokens.reserve(count);
  for (uint64_t i = 0; i < count; ++i) {
    uint64_t len = r.Uint(4);
    tokens.emplace_back(r.Take(len));
  }
  if (count * dim * 4 > bytes.size()) throw InputError("model: truncated file");
  std::vector<float> vectors(count * dim);
  for (float &v : vectors) v = std::bit_cast<float>(static_cast<uint32_t>(r.Uint(4)));
  if (!r.done()) throw InputError("model: trailing bytes");
  if (!std::is_sorted(tokens.begin(), tokens.end())) {
    throw InputError("model: token table not sorted");
  }
  return EmbeddingModel(static_cast<int>(dim), std::move(tokens), std::move(vectors),
                        meta);
}

void SgnsOptions::Check() const {
  if (dimension < 1) BadOption("dimension", "must be >= 1");
  if (window < 1) BadOption("window", "must be >= 1");
  if (negatives < 0) BadOption("negatives", "must be >= 0");
  if (epochs < 1) BadOption("epochs", "must be >= 1");
  if (min_count < 1) BadOption("min_count", "must be >= 1");
  if (!(subsample >= 0)) BadOption("subsample", "must be >= 0");
  if (!(learning_rate > 0)) BadOption("learning_rate", "must be > 0");
  if (!(min_learning_rate > 0 && min_learning_rate <= learning_rate)) {
    BadOption("min_learning_rate", "must be in (0, learning_rate]");
  }
  if (workers < 1) BadOption("workers", "must be >= 1");
}

SgnsOptions SgnsOptions::Parse(std::string_view text,
                               CollocationOptions *collocations) {
  SgnsOptions opt;
  CollocationOptions coll;
  auto small_int = [](const KeyValue &kv) {
    long long v = ParseInteger(kv);
    if (v < 0 || v > 1000000) BadOption(kv.key, "out of range");
    return static_cast<int>(v);
  };
  for (const KeyValue &kv : ParseKeyValues(text)) {
    if (kv.key == "dimension") {
      opt.dimension = small_int(kv);
    } else if (kv.key == "window") {
      opt.window = small_int(kv);
    } else if (kv.key == "negatives") {
      opt.negatives = small_int(kv);
    } else if (kv.key == "epochs") {
      opt.epochs = small_int(kv);
    } else if (kv.key == "min_count") {
      opt.min_count = ParseInteger(kv);
    } else if (kv.key == "subsample") {
      opt.subsample = ParseDouble(kv);
    } else if (kv.key == "learning_rate") {
      opt.learning_rate = ParseDouble(kv);
    } else if (kv.key == "min_learning_rate") {
      opt.min_learning_rate = ParseDouble(kv);
    } else if (kv.key == "collocation_delta") {
      coll.delta = ParseDouble(kv);
    } else if (kv.key == "collocation_threshold") {
      coll.threshold = ParseDouble(kv);
    } else if (kv.key == "collocation_passes") {
      coll.passes = small_int(kv);
    } else {
      throw InputError("line " + std::to_string(kv.line) + ": unknown key '" +
                       kv.key + "'");
    }
  }
  opt.Check();
  if (collocations != nullptr) *collocations = coll;
  return opt;
}

std::vector<std::pair<std::string, std::string>> SgnsOptions::Entries() const {
  return {
      {"dimension", std::to_string(dimension)},
      {"window", std::to_string(window)},
      {"negatives", std::to_string(negatives)},
      {"epochs", std::to_string(epochs)},
      {"min_count", std::to_string(min_count)},
      {"subsample", FormatDouble(subsample)},
      {"learning_rate", FormatDouble(learning_rate)},
      {"min_learning_rate", FormatDouble(min_learning_rate)},
  };
}

EmbeddingModel TrainSkipgram(const Sentences &sentences, const SgnsOptions &options) {
  options.Check();
  std::map<std::string, long long> counts;
  for (const auto &s : sentences) {
    for (const std::string &t : s) ++counts[t];
  }
  std::vector<std::string> vocab;
  std::vector<long long> freq;
  for (const auto &[t, n] : counts) {
    if (n >= options.min_count) {
      vocab.push_back(t);
      freq.push_back(n);
    }
  }
  if (vocab.empty()) throw InputError("empty vocabulary: no token reaches min_count");

  std::unordered_map<std::string, uint32_t> ids;
  for (size_t i = 0; i < vocab.size(); ++i) ids.emplace(vocab[i], static_cast<uint32_t>(i));
  std::vector<std::vector<uint32_t>> corpus;
  long long total_words = 0;
  for (const auto &s : sentences) {
    std::vector<uint32_t> ids_of;
    for (const std::string &t : s) {
      auto it = ids.find(t);
      if (it != ids.end()) ids_of.push_back(it->second);
    }
    total_words += static_cast<long long>(ids_of.size());
    if (ids_of.size() > 1) corpus.push_back(std::move(ids_of));
  }

  TrainingState st;
  st.dim = options.dimension;
  size_t cells = vocab.size() * static_cast<size_t>(options.dimension);
  st.in.resize(cells);
  st.out.assign(cells, 0.0f);
  std::mt19937_64 init(options.seed);
  std::uniform_real_distribution<float> jitter(-0.5f, 0.5f);
  for (float &v : st.in) v = jitter(init) / static_cast<float>(options.dimension);

  st.keep_prob.resize(vocab.size(), 1.0);
  if (options.subsample > 0) {
    double t = options.subsample * static_cast<double>(total_words);
    for (size_t i = 0; i < vocab.size(); ++i) {
      double f = static_cast<double>(freq[i]);
      st.keep_prob[i] = (std::sqrt(f / t) + 1) * t / f;
    }
  }
  double acc = 0;
  for (long long n : freq) {
    acc += std::pow(static_cast<double>(n), 0.75);
    st.neg_cdf.push_back(acc);
  }

  size_t workers = std::min<size_t>(static_cast<size_t>(options.workers),
                                    std::max<size_t>(1, corpus.size()));
  if (workers <= 1) {
    TrainShard<false>(st, corpus, 0, corpus.size(), options, options.seed + 1);
  } else {
    std::vector<std::thread> threads;
    for (size_t w = 0; w < workers; ++w) {
      size_t begin = corpus.size() * w / workers;
      size_t end = corpus.size() * (w + 1) / workers;
      threads.emplace_back([&, begin, end, w] {
        TrainShard<true>(st, corpus, begin, end, options, options.seed + 1 + w);
      });
    }
    for (std::thread &t : threads) t.join();
  }

  TrainingMeta meta{options.window, options.negatives, options.epochs, options.seed};
  return EmbeddingModel(options.dimension, std::move(vocab), std::move(st.in), meta);
}

SgnsGradient SgnsLossAndGradient(std::span<const double> center,
                                 std::span<const double> context,
                                 const std::vector<std::vector<double>> &negatives) {
  size_t dim = center.size();
  auto dot = [&](std::span<const double> a) {
    double s = 0;
    for (size_t k = 0; k < dim; ++k) s += a[k] * center[k];
    return s;
  };
  SgnsGradient g;
  g.center.assign(dim, 0.0);
  g.context.assign(dim, 0.0);

  double pos = dot(context);
  g.loss = Softplus(-pos);
  double coef = Sigmoid(pos) - 1;
  for (size_t k = 0; k < dim; ++k) {
    g.context[k] = coef * center[k];
    g.center[k] += coef * context[k];
  }
  for (const std::vector<double> &n : negatives) {
    double z = dot(n);
    g.loss += Softplus(z);
    double s = Sigmoid(z);
    std::vector<double> gn(dim);
    for (size_t k = 0; k < dim; ++k) {
      gn[k] = s * center[k];
      g.center[k] += s * n[k];
    }
    g.negatives.push_back(std::move(gn));
  }
  return g;
}

std::optional<std::vector<float>> VectorForNgram(
    const EmbeddingModel &m, const std::vector<std::string> &tokens) {
  if (tokens.empty() || m.size() == 0) return std::nullopt;
  if (auto i = m.Find(Join(tokens, "_"))) {
    std::span<const float> v = m.Vector(*i);
    return std::vector<float>(v.begin(), v.end());
  }
  std::vector<double> sum(static_cast<size_t>(m.dimension()), 0.0);
  size_t found = 0;
  for (const std::string &t : tokens) {
    auto i = m.Find(t);
    if (!i) continue;
    ++found;
    std::span<const float> v = m.Vector(*i);
    for (size_t k = 0; k < sum.size(); ++k) sum[k] += v[k];
  }
  if (found == 0) return std::nullopt;
  std::vector<float> out(sum.size());
  for (size_t k = 0; k < sum.size(); ++k) {
    out[k] = static_cast<float>(sum[k] / static_cast<double>(found));
  }
  return out;
}

std::vector<std::pair<std::string, double>> MostSimilar(
    const EmbeddingModel &m, std::span<const float> query, size_t k,
    std::string_view exclude) {
  double qn = 0;
  for (float v : query) qn += static_cast<double>(v) * v;
  qn = std::sqrt(qn);
  std::vector<std::pair<double, size_t>> scored;
  scored.reserve(m.size());
  for (size_t i = 0; i < m.size(); ++i) {
    if (!exclude.empty() && m.tokens()[i] == exclude) continue;
    double cos = 0;
    if (qn > 0 && m.norm(i) > 0) {
      std::span<const float> v = m.Vector(i);
      double dot = 0;
      for (size_t d = 0; d < v.size(); ++d) dot += static_cast<double>(v[d]) * query[d];
      cos = dot / (qn * m.norm(i));
    }
    scored.emplace_back(cos, i);
  }
  size_t take = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + take, scored.end(),
                    [](const auto &a, const auto &b) {
                      return a.first != b.first ? a.first > b.first : a.second < b.second;
                    });
  std::vector<std::pair<std::string, double>> out;
  for (size_t i = 0; i < take; ++i) out.emplace_back(m.tokens()[scored[i].second], scored[i].first);
  return out;
}

std::vector<std::pair<std::string, double>> MostSimilar(
    const EmbeddingModel &m, std::string_view token, size_t k) {
  auto i = m.Find(token);
  if (!i) throw NotFoundError("token not in vocabulary: " + std::string(token));
  return MostSimilar(m, m.Vector(*i), k, token);
}

}  // namespace cso
