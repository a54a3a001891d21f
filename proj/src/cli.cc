#include "cso/cli.h"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <iostream>
#include <map>
#include <thread>

#include "CLI11.hpp"
#include "cso/config.h"
#include "cso/corpus.h"
#include "cso/embeddings.h"
#include "cso/klink.h"
#include "cso/text.h"
#include "json.hpp"

namespace cso {

namespace {

struct Flags {
  std::string corpus;
  std::string config;
  std::string ontology;
  std::string model;
  std::string out;
  std::string stoplist;
  std::string annotations;
  std::string ns = std::string(kDefaultNamespace);
  std::string format;
  std::string same_as;
  std::string related_link;
  uint64_t seed = 1;
  int workers = 1;
};

using Entries = std::vector<std::pair<std::string, std::string>>;

// Prefixes errors raised while reading `path` with the path.
template <typename Fn>
auto WithFile(const std::string &path, Fn fn) {
  try {
    return fn(ReadFile(path));
  } catch (const InputError &e) {
    std::string what = e.what();
    if (what.rfind("cannot open", 0) == 0) throw;
    throw InputError(path + ": " + what);
  }
}

std::vector<Document> LoadCorpus(const std::string &path) {
  return WithFile(path, [](const std::string &text) { return ParseCorpus(text); });
}

bool IsCsv(const std::string &path) {
  return std::filesystem::path(path).extension() == ".csv";
}

Ontology LoadOntology(const std::string &path, const std::string &ns) {
  return WithFile(path, [&](const std::string &text) {
    return IsCsv(path) ? ParseCsv(text, ns) : ParseNTriples(text, ns);
  });
}

void RequireValid(const Ontology &o) {
  std::vector<Violation> violations = Validate(o);
  if (!violations.empty()) {
    throw ValidationError("invalid ontology", std::move(violations));
  }
}

std::set<std::string> LoadStoplist(const std::string &path) {
  std::set<std::string> out;
  if (path.empty()) return out;
  for (const std::string &line : SplitLines(ReadFile(path))) {
    std::string_view word = Trim(line);
    if (!word.empty()) out.emplace(word);
  }
  return out;
}

void WriteManifest(const Flags &f, const std::string &command, const Entries &inputs,
                   const Entries &config, double seconds) {
  Entries entries = {{"command", command}, {"tool_version", kToolVersion}};
  entries.insert(entries.end(), inputs.begin(), inputs.end());
  entries.emplace_back("out", f.out);
  entries.emplace_back("seed", std::to_string(f.seed));
  entries.emplace_back("workers", std::to_string(f.workers));
  for (const auto &[k, v] : config) entries.emplace_back("config." + k, v);
  entries.emplace_back("duration_seconds", FormatDouble(seconds));
  WriteFile(f.out + ".manifest", FormatKeyValues(entries));
}

std::string CsvField(const std::string &s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

double Seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

int RunIndex(const Flags &f) {
  auto start = std::chrono::steady_clock::now();
  std::vector<Document> docs = LoadCorpus(f.corpus);
  CooccurrenceIndex index = CooccurrenceIndex::Build(docs);
  nlohmann::json obj;
  obj["doc_count"] = index.doc_count();
  nlohmann::json keywords = nlohmann::json::array();
  for (const std::string &k : index.Vocabulary()) {
    nlohmann::json by_year = nlohmann::json::object();
    for (const auto &[year, n] : index.OccurrenceByYear(k)) by_year[std::to_string(year)] = n;
    keywords.push_back({{"keyword", k},
                        {"occurrence", index.Occurrence(k)},
                        {"debut", index.Debut(k)},
                        {"by_year", by_year}});
  }
  obj["keywords"] = keywords;
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto &[x, y] : index.CandidatePairs(1)) {
    nlohmann::json by_year = nlohmann::json::object();
    for (const auto &[year, n] : index.PairByYear(x, y)) by_year[std::to_string(year)] = n;
    pairs.push_back({{"x", x}, {"y", y}, {"count", index.PairCount(x, y)}, {"by_year", by_year}});
  }
  obj["pairs"] = pairs;
  WriteFile(f.out, obj.dump(1) + "\n");
  WriteManifest(f, "index", {{"corpus", f.corpus}}, {}, Seconds(start));
  return 0;
}

int RunExtract(const Flags &f) {
  auto start = std::chrono::steady_clock::now();
  KlinkConfig cfg;
  if (!f.config.empty()) {
    cfg = WithFile(f.config, [](const std::string &t) { return KlinkConfig::Parse(t); });
  }
  std::vector<Document> docs = LoadCorpus(f.corpus);
  CooccurrenceIndex index = CooccurrenceIndex::Build(docs);
  KlinkOptions options;
  options.workers = f.workers;
  options.ns = f.ns;
  KlinkResult result = Run(index, cfg, LoadStoplist(f.stoplist), options);
  Ontology &o = result.ontology;
  if (!f.same_as.empty()) {
    WithFile(f.same_as, [&](const std::string &t) {
      ImportMappings(o, t, RelationKind::kSameAs);
      return 0;
    });
  }
  if (!f.related_link.empty()) {
    WithFile(f.related_link, [&](const std::string &t) {
      ImportMappings(o, t, RelationKind::kRelatedLink);
      return 0;
    });
  }
  bool csv = f.format.empty() ? IsCsv(f.out) : f.format == "csv";
  WriteFile(f.out, csv ? SerializeCsv(o) : SerializeNTriples(o));
  std::cerr << "extracted " << o.topic_count() << " topics in " << result.iterations
            << " iteration(s)\n";
  Entries inputs = {{"corpus", f.corpus}, {"config", f.config}, {"stoplist", f.stoplist},
                    {"namespace", f.ns}, {"format", csv ? "csv" : "nt"}};
  WriteManifest(f, "extract", inputs, cfg.Entries(), Seconds(start));
  return 0;
}

int RunTrain(const Flags &f) {
  auto start = std::chrono::steady_clock::now();
  CollocationOptions coll;
  SgnsOptions opt;
  if (!f.config.empty()) {
    opt = WithFile(f.config, [&](const std::string &t) { return SgnsOptions::Parse(t, &coll); });
  }
  opt.seed = f.seed;
  opt.workers = f.workers;
  std::vector<std::string> labels;
  if (!f.ontology.empty()) {
    for (const Topic &t : LoadOntology(f.ontology, f.ns).Topics()) labels.push_back(t.label);
  }
  std::vector<Document> docs = LoadCorpus(f.corpus);
  Sentences raw;
  for (const Document &d : docs) {
    for (const std::string *text : {&d.title, &d.abstract}) {
      for (auto &run : TokenRuns(*text)) raw.push_back(std::move(run));
    }
  }
  PhraseTable phrases = DetectCollocations(raw, coll);
  Gluer gluer(labels, phrases);
  Sentences sentences;
  for (const Document &d : docs) {
    for (const std::string *text : {&d.title, &d.abstract}) {
      for (auto &run : gluer.GlueText(*text)) sentences.push_back(std::move(run));
    }
  }
  EmbeddingModel model = TrainSkipgram(sentences, opt);
  WriteFile(f.out, model.Serialize());
  WriteFile(f.out + ".phrases", phrases.Serialize());
  std::cerr << "trained " << model.size() << " vectors, " << phrases.size()
            << " phrases\n";
  Entries config = opt.Entries();
  config.emplace_back("collocation_delta", FormatDouble(coll.delta));
  config.emplace_back("collocation_threshold", FormatDouble(coll.threshold));
  config.emplace_back("collocation_passes", std::to_string(coll.passes));
  WriteManifest(f, "train-embeddings",
                {{"corpus", f.corpus}, {"config", f.config}, {"ontology", f.ontology}},
                config, Seconds(start));
  return 0;
}

int RunClassify(const Flags &f) {
  auto start = std::chrono::steady_clock::now();
  ClassifierConfig cfg;
  if (!f.config.empty()) {
    cfg = WithFile(f.config, [](const std::string &t) { return ClassifierConfig::Parse(t); });
  }
  Ontology o = LoadOntology(f.ontology, f.ns);
  RequireValid(o);
  std::optional<EmbeddingModel> model;
  if (f.model.empty()) {
    std::cerr << "warning: no --model given; semantic module skipped\n";
  } else {
    model = WithFile(f.model, [](const std::string &b) { return EmbeddingModel::Deserialize(b); });
  }
  std::vector<Document> docs = LoadCorpus(f.corpus);
  LabelIndex labels(o);
  std::vector<Annotation> annotations(docs.size());
  size_t workers = std::max<size_t>(1, std::min<size_t>(f.workers, docs.size()));
  auto work = [&](size_t w) {
    for (size_t i = w; i < docs.size(); i += workers) {
      annotations[i] = Classify(docs[i], o, labels, model ? &*model : nullptr, cfg);
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> threads;
    for (size_t w = 0; w < workers; ++w) threads.emplace_back(work, w);
    for (std::thread &t : threads) t.join();
  }
  std::string out;
  for (size_t i = 0; i < docs.size(); ++i) {
    out += FormatAnnotation(docs[i], annotations[i]);
    out += '\n';
  }
  WriteFile(f.out, out);
  WriteManifest(f, "classify",
                {{"corpus", f.corpus}, {"config", f.config}, {"ontology", f.ontology},
                 {"model", f.model}},
                cfg.Entries(), Seconds(start));
  return 0;
}

int RunValidate(const Flags &f) {
  auto start = std::chrono::steady_clock::now();
  Ontology o = LoadOntology(f.ontology, f.ns);
  std::vector<Violation> violations = Validate(o);
  std::string report;
  for (const Violation &v : violations) {
    report += v.kind + ": " + v.message;
    if (!v.uris.empty()) report += " [" + Join(v.uris, ", ") + "]";
    report += '\n';
  }
  if (violations.empty()) report = "valid: " + std::to_string(o.topic_count()) + " topics\n";
  std::cout << report;
  if (!f.out.empty()) {
    WriteFile(f.out, report);
    WriteManifest(f, "validate", {{"ontology", f.ontology}}, {}, Seconds(start));
  }
  return violations.empty() ? 0 : 2;
}

int RunStats(const Flags &f) {
  auto start = std::chrono::steady_clock::now();
  Ontology o = LoadOntology(f.ontology, f.ns);
  std::vector<Annotation> annotations =
      WithFile(f.annotations, [](const std::string &text) {
        std::vector<Annotation> out;
        size_t index = 0;
        for (const std::string &line : SplitLines(text)) {
          ++index;
          if (!Trim(line).empty()) out.push_back(ParseAnnotation(line, index));
        }
        return out;
      });
  std::string report = StatsReport(annotations, o);
  if (f.out.empty()) {
    std::cout << report;
  } else {
    WriteFile(f.out, report);
    WriteManifest(f, "stats", {{"annotations", f.annotations}, {"ontology", f.ontology}},
                  {}, Seconds(start));
  }
  return 0;
}

}  // namespace

std::string StatsReport(const std::vector<Annotation> &annotations, const Ontology &o) {
  std::map<std::string, long long> counts;
  for (const Annotation &a : annotations) {
    for (const std::string &t : a.enhanced) {
      if (!o.HasTopic(t)) {
        throw InputError("document '" + a.doc_id + "': unknown topic " + t);
      }
      ++counts[t];
    }
  }
  std::vector<std::pair<std::string, long long>> rows(counts.begin(), counts.end());
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto &a, const auto &b) { return a.second > b.second; });
  std::string out = "topic,count\n";
  for (const auto &[topic, n] : rows) out += CsvField(topic) + "," + std::to_string(n) + "\n";
  return out;
}

int RunCli(int argc, char **argv) {
  CLI::App app{"Research topic ontology extraction and document classification", "cso"};
  app.require_subcommand(1);
  Flags f;

  auto add_common = [&](CLI::App *cmd) {
    cmd->add_option("--seed", f.seed, "Random seed");
    cmd->add_option("--workers", f.workers, "Worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--namespace", f.ns, "Topic namespace");
  };

  CLI::App *index = app.add_subcommand("index", "Build the keyword co-occurrence index");
  index->add_option("--corpus", f.corpus, "Corpus (one JSON record per line)")->required();
  index->add_option("--out", f.out, "Output JSON file")->required();
  add_common(index);

  CLI::App *extract = app.add_subcommand("extract", "Extract a topic ontology");
  extract->add_option("--corpus", f.corpus)->required();
  extract->add_option("--config", f.config, "key = value configuration");
  extract->add_option("--stoplist", f.stoplist, "Keywords to drop, one per line");
  extract->add_option("--out", f.out, "Output ontology (.nt or .csv)")->required();
  extract->add_option("--format", f.format, "nt or csv")->check(CLI::IsMember({"nt", "csv"}));
  extract->add_option("--same-as", f.same_as, "topic<TAB>uri sameAs mappings");
  extract->add_option("--related-link", f.related_link, "topic<TAB>uri relatedLink mappings");
  add_common(extract);

  CLI::App *train = app.add_subcommand("train-embeddings", "Train word embeddings");
  train->add_option("--corpus", f.corpus)->required();
  train->add_option("--config", f.config);
  train->add_option("--ontology", f.ontology, "Ontology whose labels are glued");
  train->add_option("--out", f.out, "Output model file")->required();
  add_common(train);

  CLI::App *classify = app.add_subcommand("classify", "Annotate documents with topics");
  classify->add_option("--corpus", f.corpus)->required();
  classify->add_option("--ontology", f.ontology)->required();
  classify->add_option("--model", f.model, "Embedding model");
  classify->add_option("--config", f.config);
  classify->add_option("--out", f.out, "Output annotations")->required();
  add_common(classify);

  CLI::App *validate = app.add_subcommand("validate", "Check ontology invariants");
  validate->add_option("--ontology", f.ontology)->required();
  validate->add_option("--out", f.out, "Report file");
  add_common(validate);

  CLI::App *stats = app.add_subcommand("stats", "Rank topics by annotated documents");
  stats->add_option("--annotations", f.annotations)->required();
  stats->add_option("--ontology", f.ontology)->required();
  stats->add_option("--out", f.out, "Output CSV");
  add_common(stats);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    std::cerr << app.help();
    return 1;
  }

  try {
    if (index->parsed()) return RunIndex(f);
    if (extract->parsed()) return RunExtract(f);
    if (train->parsed()) return RunTrain(f);
    if (classify->parsed()) return RunClassify(f);
    if (validate->parsed()) return RunValidate(f);
    if (stats->parsed()) return RunStats(f);
  } catch (const ValidationError &e) {
    std::cerr << "error: " << e.what() << "\n";
    for (const Violation &v : e.violations()) {
      std::cerr << "  " << v.kind << ": " << v.message << "\n";
    }
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::cerr << app.help();
  return 1;
}

}  // namespace cso
