#include "genic/pipeline.h"

#include <chrono>
#include <cstdlib>
#include <filesystem>

#include "genic/annotations.h"
#include "genic/corpus.h"
#include "genic/semclass.h"
#include "genic/synonyms.h"

#ifndef GENIC_DEFAULT_DATA_DIR
#define GENIC_DEFAULT_DATA_DIR "data"
#endif

namespace genic {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum class PathKind { kInputFile, kInputDir, kOutput };

struct PathField {
  const char *name;
  std::string PipelinePaths::*member;
  PathKind kind;
  bool required;
  const char *default_file;  // under data_dir, or nullptr
};

const std::vector<PathField> &PathFields() {
  static const std::vector<PathField> fields = {
      {"corpus", &PipelinePaths::corpus, PathKind::kInputFile, true, nullptr},
      {"lexicon", &PipelinePaths::lexicon, PathKind::kInputFile, true, nullptr},
      {"synonyms", &PipelinePaths::synonyms, PathKind::kInputFile, false, nullptr},
      {"data_dir", &PipelinePaths::data_dir, PathKind::kInputDir, false, nullptr},
      {"tag_lexicon", &PipelinePaths::tag_lexicon, PathKind::kInputFile, false,
       "tag_lexicon.tsv"},
      {"terms", &PipelinePaths::terms, PathKind::kInputFile, false, "terms.txt"},
      {"triggers", &PipelinePaths::triggers, PathKind::kInputFile, false,
       "triggers.json"},
      {"schema", &PipelinePaths::schema, PathKind::kInputFile, false,
       "schema.json"},
      {"interaction_lexemes", &PipelinePaths::interaction_lexemes,
       PathKind::kInputFile, false, "interaction_lexemes.tsv"},
      {"filter_training", &PipelinePaths::filter_training, PathKind::kInputFile,
       false, nullptr},
      {"filter_model", &PipelinePaths::filter_model, PathKind::kInputFile, false,
       nullptr},
      {"cluster_decisions", &PipelinePaths::cluster_decisions,
       PathKind::kInputFile, false, nullptr},
      {"store", &PipelinePaths::store, PathKind::kOutput, false, nullptr},
      {"rules", &PipelinePaths::rules, PathKind::kInputFile, false, nullptr},
      {"gold_relations", &PipelinePaths::gold_relations, PathKind::kInputFile,
       false, nullptr},
      {"output", &PipelinePaths::output, PathKind::kOutput, false, nullptr},
  };
  return fields;
}

std::string EnvName(const std::string &field) {
  std::string out = "GENIC_";
  for (char c : field) out += static_cast<char>(std::toupper(c));
  return out;
}

std::string Resolve(const std::string &path, const fs::path &base) {
  const fs::path p(path);
  return (p.is_absolute() ? p : base / p).lexically_normal().string();
}

// Typed reads of `section.key` that record violations.
class Reader {
 public:
  Reader(const json &root, std::vector<std::string> *violations)
      : root_(root), violations_(violations) {}

  const json *Section(const std::string &name,
                      const std::set<std::string> &keys) {
    if (!root_.contains(name)) return nullptr;
    const json &s = root_.at(name);
    if (!s.is_object()) {
      violations_->push_back(name + ": expected an object");
      return nullptr;
    }
    for (const auto &[k, v] : s.items()) {
      if (!keys.count(k)) violations_->push_back(name + "." + k + ": unknown field");
    }
    return &s;
  }

  template <typename T>
  void Number(const json *section, const std::string &name,
              const std::string &key, double min, double max, T *out) {
    if (!section || !section->contains(key)) return;
    const json &v = section->at(key);
    const std::string field = name + "." + key;
    if (std::is_integral_v<T> ? !v.is_number_integer() : !v.is_number()) {
      violations_->push_back(field + (std::is_integral_v<T>
                                          ? ": expected an integer"
                                          : ": expected a number"));
      return;
    }
    const double d = v.get<double>();
    if (d < min || d > max) {
      violations_->push_back(field + ": must be in [" + Fmt(min) + ", " +
                             Fmt(max) + "]");
      return;
    }
    *out = v.get<T>();
  }

  void String(const json *section, const std::string &name,
              const std::string &key, const std::set<std::string> &allowed,
              std::string *out) {
    if (!section || !section->contains(key)) return;
    const json &v = section->at(key);
    const std::string field = name + "." + key;
    if (!v.is_string()) {
      violations_->push_back(field + ": expected a string");
      return;
    }
    const std::string s = v.get<std::string>();
    if (!allowed.empty() && !allowed.count(s)) {
      std::vector<std::string> list(allowed.begin(), allowed.end());
      violations_->push_back(field + ": must be one of " + text::Join(list, ", "));
      return;
    }
    *out = s;
  }

 private:
  static std::string Fmt(double d) {
    json j = d;
    if (d == static_cast<double>(static_cast<long long>(d))) {
      j = static_cast<long long>(d);
    }
    return j.dump();
  }

  const json &root_;
  std::vector<std::string> *violations_;
};

CasePolicy ParseCasePolicy(const std::string &name) {
  if (name == "fold_first_char") return CasePolicy::kFoldFirstChar;
  if (name == "fold_all") return CasePolicy::kFoldAll;
  return CasePolicy::kExact;
}

const char *CasePolicyName(CasePolicy policy) {
  switch (policy) {
    case CasePolicy::kFoldFirstChar:
      return "fold_first_char";
    case CasePolicy::kFoldAll:
      return "fold_all";
    default:
      return "exact";
  }
}

}  // namespace

EnvLookup ProcessEnvironment() {
  return [](const std::string &name) -> std::optional<std::string> {
    const char *v = std::getenv(name.c_str());
    if (!v) return std::nullopt;
    return std::string(v);
  };
}

ConfigResult ValidateConfig(const json &root, const std::string &base_dir,
                            const EnvLookup &env) {
  ConfigResult result;
  auto &violations = result.violations;
  if (!root.is_object()) {
    violations.push_back("(root): expected an object");
    return result;
  }
  const std::set<std::string> sections = {"paths",  "ingest",   "ner",
                                          "filter", "synonyms", "parser",
                                          "cluster", "learner", "serve"};
  for (const auto &[k, v] : root.items()) {
    if (!sections.count(k)) violations.push_back(k + ": unknown section");
  }
  PipelineConfig config;
  Reader reader(root, &violations);
  const fs::path base = fs::absolute(base_dir.empty() ? "." : base_dir);

  std::set<std::string> path_keys;
  for (const PathField &f : PathFields()) path_keys.insert(f.name);
  const json *paths = reader.Section("paths", path_keys);
  for (const PathField &f : PathFields()) {
    std::string &value = config.paths.*f.member;
    const std::string field = std::string("paths.") + f.name;
    if (const auto over = env(EnvName(f.name)); over && !over->empty()) {
      value = Resolve(*over, fs::current_path());
    } else if (paths && paths->contains(f.name)) {
      const json &v = paths->at(f.name);
      if (!v.is_string() || v.get<std::string>().empty()) {
        violations.push_back(field + ": expected a non-empty string");
        continue;
      }
      value = Resolve(v.get<std::string>(), base);
    }
    if (value.empty()) {
      if (f.required) {
        violations.push_back(field + ": required");
        continue;
      }
      if (std::string(f.name) == "data_dir") {
        value = Resolve(GENIC_DEFAULT_DATA_DIR, fs::current_path());
      } else if (std::string(f.name) == "output") {
        value = Resolve("out", base);
      } else if (f.default_file) {
        value = (fs::path(config.paths.data_dir) / f.default_file).string();
      } else {
        continue;
      }
    }
    std::error_code ec;
    if (f.kind == PathKind::kInputFile && !fs::is_regular_file(value, ec)) {
      violations.push_back(field + ": file does not exist: " + value);
    } else if (f.kind == PathKind::kInputDir && !fs::is_directory(value, ec)) {
      violations.push_back(field + ": directory does not exist: " + value);
    } else if (f.kind == PathKind::kOutput && fs::exists(value, ec) &&
               !fs::is_directory(value, ec)) {
      violations.push_back(field + ": exists and is not a directory: " + value);
    }
  }

  const json *ingest = reader.Section("ingest", {"format"});
  config.corpus_format =
      config.paths.corpus.size() >= 4 &&
              config.paths.corpus.substr(config.paths.corpus.size() - 4) == ".tsv"
          ? "tsv"
          : "medline";
  reader.String(ingest, "ingest", "format", {"medline", "tsv"},
                &config.corpus_format);

  const json *ner = reader.Section("ner", {"case_policy"});
  std::string policy = "exact";
  reader.String(ner, "ner", "case_policy", {"exact", "fold_first_char", "fold_all"},
                &policy);
  config.case_policy = ParseCasePolicy(policy);

  const json *filter =
      reader.Section("filter", {"count_mode", "k", "alpha", "threshold"});
  std::string mode = CountModeName(config.count_mode);
  reader.String(filter, "filter", "count_mode",
                {"raw_mentions", "distinct_canonical"}, &mode);
  config.count_mode = ParseCountMode(mode);
  reader.Number(filter, "filter", "k", 1, 1e9, &config.filter_k);
  reader.Number(filter, "filter", "alpha", 1e-9, 1e9, &config.filter_alpha);
  reader.Number(filter, "filter", "threshold", 0, 1, &config.filter_threshold);

  const json *syn =
      reader.Section("synonyms", {"min_confidence", "max_gap", "distance_decay"});
  reader.Number(syn, "synonyms", "min_confidence", 0, 1,
                &config.synonym_min_confidence);
  reader.Number(syn, "synonyms", "max_gap", 0, 100, &config.synonym_max_gap);
  reader.Number(syn, "synonyms", "distance_decay", 1e-9, 1,
                &config.synonym_distance_decay);

  const json *parser = reader.Section("parser", {"slots"});
  if (parser && parser->contains("slots")) {
    const json &slots = parser->at("slots");
    std::vector<std::string> names;
    bool ok = slots.is_array() && !slots.empty();
    for (const json &s : ok ? slots : json::array()) {
      if (!s.is_string()) {
        ok = false;
        break;
      }
      try {
        ParseRelation(s.get<std::string>());
        names.push_back(s.get<std::string>());
      } catch (const Error &) {
        violations.push_back("parser.slots: unknown relation " + s.dump());
      }
    }
    if (!ok) {
      violations.push_back("parser.slots: expected a non-empty list of relations");
    } else {
      config.parser_slots = names;
    }
  }

  const json *cluster = reader.Section("cluster", {"threshold"});
  reader.Number(cluster, "cluster", "threshold", 1e-9, 1,
                &config.cluster_threshold);

  const json *learner =
      reader.Section("learner", {"max_path_length", "lambda", "max_literals",
                                 "noise_budget", "folds", "seed"});
  reader.Number(learner, "learner", "max_path_length", 1, 6,
                &config.learner.max_path_length);
  reader.Number(learner, "learner", "lambda", 0, 1e6, &config.learner.lambda);
  reader.Number(learner, "learner", "max_literals", 1, 16,
                &config.learner.max_literals);
  reader.Number(learner, "learner", "noise_budget", 0, 1e9,
                &config.learner.noise_budget);
  reader.Number(learner, "learner", "folds", 2, 1000, &config.folds);
  reader.Number(learner, "learner", "seed", 0, 1.8e19, &config.seed);

  const json *serve = reader.Section("serve", {"host", "port", "static_dir"});
  reader.String(serve, "serve", "host", {}, &config.serve_host);
  reader.Number(serve, "serve", "port", 0, 65535, &config.serve_port);
  reader.String(serve, "serve", "static_dir", {}, &config.static_dir);
  if (!config.static_dir.empty()) {
    config.static_dir = Resolve(config.static_dir, base);
    if (!fs::is_directory(config.static_dir)) {
      violations.push_back("serve.static_dir: directory does not exist: " +
                           config.static_dir);
    }
  }

  if (violations.empty()) result.config = std::move(config);
  return result;
}

ConfigResult LoadConfig(const std::string &path, const EnvLookup &env) {
  json root;
  try {
    root = json::parse(text::ReadFile(path, "config"));
  } catch (const json::exception &e) {
    return {std::nullopt, {"(file): malformed JSON: " + std::string(e.what())}};
  } catch (const Error &e) {
    return {std::nullopt, {"(file): " + std::string(e.what())}};
  }
  return ValidateConfig(root, fs::path(path).parent_path().string(), env);
}

json ConfigToJson(const PipelineConfig &c) {
  json paths = json::object();
  for (const PathField &f : PathFields()) {
    if (!(c.paths.*f.member).empty()) paths[f.name] = c.paths.*f.member;
  }
  json serve = {{"host", c.serve_host}, {"port", c.serve_port}};
  if (!c.static_dir.empty()) serve["static_dir"] = c.static_dir;
  return {
      {"paths", paths},
      {"ingest", {{"format", c.corpus_format}}},
      {"ner", {{"case_policy", CasePolicyName(c.case_policy)}}},
      {"filter",
       {{"count_mode", CountModeName(c.count_mode)},
        {"k", c.filter_k},
        {"alpha", c.filter_alpha},
        {"threshold", c.filter_threshold}}},
      {"synonyms",
       {{"min_confidence", c.synonym_min_confidence},
        {"max_gap", c.synonym_max_gap},
        {"distance_decay", c.synonym_distance_decay}}},
      {"parser", {{"slots", c.parser_slots}}},
      {"cluster", {{"threshold", c.cluster_threshold}}},
      {"learner",
       {{"max_path_length", c.learner.max_path_length},
        {"lambda", c.learner.lambda},
        {"max_literals", c.learner.max_literals},
        {"noise_budget", c.learner.noise_budget},
        {"folds", c.folds},
        {"seed", c.seed}}},
      {"serve", serve},
  };
}

MissingArtifactError::MissingArtifactError(std::string stage, std::string path)
    : Error("missing " + path + ": run the '" + stage + "' stage first"),
      stage_(std::move(stage)),
      path_(std::move(path)) {}

namespace {

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

std::vector<json> ReadJsonLines(const std::string &path) {
  std::vector<json> out;
  std::size_t line_no = 0;
  for (const std::string &line : text::Split(text::ReadFile(path), '\n')) {
    ++line_no;
    if (text::Trim(line).empty()) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::exception &e) {
      throw Error(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::string JsonLines(const std::vector<json> &rows) {
  std::string out;
  for (const json &row : rows) out += row.dump() + "\n";
  return out;
}

json DocumentJson(const Document &doc) {
  json sentences = json::array();
  for (const Sentence &s : doc.sentences) {
    sentences.push_back({{"index", s.index},
                         {"text", s.text},
                         {"start", s.span.start},
                         {"end", s.span.end}});
  }
  return {{"id", doc.id},
          {"title", doc.title},
          {"abstract", doc.abstract_text},
          {"sentences", sentences}};
}

Document DocumentFromJson(const json &j) {
  Document doc;
  doc.id = j.at("id");
  doc.title = j.at("title");
  doc.abstract_text = j.at("abstract");
  for (const json &s : j.at("sentences")) {
    Sentence sentence;
    sentence.doc_id = doc.id;
    sentence.index = s.at("index");
    sentence.text = s.at("text");
    sentence.span = {s.at("start").get<std::size_t>(), s.at("end").get<std::size_t>()};
    sentence.tokens = Tokenize(sentence.text);
    doc.sentences.push_back(std::move(sentence));
  }
  return doc;
}

using MentionMap = std::map<SentenceRef, std::vector<GeneMention>>;

json MentionsJson(const SentenceRef &ref, const std::vector<GeneMention> &ms) {
  json list = json::array();
  for (const GeneMention &m : ms) {
    list.push_back({{"first", m.first},
                    {"last", m.last},
                    {"surface", m.surface},
                    {"canonical", m.canonical}});
  }
  return {{"doc_id", ref.doc_id}, {"index", ref.index}, {"mentions", list}};
}

MentionMap MentionsFromJson(const std::vector<json> &rows) {
  MentionMap out;
  for (const json &row : rows) {
    const SentenceRef ref{row.at("doc_id"), row.at("index")};
    auto &list = out[ref];
    for (const json &m : row.at("mentions")) {
      list.push_back({ref, m.at("first"), m.at("last"), m.at("surface"),
                      m.at("canonical")});
    }
  }
  return out;
}

ParserResources LoadParserResources(const PipelineConfig &c) {
  ParserResources r;
  r.tags = TagLexicon::Load(c.paths.tag_lexicon);
  r.terms = TermLexicon::Load(c.paths.terms);
  return r;
}

std::string Now(double seconds) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", seconds);
  return buf;
}

}  // namespace

Pipeline::Pipeline(PipelineConfig config) : config_(std::move(config)) {}

std::string Pipeline::OutputPath(const std::string &artifact) const {
  return (fs::path(config_.paths.output) / artifact).string();
}

std::string Pipeline::Require(const std::string &artifact,
                              const std::string &stage) const {
  const std::string path = OutputPath(artifact);
  if (!fs::is_regular_file(path)) throw MissingArtifactError(stage, path);
  return path;
}

namespace {

void WriteArtifact(const std::string &path, const std::string &content) {
  fs::create_directories(fs::path(path).parent_path());
  text::WriteFileAtomic(path, content);
}

std::vector<Document> LoadCorpus(const std::string &path) {
  std::vector<Document> docs;
  for (const json &row : ReadJsonLines(path)) docs.push_back(DocumentFromJson(row));
  return docs;
}

// Manual table from the config, then the mined one when present.
struct Canonicalizer {
  std::optional<SynonymTable> manual;
  std::optional<SynonymTable> mined;

  GeneMention operator()(GeneMention m) const {
    if (manual) m = Canonicalize(std::move(m), *manual);
    if (mined) m = Canonicalize(std::move(m), *mined);
    return m;
  }
};

}  // namespace

StageReport Pipeline::Ingest() {
  Timer timer;
  StageReport r;
  r.stage = "ingest";
  const auto format = config_.corpus_format == "tsv" ? CorpusFormat::kPlainTsv
                                                     : CorpusFormat::kMedlineText;
  const auto parsed =
      ParseCorpus(text::ReadFile(config_.paths.corpus, "corpus"), format);
  std::vector<json> rows;
  std::size_t sentences = 0;
  for (const Document &doc : parsed.documents) {
    rows.push_back(DocumentJson(doc));
    sentences += doc.sentences.size();
  }
  for (const RecordError &e : parsed.errors) {
    r.warnings.push_back("corpus line " + std::to_string(e.line) + ": " +
                         e.message);
  }
  r.counts = {{"documents", parsed.documents.size()},
              {"sentences", sentences},
              {"skipped_empty", parsed.skipped_empty},
              {"record_errors", parsed.errors.size()}};
  WriteArtifact(OutputPath(artifacts::kCorpus), JsonLines(rows));
  r.seconds = timer.seconds();
  return r;
}

StageReport Pipeline::Ner() {
  Timer timer;
  StageReport r;
  r.stage = "ner";
  const auto docs = LoadCorpus(Require(artifacts::kCorpus, "ingest"));
  const auto lexicon = GeneLexicon::Load(config_.paths.lexicon, config_.case_policy);
  Canonicalizer canon;
  if (!config_.paths.synonyms.empty()) {
    canon.manual = SynonymTable::Load(config_.paths.synonyms);
  }
  std::vector<json> rows;
  std::size_t sentences = 0, mentions = 0, with = 0;
  for (const Document &doc : docs) {
    for (const Sentence &s : doc.sentences) {
      std::vector<GeneMention> found;
      for (GeneMention m : FindGeneMentions(s, lexicon)) {
        found.push_back(canon(std::move(m)));
      }
      ++sentences;
      mentions += found.size();
      with += !found.empty();
      rows.push_back(MentionsJson(s.ref(), found));
    }
  }
  r.counts = {{"sentences", sentences},
              {"mentions", mentions},
              {"sentences_with_mentions", with}};
  WriteArtifact(OutputPath(artifacts::kMentions), JsonLines(rows));
  r.seconds = timer.seconds();
  return r;
}

StageReport Pipeline::Filter() {
  Timer timer;
  StageReport r;
  r.stage = "filter";
  const auto docs = LoadCorpus(Require(artifacts::kCorpus, "ingest"));
  const auto mentions =
      MentionsFromJson(ReadJsonLines(Require(artifacts::kMentions, "ner")));
  std::optional<NaiveBayesModel> model;
  if (!config_.paths.filter_model.empty()) {
    model = ModelFromJson(
        json::parse(text::ReadFile(config_.paths.filter_model, "filter model")));
  } else if (!config_.paths.filter_training.empty()) {
    const auto lexicon =
        GeneLexicon::Load(config_.paths.lexicon, config_.case_policy);
    const auto training = ParseTrainingTsv(
        text::ReadFile(config_.paths.filter_training, "filter training"),
        lexicon);
    model = TrainNaiveBayes(training, SelectFeatures(training, config_.filter_k),
                            config_.filter_alpha, config_.filter_threshold);
    WriteArtifact(OutputPath(artifacts::kFilterModel), ModelToJson(*model).dump(1));
    r.counts["training_sentences"] = training.size();
  }
  std::vector<json> rows;
  std::size_t sentences = 0, candidates = 0, accepted = 0;
  for (const Document &doc : docs) {
    for (const Sentence &s : doc.sentences) {
      const auto it = mentions.find(s.ref());
      static const std::vector<GeneMention> kNone;
      const auto d = DecideSentence(s, it == mentions.end() ? kNone : it->second,
                                    model ? &*model : nullptr, config_.count_mode);
      ++sentences;
      candidates += d.candidate;
      accepted += d.accepted;
      rows.push_back({{"doc_id", s.doc_id},
                      {"index", s.index},
                      {"candidate", d.candidate},
                      {"posterior_relevant", d.posterior_relevant},
                      {"accepted", d.accepted}});
    }
  }
  r.counts["sentences"] = sentences;
  r.counts["candidates"] = candidates;
  r.counts["accepted"] = accepted;
  if (!model) r.warnings.push_back("no filter model: every candidate is accepted");
  WriteArtifact(OutputPath(artifacts::kFilter), JsonLines(rows));
  r.seconds = timer.seconds();
  return r;
}

StageReport Pipeline::Synonyms() {
  Timer timer;
  StageReport r;
  r.stage = "synonyms";
  const auto docs = LoadCorpus(Require(artifacts::kCorpus, "ingest"));
  const auto mentions =
      MentionsFromJson(ReadJsonLines(Require(artifacts::kMentions, "ner")));
  const auto patterns = LoadTriggerPatterns(config_.paths.triggers);
  MatchOptions options;
  options.max_gap = config_.synonym_max_gap;
  options.distance_decay = config_.synonym_distance_decay;
  std::vector<SynonymCandidate> candidates;
  for (const Document &doc : docs) {
    for (const Sentence &s : doc.sentences) {
      const auto it = mentions.find(s.ref());
      if (it == mentions.end()) continue;
      for (auto &c : MatchTriggers(s, it->second, patterns, options)) {
        candidates.push_back(std::move(c));
      }
    }
  }
  const auto mined =
      BuildSynonymTable(candidates, config_.synonym_min_confidence);
  for (const SynonymConflict &c : mined.conflicts) {
    r.warnings.push_back("synonym conflict on " + c.alternate + ": " + c.reason);
  }
  r.counts = {{"trigger_matches", candidates.size()},
              {"synonym_pairs", mined.table.size()},
              {"conflicts", mined.conflicts.size()}};
  WriteArtifact(OutputPath(artifacts::kSynonyms), mined.table.ToTsv());
  r.seconds = timer.seconds();
  return r;
}

StageReport Pipeline::Parse() {
  Timer timer;
  StageReport r;
  r.stage = "parse";
  const auto docs = LoadCorpus(Require(artifacts::kCorpus, "ingest"));
  const auto mentions =
      MentionsFromJson(ReadJsonLines(Require(artifacts::kMentions, "ner")));
  std::set<SentenceRef> accepted;
  for (const json &row : ReadJsonLines(Require(artifacts::kFilter, "filter"))) {
    if (row.at("accepted").get<bool>()) {
      accepted.insert({row.at("doc_id"), row.at("index")});
    }
  }
  Canonicalizer canon;
  if (fs::is_regular_file(OutputPath(artifacts::kSynonyms))) {
    canon.mined = SynonymTable::Load(OutputPath(artifacts::kSynonyms));
  }
  const auto resources = LoadParserResources(config_);
  std::vector<DependencyGraph> graphs;
  std::vector<json> rows;
  std::size_t edges = 0;
  for (const Document &doc : docs) {
    for (const Sentence &s : doc.sentences) {
      if (!accepted.count(s.ref())) continue;
      std::vector<GeneMention> ms;
      if (const auto it = mentions.find(s.ref()); it != mentions.end()) {
        for (const GeneMention &m : it->second) ms.push_back(canon(m));
      }
      graphs.push_back(ParseSentence(s, ms, resources));
      edges += graphs.back().edges().size();
      rows.push_back(GraphToJson(graphs.back()));
    }
  }
  std::set<Relation> slots;
  for (const std::string &s : config_.parser_slots) slots.insert(ParseRelation(s));
  const auto triples = CollectTriples(graphs, slots);
  r.counts = {{"sentences", graphs.size()},
              {"edges", edges},
              {"triples", triples.size()}};
  WriteArtifact(OutputPath(artifacts::kGraphs), JsonLines(rows));
  WriteArtifact(OutputPath(artifacts::kRelations), FormatRelations(graphs));
  WriteArtifact(OutputPath(artifacts::kTriples), FormatTriples(triples));
  r.seconds = timer.seconds();
  return r;
}

StageReport Pipeline::ClusterStage() {
  Timer timer;
  StageReport r;
  r.stage = "cluster";
  const auto triples =
      ParseTriples(text::ReadFile(Require(artifacts::kTriples, "parse")));
  Hierarchy h = Cluster(triples, config_.cluster_threshold);
  if (!config_.paths.cluster_decisions.empty()) {
    h = ApplyValidation(std::move(h),
                        ParseDecisions(text::ReadFile(
                            config_.paths.cluster_decisions, "cluster decisions")));
  }
  std::size_t leaves = 0, usable = 0;
  for (const auto &[id, cls] : h.classes) {
    leaves += cls.children.empty();
    usable += !cls.children.empty() && h.IsUsable(id);
  }
  r.counts = {{"lemmas", leaves},
              {"classes", h.classes.size() - leaves},
              {"usable_classes", usable},
              {"merges", h.merges.size()}};
  WriteArtifact(OutputPath(artifacts::kHierarchy), HierarchyToJson(h).dump(1));
  r.seconds = timer.seconds();
  return r;
}

namespace {

std::vector<AnnotatedDocument> LoadAnnotated(const std::string &path,
                                             const AnnotationSchema &schema) {
  std::vector<AnnotatedDocument> docs;
  if (fs::is_directory(path)) {
    AnnotationStore store(path, schema);
    for (const auto &e : store.List()) docs.push_back(*store.Get(e.id));
  } else if (fs::is_regular_file(path)) {
    docs.push_back(ParseDocumentXml(text::ReadFile(path), schema));
  } else {
    throw Error("no annotated documents at " + path);
  }
  return docs;
}

}  // namespace

StageReport Pipeline::Learn(const std::string &examples, bool cross_validate) {
  Timer timer;
  StageReport r;
  r.stage = "learn";
  const std::string source = examples.empty() ? config_.paths.store : examples;
  if (source.empty()) {
    throw Error("learn: no examples given (--examples or paths.store)");
  }
  const auto schema = AnnotationSchema::Load(config_.paths.schema);
  const auto docs = LoadAnnotated(source, schema);
  const auto lexicon = GeneLexicon::Load(config_.paths.lexicon, config_.case_policy);
  Canonicalizer canon;
  if (!config_.paths.synonyms.empty()) {
    canon.manual = SynonymTable::Load(config_.paths.synonyms);
  }
  if (fs::is_regular_file(OutputPath(artifacts::kSynonyms))) {
    canon.mined = SynonymTable::Load(OutputPath(artifacts::kSynonyms));
  }
  std::optional<Hierarchy> hierarchy;
  if (fs::is_regular_file(OutputPath(artifacts::kHierarchy))) {
    hierarchy = HierarchyFromJson(
        json::parse(text::ReadFile(OutputPath(artifacts::kHierarchy))));
  }
  const auto resources = LoadParserResources(config_);
  const auto ilex = InteractionLexicon::Load(config_.paths.interaction_lexemes);

  std::map<SentenceRef, std::shared_ptr<const DependencyGraph>> graphs;
  std::size_t sentences = 0, frames = 0;
  for (const AnnotatedDocument &doc : docs) {
    frames += doc.frames.size();
    for (std::size_t i = 0; i < doc.sentences.size(); ++i) {
      Sentence s;
      s.doc_id = doc.id;
      s.index = i;
      s.text = doc.sentences[i];
      s.tokens = Tokenize(s.text);
      std::vector<GeneMention> ms;
      for (GeneMention m : FindGeneMentions(s, lexicon)) ms.push_back(canon(m));
      DependencyGraph g = ParseSentence(s, ms, resources);
      if (hierarchy) g = TypeNodes(std::move(g), *hierarchy);
      graphs[s.ref()] = std::make_shared<DependencyGraph>(std::move(g));
      ++sentences;
    }
  }
  const auto set = BuildExamples(docs, graphs);
  r.warnings = set.warnings;
  std::size_t positives = 0;
  for (const auto &ex : set.examples) positives += ex.positive;
  if (cross_validate) {
    const auto report =
        CrossValidate(set.examples, config_.folds, config_.seed, ilex,
                      config_.learner);
    WriteArtifact(OutputPath(artifacts::kCvReport),
                  CvReportToJson(report).dump(1));
    r.details = FormatCvReport(report);
  }
  const auto learned = LearnRules(set.examples, ilex, config_.learner);
  WriteArtifact(OutputPath(artifacts::kRules),
                RulesToJson(learned.rules, config_.learner).dump(1));
  r.counts = {{"documents", docs.size()},   {"sentences", sentences},
              {"frames", frames},           {"examples", set.examples.size()},
              {"positives", positives},     {"skipped_spans", set.skipped_spans},
              {"rules", learned.rules.size()}};
  r.seconds = timer.seconds();
  return r;
}

std::vector<StageReport> Pipeline::Extract() {
  std::vector<StageReport> reports;
  const std::string rules_path =
      config_.paths.rules.empty() ? OutputPath(artifacts::kRules)
                                  : config_.paths.rules;
  if (!fs::is_regular_file(rules_path)) {
    throw MissingArtifactError("learn", rules_path);
  }
  for (auto stage : {&Pipeline::Ingest, &Pipeline::Ner, &Pipeline::Filter,
                     &Pipeline::Synonyms, &Pipeline::Parse,
                     &Pipeline::ClusterStage}) {
    reports.push_back((this->*stage)());
    Record(reports.back());
  }
  Timer timer;
  StageReport r;
  r.stage = "extract";
  LearnerParams params = config_.learner;
  const auto rules =
      RulesFromJson(json::parse(text::ReadFile(rules_path, "rules")), &params);
  const auto hierarchy = HierarchyFromJson(
      json::parse(text::ReadFile(Require(artifacts::kHierarchy, "cluster"))));
  const auto ilex = InteractionLexicon::Load(config_.paths.interaction_lexemes);
  std::vector<Extraction> all;
  std::size_t sentences = 0;
  for (const json &row : ReadJsonLines(Require(artifacts::kGraphs, "parse"))) {
    const DependencyGraph g = TypeNodes(GraphFromJson(row), hierarchy);
    for (Extraction &e : ApplyRules(rules, g, ilex, params)) {
      all.push_back(std::move(e));
    }
    ++sentences;
  }
  std::vector<json> rows;
  for (const Extraction &e : all) rows.push_back(ExtractionToJson(e));
  WriteArtifact(OutputPath(artifacts::kTemplates), JsonLines(rows));
  WriteArtifact(OutputPath(artifacts::kTemplatesText), FormatTemplates(all));
  r.counts = {{"sentences", sentences},
              {"rules", rules.size()},
              {"templates", all.size()}};
  r.details = FormatTemplates(all);
  r.seconds = timer.seconds();
  reports.push_back(r);
  return reports;
}

StageReport Pipeline::Eval(const std::string &gold, const std::string &predicted) {
  Timer timer;
  StageReport r;
  r.stage = "eval";
  const std::string gold_path = gold.empty() ? config_.paths.gold_relations : gold;
  if (gold_path.empty()) {
    throw Error("eval: no gold relations (--gold or paths.gold_relations)");
  }
  const std::string pred_path =
      predicted.empty() ? Require(artifacts::kRelations, "parse") : predicted;
  const auto g = ParseGoldRelations(text::ReadFile(gold_path, "gold relations"));
  const auto p =
      ParseGoldRelations(text::ReadFile(pred_path, "predicted relations"));
  const auto metrics = EvaluateRelations(g, p);
  json out = json::object();
  std::size_t gold_edges = 0, predicted_edges = 0;
  for (const auto &[label, m] : metrics) {
    out[RelationName(label)] = {{"nb_rel", m.counts.nb_rel},
                                {"rel_ok", m.counts.rel_ok},
                                {"rel_tot", m.counts.rel_tot},
                                {"recall", m.recall},
                                {"precision", m.precision}};
    gold_edges += m.counts.nb_rel;
    predicted_edges += m.counts.rel_tot;
  }
  WriteArtifact(OutputPath(artifacts::kEval), out.dump(1));
  r.counts = {{"gold_edges", gold_edges}, {"predicted_edges", predicted_edges}};
  r.details = FormatEvaluation(metrics);
  r.seconds = timer.seconds();
  return r;
}

void Pipeline::Record(const StageReport &stage) const {
  auto load = [](const std::string &path) {
    if (!fs::is_regular_file(path)) return json::object();
    try {
      json j = json::parse(text::ReadFile(path));
      return j.is_object() ? j : json::object();
    } catch (const std::exception &) {
      return json::object();
    }
  };
  json report = load(OutputPath(artifacts::kReport));
  report["config"] = ConfigToJson(config_);
  report["stages"][stage.stage] = {{"counts", stage.counts},
                                   {"warnings", stage.warnings}};
  WriteArtifact(OutputPath(artifacts::kReport), report.dump(1) + "\n");
  json timings = load(OutputPath(artifacts::kTimings));
  timings[stage.stage] = stage.seconds;
  WriteArtifact(OutputPath(artifacts::kTimings), timings.dump(1) + "\n");
}

std::string FormatStageReport(const StageReport &r) {
  std::string out = r.stage + " (" + Now(r.seconds) + " s)\n";
  for (const auto &[k, v] : r.counts) {
    out += "  " + k + ": " + std::to_string(v) + "\n";
  }
  for (const std::string &w : r.warnings) out += "  warning: " + w + "\n";
  if (!r.details.empty()) out += r.details;
  return out;
}

std::string FormatRunReport(const json &report, const json &timings) {
  std::string out;
  if (!report.contains("stages")) return "no stages recorded\n";
  for (const auto &[stage, body] : report.at("stages").items()) {
    out += stage;
    if (timings.contains(stage)) {
      out += " (" + Now(timings.at(stage).get<double>()) + " s)";
    }
    out += "\n";
    for (const auto &[k, v] : body.at("counts").items()) {
      out += "  " + k + ": " + v.dump() + "\n";
    }
    for (const auto &w : body.at("warnings")) {
      out += "  warning: " + w.get<std::string>() + "\n";
    }
  }
  return out;
}

std::string FormatTemplates(const std::vector<Extraction> &extractions) {
  std::string out;
  for (const Extraction &e : extractions) {
    out += "Interaction\tType: " + e.type + "\n\tAgent: " + e.agent +
           "\n\tTarget: " + e.target + "\n\tSentence: " + e.sentence_ref.doc_id +
           ":" + std::to_string(e.sentence_ref.index) + "\n\tRule: " + e.rule_id +
           "\n\n";
  }
  return out;
}

std::string FormatEvaluation(const std::map<Relation, RelationMetrics> &metrics) {
  std::string out = "relation\tnbRel\trelOK\tRelTot\tR\tP\n";
  char buf[64];
  for (const auto &[label, m] : metrics) {
    std::snprintf(buf, sizeof buf, "\t%zu\t%zu\t%zu\t%.2f\t%.2f\n",
                  m.counts.nb_rel, m.counts.rel_ok, m.counts.rel_tot,
                  RoundTo2(m.recall), RoundTo2(m.precision));
    out += RelationName(label) + std::string(buf);
  }
  return out;
}

}  // namespace genic
