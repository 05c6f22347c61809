#ifndef GENIC_PIPELINE_H_
#define GENIC_PIPELINE_H_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "genic/filter.h"
#include "genic/learner.h"
#include "genic/ner.h"
#include "json.hpp"

namespace genic {

struct PipelinePaths {
  std::string corpus;
  std::string lexicon;
  std::string synonyms;          // manual synonym table, optional
  std::string data_dir;          // default resource files
  std::string tag_lexicon;
  std::string terms;
  std::string triggers;
  std::string schema;
  std::string interaction_lexemes;
  std::string filter_training;   // optional
  std::string filter_model;      // optional
  std::string cluster_decisions; // optional
  std::string store;             // optional
  std::string rules;             // optional; defaults to output/rules.json
  std::string gold_relations;    // optional
  std::string output;
};

struct PipelineConfig {
  PipelinePaths paths;
  std::string corpus_format = "medline";  // medline | tsv
  CasePolicy case_policy = CasePolicy::kExact;
  CountMode count_mode = CountMode::kRawMentions;
  std::size_t filter_k = 500;
  double filter_alpha = 1.0;
  double filter_threshold = 0.5;
  double synonym_min_confidence = 0.8;
  std::size_t synonym_max_gap = 3;
  double synonym_distance_decay = 0.95;
  std::vector<std::string> parser_slots = {"Subject", "Object", "Prep", "NofN"};
  double cluster_threshold = 0.25;
  LearnerParams learner;
  std::size_t folds = 10;
  std::uint64_t seed = 1;
  std::string serve_host = "127.0.0.1";
  int serve_port = 8080;
  std::string static_dir;
};

struct ConfigResult {
  std::optional<PipelineConfig> config;
  std::vector<std::string> violations;  // "field.path: message"
};

// Path fields may be overridden by GENIC_<FIELD> variables (GENIC_CORPUS,
// GENIC_DATA_DIR, ...). Relative paths in the file resolve against
// `base_dir`, relative overrides against the working directory.
using EnvLookup = std::function<std::optional<std::string>(const std::string &)>;
EnvLookup ProcessEnvironment();
ConfigResult ValidateConfig(const nlohmann::json &json,
                            const std::string &base_dir,
                            const EnvLookup &env = ProcessEnvironment());
ConfigResult LoadConfig(const std::string &path,
                        const EnvLookup &env = ProcessEnvironment());
nlohmann::json ConfigToJson(const PipelineConfig &config);

// An input produced by an earlier stage is absent.
class MissingArtifactError : public Error {
 public:
  MissingArtifactError(std::string stage, std::string path);
  const std::string &stage() const { return stage_; }
  const std::string &path() const { return path_; }

 private:
  std::string stage_;
  std::string path_;
};

struct StageReport {
  std::string stage;
  std::map<std::string, std::size_t> counts;
  std::vector<std::string> warnings;
  std::string details;  // tables printed after the counts
  double seconds = 0;
};

// Artifact names under paths.output.
namespace artifacts {
inline constexpr char kCorpus[] = "corpus.jsonl";
inline constexpr char kMentions[] = "mentions.jsonl";
inline constexpr char kFilter[] = "filter.jsonl";
inline constexpr char kFilterModel[] = "filter_model.json";
inline constexpr char kSynonyms[] = "synonyms.tsv";
inline constexpr char kGraphs[] = "graphs.jsonl";
inline constexpr char kRelations[] = "relations.tsv";
inline constexpr char kTriples[] = "triples.tsv";
inline constexpr char kHierarchy[] = "hierarchy.json";
inline constexpr char kRules[] = "rules.json";
inline constexpr char kCvReport[] = "cv_report.json";
inline constexpr char kTemplates[] = "templates.jsonl";
inline constexpr char kTemplatesText[] = "templates.txt";
inline constexpr char kEval[] = "eval.json";
inline constexpr char kReport[] = "report.json";
inline constexpr char kTimings[] = "timings.json";
}  // namespace artifacts

class Pipeline {
 public:
  explicit Pipeline(PipelineConfig config);

  StageReport Ingest();
  StageReport Ner();
  StageReport Filter();
  StageReport Synonyms();
  StageReport Parse();
  StageReport ClusterStage();
  // `examples`: annotated document XML or a store directory; defaults to
  // paths.store.
  StageReport Learn(const std::string &examples = "", bool cross_validate = true);
  // ingest, ner, filter, synonyms, parse, cluster, then rules on every
  // accepted sentence.
  std::vector<StageReport> Extract();
  // Gold and predicted relation files; defaults to paths.gold_relations and
  // output/relations.tsv.
  StageReport Eval(const std::string &gold = "", const std::string &predicted = "");

  const PipelineConfig &config() const { return config_; }
  std::string OutputPath(const std::string &artifact) const;

  // Merges the stage into report.json and timings.json.
  void Record(const StageReport &report) const;

 private:
  std::string Require(const std::string &artifact, const std::string &stage) const;

  PipelineConfig config_;
};

// Plain-text rendering of report.json and timings.json.
std::string FormatRunReport(const nlohmann::json &report,
                            const nlohmann::json &timings);
std::string FormatStageReport(const StageReport &report);
std::string FormatTemplates(const std::vector<Extraction> &extractions);
std::string FormatEvaluation(const std::map<Relation, RelationMetrics> &metrics);

// Entry point of the `genic` binary. Exit status: 0 success, 1 invalid
// configuration or arguments, 2 missing upstream artifact, 3 other fatal
// errors.
int RunCli(int argc, char **argv);

}  // namespace genic

#endif  // GENIC_PIPELINE_H_
