#ifndef GENIC_LEARNER_H_
#define GENIC_LEARNER_H_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "genic/annotations.h"
#include "genic/parser.h"
#include "json.hpp"

namespace genic {

// Lemma to interaction class ("activation", "inhibition", ...).
class InteractionLexicon {
 public:
  static InteractionLexicon Parse(std::string_view content);
  static InteractionLexicon Load(const std::string &path);

  void Add(const std::string &lemma, const std::string &cls);
  std::optional<std::string> ClassOf(std::string_view lemma) const;

 private:
  std::map<std::string, std::string, std::less<>> classes_;
};

struct LearnerParams {
  std::size_t max_path_length = 3;
  double lambda = 2.0;
  std::size_t max_literals = 4;
  std::size_t noise_budget = 0;
};

// "activate" -> "positive", "inhibit" -> "negative", else "unknown".
std::string InteractionType(std::string_view regulation);

struct RelationalExample {
  std::shared_ptr<const DependencyGraph> graph;
  std::size_t agent = 0;   // node indices
  std::size_t target = 0;
  bool positive = false;
  std::string regulation;  // when positive

  const SentenceRef &sentence_ref() const { return graph->sentence_ref; }
  const std::string &agent_name() const;
  const std::string &target_name() const;
};

struct ExampleSet {
  std::vector<RelationalExample> examples;
  std::size_t skipped_spans = 0;
  std::vector<std::string> warnings;
};

// Positives from frames (every agent with every target), negatives from
// every other ordered pair of gene nodes with distinct names in the
// documents' sentences. Graphs must come from the stored sentence texts.
ExampleSet BuildExamples(
    const std::vector<AnnotatedDocument> &documents,
    const std::map<SentenceRef, std::shared_ptr<const DependencyGraph>> &graphs);

// Labelled paths from `from` to `to` of at most `max_length` edges, e.g.
// "Subject↑·Object↓" (↑: dependent to head, ↓: head to dependent).
struct GraphPath {
  std::string descriptor;
  std::vector<std::size_t> nodes;  // including both ends
};
std::vector<GraphPath> EnumeratePaths(const DependencyGraph &graph,
                                      std::size_t from, std::size_t to,
                                      std::size_t max_length);

// Sorted feature names: "path:..", "ilex:..", "agent_class:..",
// "target_class:..", "path_class:..", "order:agent-first".
std::vector<std::string> ExtractFeatures(const DependencyGraph &graph,
                                         std::size_t agent, std::size_t target,
                                         const InteractionLexicon &lexicon,
                                         std::size_t max_path_length);

class FeatureDictionary {
 public:
  static FeatureDictionary Build(
      const std::vector<std::vector<std::string>> &feature_lists);

  std::optional<std::size_t> Find(std::string_view name) const;
  const std::string &name(std::size_t id) const { return names_[id]; }
  std::size_t size() const { return names_.size(); }

 private:
  std::vector<std::string> names_;  // sorted
};

using FeatureVector = std::vector<std::size_t>;  // sorted ids

FeatureVector Propositionalize(const RelationalExample &example,
                               const FeatureDictionary &dictionary,
                               const InteractionLexicon &lexicon,
                               const LearnerParams &params);

// Propositional view used by the rule learner.
struct LabeledFeatures {
  std::set<std::string> features;
  bool positive = false;
  std::string regulation;
};

struct ExtractionRule {
  std::string id;
  std::vector<std::string> literals;  // sorted
  std::string regulation;
  std::size_t pos_covered = 0;  // training positives of this regulation
  std::size_t neg_covered = 0;  // all other training examples

  double precision() const;
  bool Matches(const std::set<std::string> &features) const;
};

enum class Termination { kExhausted, kNoRule };

struct LearnResult {
  std::vector<ExtractionRule> rules;  // application order
  std::map<std::string, Termination> termination;  // per regulation
};

// Greedy set covering per regulation, one against the rest. Each round
// grows one candidate per uncovered positive from that positive's
// features: a literal is always added first, then more while the rule
// covers more negatives than the budget or the score still improves, up
// to max_literals. The literal picked maximizes pos - lambda * neg (ties:
// fewer negatives, then smaller name). The best candidate within budget is
// kept if its score is positive. Rules are ordered by training precision,
// then positive coverage, then learning order. Throws Error without
// positives.
LearnResult LearnRules(const std::vector<LabeledFeatures> &training,
                       const LearnerParams &params);

// Features through a dictionary built on `training` alone.
LearnResult LearnRules(const std::vector<RelationalExample> &training,
                       const InteractionLexicon &lexicon,
                       const LearnerParams &params);

struct Extraction {
  std::string type;  // positive | negative | unknown
  std::string agent;
  std::string target;
  SentenceRef sentence_ref;
  std::string rule_id;

  friend bool operator==(const Extraction &, const Extraction &) = default;
};

// First matching rule per ordered gene pair; one extraction per distinct
// (type, agent, target).
std::vector<Extraction> ApplyRules(const std::vector<ExtractionRule> &rules,
                                   const DependencyGraph &graph,
                                   const InteractionLexicon &lexicon,
                                   const LearnerParams &params);

struct MeanStd {
  double mean = 0;
  double std = 0;  // sample standard deviation; 0 for one value
};
MeanStd Summarize(const std::vector<double> &values);

struct FoldResult {
  std::size_t size = 0;
  std::size_t positives = 0;
  std::size_t rules = 0;
  double precision = 1;
  double recall = 1;
};

struct CvReport {
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::vector<FoldResult> folds;
  MeanStd precision;
  MeanStd recall;
};

// Fold of each example: positives and negatives are shuffled separately
// (Fisher-Yates, mt19937_64) and dealt round-robin, negatives continuing
// where positives stopped.
std::vector<std::size_t> AssignFolds(const std::vector<bool> &positive,
                                     std::size_t k, std::uint64_t seed);

// Throws Error if k < 2, there are fewer examples than folds, or fewer
// positives than folds.
CvReport CrossValidate(const std::vector<RelationalExample> &examples,
                       std::size_t k, std::uint64_t seed,
                       const InteractionLexicon &lexicon,
                       const LearnerParams &params);

nlohmann::json RulesToJson(const std::vector<ExtractionRule> &rules,
                           const LearnerParams &params);
std::vector<ExtractionRule> RulesFromJson(const nlohmann::json &json,
                                          LearnerParams *params = nullptr);
nlohmann::json CvReportToJson(const CvReport &report);
std::string FormatCvReport(const CvReport &report);
nlohmann::json ExtractionToJson(const Extraction &extraction);

}  // namespace genic

#endif  // GENIC_LEARNER_H_
