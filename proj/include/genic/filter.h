#ifndef GENIC_FILTER_H_
#define GENIC_FILTER_H_

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "genic/corpus.h"
#include "genic/ner.h"
#include "json.hpp"

namespace genic {

// Sentence relevance classes. The numeric values index per-class arrays.
enum class Relevance { kRelevant = 0, kIrrelevant = 1 };

const char *RelevanceName(Relevance label);
Relevance ParseRelevance(std::string_view name);

// Placeholder that replaces gene mentions in feature bags.
inline constexpr char kGenePlaceholder[] = "GENE";

struct LabeledSentence {
  SentenceRef sentence_ref;
  std::set<std::string> bag;
  std::optional<Relevance> label;  // present only in training data
};

// Lowercased word types; each gene mention contributes kGenePlaceholder
// instead of its tokens. Punctuation and symbols are dropped.
std::set<std::string> BuildFeatureBag(const Sentence &sentence,
                                      const std::vector<GeneMention> &mentions);

enum class CountMode { kDistinctCanonical, kRawMentions };

const char *CountModeName(CountMode mode);
CountMode ParseCountMode(std::string_view name);

std::size_t CountGenes(const std::vector<GeneMention> &mentions,
                       CountMode mode);

// True iff the sentence carries at least two gene names under `mode`.
// Throws Error if a mention belongs to another sentence.
bool CandidateFilter(const Sentence &sentence,
                     const std::vector<GeneMention> &mentions,
                     CountMode mode = CountMode::kRawMentions);

struct RankedFeature {
  std::string feature;
  double mutual_information = 0.0;
};

// Mutual information (nats) between feature presence and the label.
double MutualInformation(std::size_t with_feature_relevant,
                         std::size_t with_feature_irrelevant,
                         std::size_t total_relevant,
                         std::size_t total_irrelevant);

// All features ranked by mutual information with the label, ties broken by
// lexicographic order. Requires both labels in `training`.
std::vector<RankedFeature> RankFeatures(
    const std::vector<LabeledSentence> &training);

// Top-k features; all features when k exceeds their number.
std::set<std::string> SelectFeatures(
    const std::vector<LabeledSentence> &training, std::size_t k);

// Bernoulli naive Bayes over a fixed vocabulary.
//
// Likelihoods are P(feature present | class), Laplace-smoothed:
//   (documents of the class containing the feature + alpha)
//     / (documents of the class + 2 alpha)
// Classification multiplies the prior by the likelihood of every vocabulary
// feature present in the bag; absent and out-of-vocabulary features carry
// no evidence.
struct NaiveBayesModel {
  static constexpr int kFormatVersion = 1;

  std::array<double, 2> class_log_priors{};
  std::array<std::size_t, 2> class_counts{};
  std::map<std::string, std::array<double, 2>> feature_log_likelihoods;
  std::set<std::string> vocabulary;
  double smoothing_alpha = 1.0;
  double threshold = 0.5;
};

NaiveBayesModel TrainNaiveBayes(const std::vector<LabeledSentence> &training,
                                const std::set<std::string> &vocabulary,
                                double alpha = 1.0, double threshold = 0.5);

struct Classification {
  double posterior_relevant = 0.0;
  double posterior_irrelevant = 0.0;
  bool accepted = false;
};

Classification Classify(const NaiveBayesModel &model,
                        const std::set<std::string> &bag);

struct FilterDecision {
  SentenceRef sentence_ref;
  bool candidate = false;
  double posterior_relevant = 0.0;
  bool accepted = false;  // implies candidate
};

// Candidate check followed by classification. Without a model every
// candidate is accepted with posterior 1.
FilterDecision DecideSentence(const Sentence &sentence,
                              const std::vector<GeneMention> &mentions,
                              const NaiveBayesModel *model, CountMode mode);

nlohmann::json ModelToJson(const NaiveBayesModel &model);
NaiveBayesModel ModelFromJson(const nlohmann::json &json);

// Training file: `label<TAB>sentence_text` per line, label in
// {relevant, irrelevant}.
std::vector<LabeledSentence> ParseTrainingTsv(std::string_view content,
                                              const GeneLexicon &lexicon);

}  // namespace genic

#endif  // GENIC_FILTER_H_
