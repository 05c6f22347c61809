#ifndef GENIC_SYNONYMS_H_
#define GENIC_SYNONYMS_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "genic/corpus.h"
#include "genic/ner.h"

namespace genic {

enum class TriggerDirection { kSecondIsFormerName, kSecondIsAlias, kUndirected };

const char *TriggerDirectionName(TriggerDirection direction);
TriggerDirection ParseTriggerDirection(std::string_view name);

enum class PunctuationSchema {
  kNone,
  kParenthesis,  // gene ( gene )
  kSlash,        // gene / gene
};

struct TriggerPattern {
  std::string id;
  std::vector<std::string> tokens;  // lowercased; empty for schemas
  PunctuationSchema schema = PunctuationSchema::kNone;
  TriggerDirection direction = TriggerDirection::kUndirected;
  double score = 1.0;
};

// JSON list of {id, tokens | schema, direction, score}.
std::vector<TriggerPattern> ParseTriggerPatterns(std::string_view json);
std::vector<TriggerPattern> LoadTriggerPatterns(const std::string &path);

struct SynonymCandidate {
  GeneMention left;
  GeneMention right;
  std::string pattern_id;
  TriggerDirection direction = TriggerDirection::kUndirected;
  SentenceRef sentence_ref;
  Span span;  // covers both mentions and the trigger
  std::size_t gap = 0;  // tokens between the mentions and the trigger
  double confidence = 0.0;
};

struct MatchOptions {
  std::size_t max_gap = 3;
  double distance_decay = 0.95;
};

// Token triggers pair the nearest mention before the trigger with every
// mention after it, each side within max_gap tokens. A side's window stops
// at brackets, colons and semicolons, except that an opening bracket may
// precede the trigger. Confidence is score * decay^(left gap + right gap).
// Pairs whose canonical names coincide are dropped.
std::vector<SynonymCandidate> MatchTriggers(
    const Sentence &sentence, const std::vector<GeneMention> &mentions,
    const std::vector<TriggerPattern> &patterns,
    const MatchOptions &options = {});

struct SynonymConflict {
  std::string alternate;
  std::optional<std::string> kept_preferred;
  std::vector<std::string> rejected_preferred;
  std::string reason;
};

struct MinedSynonyms {
  SynonymTable table;
  std::vector<SynonymConflict> conflicts;
};

// Directed patterns make the first mention preferred; undirected ones prefer
// the lexicographically smaller name. Confidences of identical pairs add up.
// Conflicting orientations of one pair, and alternates with several preferred
// names, keep the highest aggregate; a tie rejects all contenders. Throws
// SynonymCycleError if the surviving pairs form a cycle.
MinedSynonyms BuildSynonymTable(const std::vector<SynonymCandidate> &candidates,
                                double min_confidence = 0.8);

struct PrecisionRecall {
  double precision = 1.0;
  double recall = 0.0;
};

// Unordered pair matching. Empty predictions score precision 1.
PrecisionRecall EvaluateSynonymMining(const SynonymTable &predicted,
                                      const SynonymTable &gold);

}  // namespace genic

#endif  // GENIC_SYNONYMS_H_
