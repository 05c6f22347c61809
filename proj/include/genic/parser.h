#ifndef GENIC_PARSER_H_
#define GENIC_PARSER_H_

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "genic/corpus.h"
#include "genic/ner.h"
#include "json.hpp"

namespace genic {

enum class PosTag {
  kNoun,
  kVerb,
  kAdjective,
  kAdverb,
  kPreposition,
  kDeterminer,
  kConjunction,
  kPronoun,
  kPunctuation,
  kOther,
};

const char *PosTagName(PosTag tag);
PosTag ParsePosTag(std::string_view name);

// Closed-class words and irregular forms: `word<TAB>tag<TAB>lemma`.
class TagLexicon {
 public:
  struct Entry {
    PosTag tag;
    std::string lemma;
  };

  static TagLexicon Parse(std::string_view content);
  static TagLexicon Load(const std::string &path);

  void Add(const std::string &word, PosTag tag, const std::string &lemma);
  const Entry *Find(std::string_view lowercased) const;
  // True if `lemma` is listed as the lemma of some verb entry.
  bool IsVerbStem(std::string_view lemma) const;
  bool IsNounStem(std::string_view lemma) const;

 private:
  std::map<std::string, Entry, std::less<>> entries_;
  std::set<std::string, std::less<>> verb_stems_;
  std::set<std::string, std::less<>> noun_stems_;
};

// Multiword terms, one per line, optionally `term<TAB>tag` (default noun).
class TermLexicon {
 public:
  static TermLexicon Parse(std::string_view content);
  static TermLexicon Load(const std::string &path);

  void Add(const std::string &term, PosTag tag = PosTag::kNoun);
  // Length in tokens of the longest term starting at `start`, with its tag.
  std::optional<std::pair<std::size_t, PosTag>> LongestMatch(
      const std::vector<Token> &tokens, std::size_t start) const;
  std::size_t size() const { return terms_.size(); }

 private:
  std::map<std::string, PosTag> terms_;  // lowercased, tokens joined by ' '
  std::size_t max_tokens_ = 0;
};

// A token or a merged run of tokens treated as one word.
struct Unit {
  std::size_t first = 0;  // token indices, inclusive
  std::size_t last = 0;
  std::string text;
  std::string lemma;
  PosTag tag = PosTag::kOther;
  std::optional<std::string> gene;  // canonical name for gene units

  friend bool operator==(const Unit &, const Unit &) = default;
};

struct PosTaggedSentence {
  SentenceRef sentence_ref;
  std::vector<Token> tokens;
  std::vector<PosTag> tags;  // one per token
  std::vector<std::string> lemmas;
  std::vector<bool> known;   // found in the tag lexicon
  std::vector<Unit> units;   // one per token until terms are merged

  // Token ranges collapsed into single units.
  std::vector<std::pair<std::size_t, std::size_t>> term_merges() const;
};

// Lexicon lookup, then suffix rules, then noun. A contextual pass turns
// participles between a determiner or adjective and a noun into adjectives
// and -ing forms after a determiner into nouns.
PosTaggedSentence TagSentence(const Sentence &sentence,
                              const TagLexicon &lexicon);

// Collapses gene mentions, lexicon terms (longest match) and Latin species
// names (capitalized genus + lowercase epithet, neither a known word) into
// single units. A term wins over a shorter gene mention it contains.
PosTaggedSentence MergeTerms(const PosTaggedSentence &tagged,
                             const TermLexicon &terms,
                             const std::vector<GeneMention> &mentions = {},
                             const TagLexicon *lexicon = nullptr);

enum class Relation {
  kSubject,
  kObject,
  kPrep,
  kVGP,
  kOGP,
  kNofN,
  kVtoV,
  kVcooV,
  kNcooN,
  kNVAdj,
  kPaSim,
  kPaRel,
};

inline constexpr std::array<Relation, 12> kAllRelations = {
    Relation::kSubject, Relation::kObject, Relation::kPrep,
    Relation::kVGP,     Relation::kOGP,    Relation::kNofN,
    Relation::kVtoV,    Relation::kVcooV,  Relation::kNcooN,
    Relation::kNVAdj,   Relation::kPaSim,  Relation::kPaRel};

const char *RelationName(Relation relation);
Relation ParseRelation(std::string_view name);

struct Node {
  std::size_t first = 0;
  std::size_t last = 0;
  std::string text;
  std::string lemma;
  PosTag tag = PosTag::kOther;
  std::optional<std::string> gene;
  std::optional<std::string> semantic_class;

  friend bool operator==(const Node &, const Node &) = default;
};

struct Edge {
  std::size_t head = 0;
  std::size_t dependent = 0;
  Relation label = Relation::kSubject;
  std::string marker;  // preposition for Prep, V-GP and O-GP edges

  auto key() const { return std::make_tuple(head, dependent, label); }
  friend bool operator==(const Edge &a, const Edge &b) {
    return a.key() == b.key();
  }
  friend bool operator<(const Edge &a, const Edge &b) {
    return a.key() < b.key();
  }
};

class DependencyGraph {
 public:
  SentenceRef sentence_ref;
  std::vector<Node> nodes;

  // False if an edge with the same (head, dependent, label) exists.
  // Throws Error on out-of-range endpoints.
  bool AddEdge(std::size_t head, std::size_t dependent, Relation label,
               std::string marker = "");
  bool HasEdge(std::size_t head, std::size_t dependent, Relation label) const;
  const std::set<Edge> &edges() const { return edges_; }

  // Node whose token range equals [first, last].
  std::optional<std::size_t> FindNode(std::size_t first,
                                      std::size_t last) const;

  friend bool operator==(const DependencyGraph &,
                         const DependencyGraph &) = default;

 private:
  std::set<Edge> edges_;
};

DependencyGraph ExtractRelations(const PosTaggedSentence &tagged);

// VcooV copies a subject to a coordinated verb lacking one; NcooN conjuncts
// receive the incoming edges of the first conjunct. Runs to a fixpoint.
DependencyGraph DistributeCoordination(DependencyGraph graph);

// PaSim/PaRel(v, x) add Object(v, x); a by-phrase V-GP(v, a) on such a verb
// adds Subject(v, a).
DependencyGraph NormalizePassive(DependencyGraph graph);

struct ParserResources {
  TagLexicon tags;
  TermLexicon terms;

  static ParserResources Load(const std::string &data_dir);
};

// Tagging, merging, the cascade, then coordination and passive
// normalization alternated until no edge is added.
DependencyGraph ParseSentence(const Sentence &sentence,
                              const std::vector<GeneMention> &mentions,
                              const ParserResources &resources);

struct EvaluationCounts {
  std::size_t nb_rel = 0;   // gold edges
  std::size_t rel_ok = 0;   // correct predicted edges
  std::size_t rel_tot = 0;  // predicted edges

  friend bool operator==(const EvaluationCounts &,
                         const EvaluationCounts &) = default;
};

struct RelationMetrics {
  EvaluationCounts counts;
  double recall = 1.0;
  double precision = 1.0;
};

// recall = rel_ok / nb_rel, precision = rel_ok / rel_tot; 0/0 is 1.
RelationMetrics ComputeMetrics(const EvaluationCounts &counts);

double RoundTo2(double value);

// Exact (head range, dependent range, label) matching, per label. Throws
// Error if the two lists do not cover the same sentences.
std::map<Relation, RelationMetrics> EvaluateRelations(
    const std::vector<DependencyGraph> &gold,
    const std::vector<DependencyGraph> &predicted);

// Gold edges: `doc_id<TAB>sent_idx<TAB>label<TAB>head<TAB>dependent`, where a
// token field is `surface@first` or `surface@first-last`.
std::vector<DependencyGraph> ParseGoldRelations(std::string_view content);
std::string FormatRelations(const std::vector<DependencyGraph> &graphs);

nlohmann::json GraphToJson(const DependencyGraph &graph);
DependencyGraph GraphFromJson(const nlohmann::json &json);

}  // namespace genic

#endif  // GENIC_PARSER_H_
