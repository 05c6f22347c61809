#ifndef GENIC_NER_H_
#define GENIC_NER_H_

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "genic/corpus.h"

namespace genic {

enum class CasePolicy { kExact, kFoldFirstChar, kFoldAll };

// Dictionary of gene and protein names. Each surface variant maps to exactly
// one canonical name. Variants are matched as token sequences, so multiword
// names ("GerE RNA polymerase") match as one unit.
//
// Variant generation is limited to the case policy plus hyphen/space
// alternation: "sigma K" also matches "sigma-K" and vice versa.
class GeneLexicon {
 public:
  explicit GeneLexicon(CasePolicy policy = CasePolicy::kExact);

  // Throws Error if a variant already belongs to another canonical name or
  // if two canonical names collide under the case policy.
  void Add(const std::string &canonical,
           const std::vector<std::string> &variants = {});

  // Lines of `canonical<TAB>variant1|variant2|...`; the variant column is
  // optional. Blank lines and '#' comments are ignored.
  static GeneLexicon Parse(std::string_view content,
                           CasePolicy policy = CasePolicy::kExact);
  static GeneLexicon Load(const std::string &path,
                          CasePolicy policy = CasePolicy::kExact);

  // Canonical name for a token sequence, if it is a known variant.
  std::optional<std::string> Lookup(std::span<const Token> tokens) const;

  bool ContainsCanonical(const std::string &name) const;
  const std::map<std::string, std::set<std::string>> &entries() const {
    return entries_;
  }
  std::size_t max_variant_tokens() const { return max_tokens_; }
  CasePolicy case_policy() const { return policy_; }
  bool empty() const { return entries_.empty(); }

 private:
  std::string Key(std::span<const Token> tokens) const;
  std::string KeyOf(std::string_view surface) const;
  void Index(const std::string &canonical, const std::string &variant,
             bool explicit_variant);

  CasePolicy policy_;
  std::map<std::string, std::set<std::string>> entries_;
  std::unordered_map<std::string, std::string> index_;
  std::map<std::string, std::string> canonical_keys_;
  std::size_t max_tokens_ = 0;
};

struct GeneMention {
  SentenceRef sentence_ref;
  std::size_t first = 0;  // token indices, inclusive
  std::size_t last = 0;
  std::string surface;
  std::string canonical;

  friend bool operator==(const GeneMention &, const GeneMention &) = default;
};

// Longest match, left to right, non-overlapping.
std::vector<GeneMention> FindGeneMentions(const Sentence &sentence,
                                          const GeneLexicon &lexicon);

enum class Provenance { kLexicon, kMined, kManual };

const char *ProvenanceName(Provenance provenance);
Provenance ParseProvenance(std::string_view name);

struct SynonymPair {
  std::string preferred;
  std::string alternate;
  Provenance provenance = Provenance::kManual;

  friend bool operator==(const SynonymPair &, const SynonymPair &) = default;
};

// Raised when the alias graph contains a cycle; cycle() lists its members
// in traversal order, starting and ending with the same name.
class SynonymCycleError : public Error {
 public:
  explicit SynonymCycleError(std::vector<std::string> cycle);
  const std::vector<std::string> &cycle() const { return cycle_; }

 private:
  std::vector<std::string> cycle_;
};

// A function from alternate names to preferred names. Alias chains are
// resolved at build time, so every stored pair points at a root name.
class SynonymTable {
 public:
  SynonymTable() = default;

  // Throws SynonymCycleError on cycles and Error on self-pairs or an
  // alternate with two different preferred names.
  static SynonymTable Build(const std::vector<SynonymPair> &pairs);

  // Lines of `preferred<TAB>alternate<TAB>provenance`.
  static SynonymTable Parse(std::string_view content);
  static SynonymTable Load(const std::string &path);
  std::string ToTsv() const;

  // Preferred name for `name`, or `name` itself when it is not an alternate.
  std::string Resolve(const std::string &name) const;
  bool IsAlternate(const std::string &name) const;

  // Sorted by (preferred, alternate).
  const std::vector<SynonymPair> &pairs() const { return pairs_; }
  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }

 private:
  std::vector<SynonymPair> pairs_;
  std::map<std::string, std::string> preferred_;
};

GeneMention Canonicalize(GeneMention mention, const SynonymTable &table);

}  // namespace genic

#endif  // GENIC_NER_H_
