#ifndef GENIC_SEMCLASS_H_
#define GENIC_SEMCLASS_H_

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "genic/parser.h"
#include "json.hpp"

namespace genic {

struct ContextTriple {
  std::string headword;
  Relation relation = Relation::kSubject;
  std::string argument;
  std::size_t count = 1;

  friend bool operator==(const ContextTriple &,
                         const ContextTriple &) = default;
};

inline const std::set<Relation> &DefaultContextSlots() {
  static const std::set<Relation> slots = {Relation::kSubject, Relation::kObject,
                                           Relation::kPrep, Relation::kNofN};
  return slots;
}

// One triple per (head lemma, relation, dependent lemma), sorted.
std::vector<ContextTriple> CollectTriples(
    const std::vector<DependencyGraph> &graphs,
    const std::set<Relation> &slots = DefaultContextSlots());

std::string FormatTriples(const std::vector<ContextTriple> &triples);
std::vector<ContextTriple> ParseTriples(std::string_view content);

enum class ValidationStatus { kPending, kAccepted, kRejected };

const char *ValidationStatusName(ValidationStatus status);
ValidationStatus ParseValidationStatus(std::string_view name);

using ContextSlot = std::pair<std::string, Relation>;  // (headword, relation)
using ContextVector = std::map<ContextSlot, std::size_t>;

// Sum of min counts over sum of max counts; 0 when both are empty.
double ContextSimilarity(const ContextVector &a, const ContextVector &b);

struct SemanticClass {
  std::string id;  // "leaf:<lemma>" or "class-<merge step>"
  std::set<std::string> members;
  std::vector<std::string> children;
  ContextVector contexts;
  ValidationStatus status = ValidationStatus::kPending;
  double similarity = 1.0;  // at which the children were merged
};

struct MergeStep {
  std::string left;  // child with the smaller first member
  std::string right;
  std::string merged;
  double similarity = 0;
};

class Hierarchy {
 public:
  double threshold = 0;
  std::map<std::string, SemanticClass> classes;
  std::vector<MergeStep> merges;

  const SemanticClass &at(const std::string &id) const;
  // Classes that are not a child of another class, by first member.
  std::vector<std::string> roots() const;
  // Accepted, and neither it nor a class merged into it is rejected.
  bool IsUsable(const std::string &id) const;
  // Most specific usable class containing the lemma, or empty.
  std::string ClassOf(const std::string &lemma) const;
};

// Agglomerative clustering of argument lemmas. Each step merges the most
// similar pair with similarity >= threshold and > 0; ties go to the pair
// whose (first member, first member) is lexicographically smallest.
Hierarchy Cluster(const std::vector<ContextTriple> &triples,
                  double threshold = 0.25);

using ValidationDecisions =
    std::vector<std::pair<std::string, ValidationStatus>>;

// Throws Error on an unknown class id.
Hierarchy ApplyValidation(Hierarchy hierarchy,
                          const ValidationDecisions &decisions);

// `class_id<TAB>accepted|rejected`.
ValidationDecisions ParseDecisions(std::string_view content);

DependencyGraph TypeNodes(DependencyGraph graph, const Hierarchy &hierarchy);

nlohmann::json HierarchyToJson(const Hierarchy &hierarchy);
Hierarchy HierarchyFromJson(const nlohmann::json &json);

}  // namespace genic

#endif  // GENIC_SEMCLASS_H_
