#include "genic/semclass.h"

#include <algorithm>
#include <cstdint>
#include <functional>

namespace genic {

std::vector<ContextTriple> CollectTriples(
    const std::vector<DependencyGraph> &graphs,
    const std::set<Relation> &slots) {
  std::map<std::tuple<std::string, Relation, std::string>, std::size_t> counts;
  for (const DependencyGraph &g : graphs) {
    for (const Edge &e : g.edges()) {
      if (!slots.count(e.label)) continue;
      ++counts[{g.nodes[e.head].lemma, e.label, g.nodes[e.dependent].lemma}];
    }
  }
  std::vector<ContextTriple> out;
  for (const auto &[key, n] : counts) {
    out.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), n});
  }
  return out;
}

std::string FormatTriples(const std::vector<ContextTriple> &triples) {
  std::string out;
  for (const ContextTriple &t : triples) {
    out += t.headword + "\t" + RelationName(t.relation) + "\t" + t.argument +
           "\t" + std::to_string(t.count) + "\n";
  }
  return out;
}

std::vector<ContextTriple> ParseTriples(std::string_view content) {
  std::vector<ContextTriple> out;
  std::size_t line_no = 0;
  for (const std::string &line : text::Split(content, '\n')) {
    ++line_no;
    if (text::Trim(line).empty()) continue;
    const auto fields = text::Split(line, '\t');
    if (fields.size() != 4) {
      throw Error("triples line " + std::to_string(line_no) +
                  ": expected 4 fields");
    }
    ContextTriple t;
    t.headword = fields[0];
    t.relation = ParseRelation(fields[1]);
    t.argument = fields[2];
    try {
      const long n = std::stol(fields[3]);
      if (n < 1) throw Error("");
      t.count = static_cast<std::size_t>(n);
    } catch (const std::exception &) {
      throw Error("triples line " + std::to_string(line_no) + ": bad count");
    }
    out.push_back(std::move(t));
  }
  return out;
}

const char *ValidationStatusName(ValidationStatus status) {
  switch (status) {
    case ValidationStatus::kPending: return "pending";
    case ValidationStatus::kAccepted: return "accepted";
    case ValidationStatus::kRejected: return "rejected";
  }
  return "pending";
}

ValidationStatus ParseValidationStatus(std::string_view name) {
  if (name == "pending") return ValidationStatus::kPending;
  if (name == "accepted") return ValidationStatus::kAccepted;
  if (name == "rejected") return ValidationStatus::kRejected;
  throw Error("unknown validation status \"" + std::string(name) + "\"");
}

namespace {

// Numerator and denominator of the weighted overlap.
std::pair<std::uint64_t, std::uint64_t> Overlap(const ContextVector &a,
                                                const ContextVector &b) {
  std::uint64_t num = 0, den = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() || j != b.end()) {
    if (j == b.end() || (i != a.end() && i->first < j->first)) {
      den += i++->second;
    } else if (i == a.end() || j->first < i->first) {
      den += j++->second;
    } else {
      num += std::min(i->second, j->second);
      den += std::max(i->second, j->second);
      ++i;
      ++j;
    }
  }
  return {num, den};
}

}  // namespace

double ContextSimilarity(const ContextVector &a, const ContextVector &b) {
  const auto [num, den] = Overlap(a, b);
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

const SemanticClass &Hierarchy::at(const std::string &id) const {
  const auto it = classes.find(id);
  if (it == classes.end()) throw Error("unknown class id \"" + id + "\"");
  return it->second;
}

std::vector<std::string> Hierarchy::roots() const {
  std::set<std::string> children;
  for (const auto &[id, c] : classes) {
    children.insert(c.children.begin(), c.children.end());
  }
  std::vector<std::string> out;
  for (const auto &[id, c] : classes) {
    if (!children.count(id)) out.push_back(id);
  }
  std::sort(out.begin(), out.end(), [&](const auto &a, const auto &b) {
    return *at(a).members.begin() < *at(b).members.begin();
  });
  return out;
}

bool Hierarchy::IsUsable(const std::string &id) const {
  const SemanticClass &c = at(id);
  if (c.status != ValidationStatus::kAccepted) return false;
  std::function<bool(const SemanticClass &)> clean =
      [&](const SemanticClass &k) {
        if (k.status == ValidationStatus::kRejected) return false;
        for (const std::string &child : k.children) {
          if (!clean(at(child))) return false;
        }
        return true;
      };
  return clean(c);
}

std::string Hierarchy::ClassOf(const std::string &lemma) const {
  std::string best;
  std::size_t best_size = 0;
  for (const auto &[id, c] : classes) {
    if (!c.members.count(lemma) || !IsUsable(id)) continue;
    if (best.empty() || c.members.size() < best_size) {
      best = id;
      best_size = c.members.size();
    }
  }
  return best;
}

Hierarchy Cluster(const std::vector<ContextTriple> &triples,
                  double threshold) {
  Hierarchy h;
  h.threshold = threshold;
  std::map<std::string, ContextVector> by_lemma;
  for (const ContextTriple &t : triples) {
    by_lemma[t.argument][{t.headword, t.relation}] += t.count;
  }
  std::vector<std::string> active;
  for (auto &[lemma, contexts] : by_lemma) {
    SemanticClass c;
    c.id = "leaf:" + lemma;
    c.members = {lemma};
    c.contexts = contexts;
    active.push_back(c.id);
    h.classes[c.id] = std::move(c);
  }

  for (std::size_t step = 1;; ++step) {
    // Best pair by exact rational comparison, then by first members.
    std::size_t bi = 0, bj = 0;
    std::uint64_t bnum = 0, bden = 1;
    bool found = false;
    for (std::size_t i = 0; i < active.size(); ++i) {
      for (std::size_t j = i + 1; j < active.size(); ++j) {
        const SemanticClass &a = h.classes[active[i]];
        const SemanticClass &b = h.classes[active[j]];
        const auto [num, den] = Overlap(a.contexts, b.contexts);
        if (num == 0 || static_cast<double>(num) <
                            threshold * static_cast<double>(den)) {
          continue;
        }
        auto key = [&](std::size_t x, std::size_t y) {
          const std::string &p = *h.classes[active[x]].members.begin();
          const std::string &q = *h.classes[active[y]].members.begin();
          return std::minmax(p, q);
        };
        const std::uint64_t lhs = num * bden, rhs = bnum * den;
        if (!found || lhs > rhs || (lhs == rhs && key(i, j) < key(bi, bj))) {
          found = true;
          bi = i;
          bj = j;
          bnum = num;
          bden = den;
        }
      }
    }
    if (!found) break;
    std::string left = active[bi], right = active[bj];
    if (*h.classes[right].members.begin() < *h.classes[left].members.begin()) {
      std::swap(left, right);
    }
    SemanticClass merged;
    merged.id = "class-" + std::to_string(step);
    merged.children = {left, right};
    merged.similarity =
        static_cast<double>(bnum) / static_cast<double>(bden);
    for (const std::string &child : merged.children) {
      const SemanticClass &c = h.classes[child];
      merged.members.insert(c.members.begin(), c.members.end());
      for (const auto &[slot, n] : c.contexts) merged.contexts[slot] += n;
    }
    h.merges.push_back({left, right, merged.id, merged.similarity});
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(bj));
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(bi));
    active.push_back(merged.id);
    h.classes[merged.id] = std::move(merged);
  }
  return h;
}

Hierarchy ApplyValidation(Hierarchy hierarchy,
                          const ValidationDecisions &decisions) {
  for (const auto &[id, status] : decisions) {
    const auto it = hierarchy.classes.find(id);
    if (it == hierarchy.classes.end()) {
      throw Error("validation decision for unknown class \"" + id + "\"");
    }
    it->second.status = status;
  }
  return hierarchy;
}

ValidationDecisions ParseDecisions(std::string_view content) {
  ValidationDecisions out;
  std::size_t line_no = 0;
  for (const std::string &line : text::Split(content, '\n')) {
    ++line_no;
    const std::string trimmed = text::Trim(line);
    if (trimmed.empty() || trimmed[0] == '#') continue;
    const auto fields = text::Split(trimmed, '\t');
    if (fields.size() != 2) {
      throw Error("decisions line " + std::to_string(line_no) +
                  ": expected class_id<TAB>accepted|rejected");
    }
    const ValidationStatus status = ParseValidationStatus(text::Trim(fields[1]));
    if (status == ValidationStatus::kPending) {
      throw Error("decisions line " + std::to_string(line_no) +
                  ": decision must be accepted or rejected");
    }
    out.emplace_back(text::Trim(fields[0]), status);
  }
  return out;
}

DependencyGraph TypeNodes(DependencyGraph graph, const Hierarchy &hierarchy) {
  for (Node &node : graph.nodes) {
    const std::string id = hierarchy.ClassOf(node.lemma);
    if (id.empty()) {
      node.semantic_class.reset();
    } else {
      node.semantic_class = id;
    }
  }
  return graph;
}

nlohmann::json HierarchyToJson(const Hierarchy &hierarchy) {
  nlohmann::json classes = nlohmann::json::array();
  for (const auto &[id, c] : hierarchy.classes) {
    nlohmann::json contexts = nlohmann::json::array();
    for (const auto &[slot, n] : c.contexts) {
      contexts.push_back({{"headword", slot.first},
                          {"relation", RelationName(slot.second)},
                          {"count", n}});
    }
    classes.push_back({{"id", id},
                       {"members", c.members},
                       {"children", c.children},
                       {"contexts", contexts},
                       {"status", ValidationStatusName(c.status)},
                       {"similarity", c.similarity}});
  }
  nlohmann::json merges = nlohmann::json::array();
  for (const MergeStep &m : hierarchy.merges) {
    merges.push_back({{"left", m.left},
                      {"right", m.right},
                      {"merged", m.merged},
                      {"similarity", m.similarity}});
  }
  return {{"threshold", hierarchy.threshold},
          {"roots", hierarchy.roots()},
          {"classes", classes},
          {"merges", merges}};
}

Hierarchy HierarchyFromJson(const nlohmann::json &json) {
  Hierarchy h;
  try {
    h.threshold = json.at("threshold").get<double>();
    for (const auto &item : json.at("classes")) {
      SemanticClass c;
      c.id = item.at("id").get<std::string>();
      c.members = item.at("members").get<std::set<std::string>>();
      c.children = item.at("children").get<std::vector<std::string>>();
      for (const auto &ctx : item.at("contexts")) {
        c.contexts[{ctx.at("headword").get<std::string>(),
                    ParseRelation(ctx.at("relation").get<std::string>())}] =
            ctx.at("count").get<std::size_t>();
      }
      c.status = ParseValidationStatus(item.at("status").get<std::string>());
      c.similarity = item.at("similarity").get<double>();
      if (c.members.empty()) throw Error("class \"" + c.id + "\" is empty");
      h.classes[c.id] = std::move(c);
    }
    for (const auto &item : json.at("merges")) {
      h.merges.push_back({item.at("left").get<std::string>(),
                          item.at("right").get<std::string>(),
                          item.at("merged").get<std::string>(),
                          item.at("similarity").get<double>()});
    }
  } catch (const nlohmann::json::exception &e) {
    throw Error(std::string("malformed hierarchy: ") + e.what());
  }
  for (const auto &[id, c] : h.classes) {
    for (const std::string &child : c.children) {
      if (!h.classes.count(child)) {
        throw Error("class \"" + id + "\" has unknown child \"" + child + "\"");
      }
    }
  }
  return h;
}

}  // namespace genic
