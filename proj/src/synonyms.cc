#include "genic/synonyms.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace genic {

const char *TriggerDirectionName(TriggerDirection direction) {
  switch (direction) {
    case TriggerDirection::kSecondIsFormerName: return "second_is_former_name";
    case TriggerDirection::kSecondIsAlias: return "second_is_alias";
    case TriggerDirection::kUndirected: return "undirected";
  }
  return "undirected";
}

TriggerDirection ParseTriggerDirection(std::string_view name) {
  if (name == "second_is_former_name") {
    return TriggerDirection::kSecondIsFormerName;
  }
  if (name == "second_is_alias") return TriggerDirection::kSecondIsAlias;
  if (name == "undirected") return TriggerDirection::kUndirected;
  throw Error("unknown trigger direction \"" + std::string(name) + "\"");
}

std::vector<TriggerPattern> ParseTriggerPatterns(std::string_view content) {
  std::vector<TriggerPattern> patterns;
  try {
    const nlohmann::json json = nlohmann::json::parse(content);
    if (!json.is_array()) throw Error("trigger patterns must be a JSON list");
    std::set<std::string> ids;
    for (const auto &item : json) {
      TriggerPattern p;
      p.id = item.at("id").get<std::string>();
      if (!ids.insert(p.id).second) {
        throw Error("duplicate trigger pattern id \"" + p.id + "\"");
      }
      if (item.contains("tokens")) {
        for (const auto &t : item.at("tokens")) {
          p.tokens.push_back(text::ToLower(t.get<std::string>()));
        }
      }
      if (item.contains("schema")) {
        const std::string schema = item.at("schema").get<std::string>();
        if (schema == "parenthesis") {
          p.schema = PunctuationSchema::kParenthesis;
        } else if (schema == "slash") {
          p.schema = PunctuationSchema::kSlash;
        } else {
          throw Error("unknown punctuation schema \"" + schema + "\"");
        }
      }
      if (p.tokens.empty() == (p.schema == PunctuationSchema::kNone)) {
        throw Error("pattern \"" + p.id +
                    "\" needs exactly one of tokens or schema");
      }
      p.direction =
          ParseTriggerDirection(item.value("direction", "undirected"));
      p.score = item.value("score", 1.0);
      if (!(p.score >= 0 && p.score <= 1)) {
        throw Error("pattern \"" + p.id + "\" score outside [0, 1]");
      }
      patterns.push_back(std::move(p));
    }
  } catch (const nlohmann::json::exception &e) {
    throw Error(std::string("malformed trigger patterns: ") + e.what());
  }
  return patterns;
}

std::vector<TriggerPattern> LoadTriggerPatterns(const std::string &path) {
  return ParseTriggerPatterns(text::ReadFile(path, "trigger patterns"));
}

namespace {

bool IsBarrier(const Token &token) {
  static const std::set<std::string> kBarriers = {"(", ")", "[", "]", ";",
                                                  ":"};
  return kBarriers.count(token.text) > 0;
}

bool IsOpening(const Token &token) {
  return token.text == "(" || token.text == "[";
}

SynonymCandidate MakeCandidate(const Sentence &sentence,
                               const GeneMention &left,
                               const GeneMention &right,
                               const TriggerPattern &pattern,
                               std::size_t gap, double decay) {
  SynonymCandidate c;
  c.left = left;
  c.right = right;
  c.pattern_id = pattern.id;
  c.direction = pattern.direction;
  c.sentence_ref = sentence.ref();
  c.span = {sentence.tokens[left.first].span.start,
            sentence.tokens[right.last].span.end};
  c.gap = gap;
  c.confidence = pattern.score * std::pow(decay, static_cast<double>(gap));
  return c;
}

}  // namespace

std::vector<SynonymCandidate> MatchTriggers(
    const Sentence &sentence, const std::vector<GeneMention> &mentions,
    const std::vector<TriggerPattern> &patterns, const MatchOptions &options) {
  const std::vector<Token> &tokens = sentence.tokens;
  std::vector<bool> in_mention(tokens.size(), false);
  for (const GeneMention &m : mentions) {
    for (std::size_t t = m.first; t <= m.last && t < tokens.size(); ++t) {
      in_mention[t] = true;
    }
  }

  std::vector<SynonymCandidate> out;
  auto emit = [&](const GeneMention &left, const GeneMention &right,
                  const TriggerPattern &pattern, std::size_t gap) {
    if (left.canonical == right.canonical) return;
    out.push_back(MakeCandidate(sentence, left, right, pattern, gap,
                                options.distance_decay));
  };

  for (const TriggerPattern &pattern : patterns) {
    if (pattern.schema != PunctuationSchema::kNone) {
      const std::string open =
          pattern.schema == PunctuationSchema::kParenthesis ? "(" : "/";
      for (const GeneMention &left : mentions) {
        const std::size_t p = left.last + 1;
        if (p >= tokens.size() || tokens[p].text != open) continue;
        for (const GeneMention &right : mentions) {
          if (right.first != p + 1) continue;
          if (pattern.schema == PunctuationSchema::kParenthesis &&
              (right.last + 1 >= tokens.size() ||
               tokens[right.last + 1].text != ")")) {
            continue;
          }
          emit(left, right, pattern, 0);
        }
      }
      continue;
    }

    const std::size_t len = pattern.tokens.size();
    for (std::size_t t0 = 0; t0 + len <= tokens.size(); ++t0) {
      bool match = true;
      for (std::size_t k = 0; k < len && match; ++k) {
        match = !in_mention[t0 + k] &&
                text::ToLower(tokens[t0 + k].text) == pattern.tokens[k];
      }
      if (!match) continue;
      const std::size_t t1 = t0 + len - 1;

      const GeneMention *left = nullptr;
      for (const GeneMention &m : mentions) {
        if (m.last < t0 && (left == nullptr || m.last > left->last)) left = &m;
      }
      if (left == nullptr) continue;
      const std::size_t left_gap = t0 - left->last - 1;
      if (left_gap > options.max_gap) continue;
      bool blocked = false;
      for (std::size_t t = left->last + 1; t < t0; ++t) {
        if (IsBarrier(tokens[t]) && !(t + 1 == t0 && IsOpening(tokens[t]))) {
          blocked = true;
        }
      }
      if (blocked) continue;

      for (const GeneMention &right : mentions) {
        if (right.first <= t1) continue;
        const std::size_t right_gap = right.first - t1 - 1;
        if (right_gap > options.max_gap) continue;
        bool barrier = false;
        for (std::size_t t = t1 + 1; t < right.first; ++t) {
          if (IsBarrier(tokens[t])) barrier = true;
        }
        if (barrier) continue;
        emit(*left, right, pattern, left_gap + right_gap);
      }
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const SynonymCandidate &a, const SynonymCandidate &b) {
                     return std::tie(a.left.first, a.right.first) <
                            std::tie(b.left.first, b.right.first);
                   });
  return out;
}

MinedSynonyms BuildSynonymTable(const std::vector<SynonymCandidate> &candidates,
                                double min_confidence) {
  // Aggregate confidence per directed (preferred, alternate) pair.
  std::map<std::pair<std::string, std::string>, double> directed;
  for (const SynonymCandidate &c : candidates) {
    if (c.confidence < min_confidence) continue;
    std::string first = c.left.canonical;
    std::string second = c.right.canonical;
    if (first == second) continue;
    if (c.direction == TriggerDirection::kUndirected && second < first) {
      std::swap(first, second);
    }
    directed[{first, second}] += c.confidence;
  }

  MinedSynonyms result;
  // Opposite orientations of the same pair.
  std::map<std::pair<std::string, std::string>, double> oriented;
  for (const auto &[pair, conf] : directed) {
    const auto reverse = directed.find({pair.second, pair.first});
    if (reverse == directed.end()) {
      oriented[pair] = conf;
      continue;
    }
    if (pair.first > pair.second) continue;  // handled with its reverse
    if (conf > reverse->second) {
      oriented[pair] = conf;
      result.conflicts.push_back(
          {pair.second, pair.first, {pair.second}, "opposite orientation"});
    } else if (reverse->second > conf) {
      oriented[reverse->first] = reverse->second;
      result.conflicts.push_back(
          {pair.first, pair.second, {pair.first}, "opposite orientation"});
    } else {
      result.conflicts.push_back({pair.second,
                                  std::nullopt,
                                  {pair.first},
                                  "tied opposite orientations"});
    }
  }

  std::map<std::string, std::vector<std::pair<std::string, double>>> by_alt;
  for (const auto &[pair, conf] : oriented) {
    by_alt[pair.second].push_back({pair.first, conf});
  }
  std::vector<SynonymPair> pairs;
  for (auto &[alternate, options] : by_alt) {
    if (options.size() == 1) {
      pairs.push_back({options[0].first, alternate, Provenance::kMined});
      continue;
    }
    double best = -1;
    for (const auto &o : options) best = std::max(best, o.second);
    std::vector<std::string> winners;
    SynonymConflict conflict;
    conflict.alternate = alternate;
    for (const auto &o : options) {
      if (o.second == best) {
        winners.push_back(o.first);
      } else {
        conflict.rejected_preferred.push_back(o.first);
      }
    }
    if (winners.size() == 1) {
      conflict.kept_preferred = winners[0];
      conflict.reason = "lower aggregate confidence";
      pairs.push_back({winners[0], alternate, Provenance::kMined});
    } else {
      conflict.rejected_preferred.insert(conflict.rejected_preferred.end(),
                                         winners.begin(), winners.end());
      std::sort(conflict.rejected_preferred.begin(),
                conflict.rejected_preferred.end());
      conflict.reason = "tied aggregate confidence";
    }
    result.conflicts.push_back(std::move(conflict));
  }
  result.table = SynonymTable::Build(pairs);
  return result;
}

PrecisionRecall EvaluateSynonymMining(const SynonymTable &predicted,
                                      const SynonymTable &gold) {
  auto unordered = [](const SynonymTable &table) {
    std::set<std::pair<std::string, std::string>> out;
    for (const SynonymPair &p : table.pairs()) {
      out.insert(std::minmax(p.preferred, p.alternate));
    }
    return out;
  };
  const auto p = unordered(predicted);
  const auto g = unordered(gold);
  std::size_t hits = 0;
  for (const auto &pair : p) hits += g.count(pair);
  PrecisionRecall pr;
  pr.precision = p.empty() ? 1.0 : static_cast<double>(hits) / p.size();
  pr.recall = g.empty() ? 1.0 : static_cast<double>(hits) / g.size();
  if (p.empty()) pr.recall = g.empty() ? 1.0 : 0.0;
  return pr;
}

}  // namespace genic
