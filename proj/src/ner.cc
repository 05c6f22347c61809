#include "genic/ner.h"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace genic {

GeneLexicon::GeneLexicon(CasePolicy policy) : policy_(policy) {}

std::string GeneLexicon::Key(std::span<const Token> tokens) const {
  std::string key;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) key.push_back(' ');
    key += tokens[i].text;
  }
  switch (policy_) {
    case CasePolicy::kExact:
      break;
    case CasePolicy::kFoldAll:
      key = text::ToLower(key);
      break;
    case CasePolicy::kFoldFirstChar: {
      if (!key.empty()) {
        const std::u32string chars = text::Decode(key);
        key = text::ToLower(text::Encode(chars.substr(0, 1))) +
              text::Encode(chars.substr(1));
      }
      break;
    }
  }
  return key;
}

std::string GeneLexicon::KeyOf(std::string_view surface) const {
  const std::vector<Token> tokens = Tokenize(surface);
  return Key(tokens);
}

void GeneLexicon::Index(const std::string &canonical,
                        const std::string &variant, bool explicit_variant) {
  const std::vector<Token> tokens = Tokenize(variant);
  if (tokens.empty()) return;
  const std::string key = Key(tokens);
  auto it = index_.find(key);
  if (it != index_.end()) {
    if (it->second == canonical) return;
    if (!explicit_variant) return;
    throw Error("lexicon variant \"" + variant + "\" maps to both \"" +
                it->second + "\" and \"" + canonical + "\"");
  }
  index_.emplace(key, canonical);
  max_tokens_ = std::max(max_tokens_, tokens.size());
}

void GeneLexicon::Add(const std::string &canonical,
                      const std::vector<std::string> &variants) {
  if (text::Trim(canonical).empty()) throw Error("empty canonical name");
  const std::string canonical_key = KeyOf(canonical);
  auto known = canonical_keys_.find(canonical_key);
  if (known != canonical_keys_.end() && known->second != canonical) {
    throw Error("canonical names \"" + known->second + "\" and \"" +
                canonical + "\" collide under the case policy");
  }
  canonical_keys_[canonical_key] = canonical;

  std::vector<std::string> all = {canonical};
  all.insert(all.end(), variants.begin(), variants.end());
  auto &surfaces = entries_[canonical];
  for (const std::string &raw : all) {
    const std::string variant = text::Trim(raw);
    if (variant.empty()) continue;
    surfaces.insert(variant);
    Index(canonical, variant, true);
  }
  // Hyphen/space alternation.
  for (const std::string &raw : all) {
    const std::string variant = text::Trim(raw);
    std::string hyphenated = variant;
    std::replace(hyphenated.begin(), hyphenated.end(), ' ', '-');
    std::string spaced = variant;
    std::replace(spaced.begin(), spaced.end(), '-', ' ');
    if (hyphenated != variant) Index(canonical, hyphenated, false);
    if (spaced != variant) Index(canonical, spaced, false);
  }
}

GeneLexicon GeneLexicon::Parse(std::string_view content, CasePolicy policy) {
  GeneLexicon lexicon(policy);
  std::istringstream in{std::string(content)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::Trim(line).empty() || text::Trim(line)[0] == '#') continue;
    const std::vector<std::string> fields = text::Split(line, '\t');
    if (fields.size() > 2) {
      throw Error("lexicon line " + std::to_string(line_no) +
                  ": expected canonical<TAB>variants");
    }
    std::vector<std::string> variants;
    if (fields.size() == 2) variants = text::Split(fields[1], '|');
    try {
      lexicon.Add(text::Trim(fields[0]), variants);
    } catch (const Error &e) {
      throw Error("lexicon line " + std::to_string(line_no) + ": " +
                  e.what());
    }
  }
  return lexicon;
}

GeneLexicon GeneLexicon::Load(const std::string &path, CasePolicy policy) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open lexicon: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return Parse(buffer.str(), policy);
}

std::optional<std::string> GeneLexicon::Lookup(
    std::span<const Token> tokens) const {
  if (tokens.empty()) return std::nullopt;
  auto it = index_.find(Key(tokens));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool GeneLexicon::ContainsCanonical(const std::string &name) const {
  return entries_.count(name) > 0;
}

std::vector<GeneMention> FindGeneMentions(const Sentence &sentence,
                                          const GeneLexicon &lexicon) {
  std::vector<GeneMention> mentions;
  const std::vector<Token> &tokens = sentence.tokens;
  std::size_t i = 0;
  while (i < tokens.size()) {
    const std::size_t longest =
        std::min(lexicon.max_variant_tokens(), tokens.size() - i);
    bool matched = false;
    for (std::size_t len = longest; len >= 1; --len) {
      const auto canonical =
          lexicon.Lookup(std::span<const Token>(tokens).subspan(i, len));
      if (!canonical) continue;
      GeneMention mention;
      mention.sentence_ref = sentence.ref();
      mention.first = i;
      mention.last = i + len - 1;
      mention.surface = text::Slice(
          sentence.text, {tokens[i].span.start, tokens[i + len - 1].span.end});
      mention.canonical = *canonical;
      mentions.push_back(std::move(mention));
      i += len;
      matched = true;
      break;
    }
    if (!matched) ++i;
  }
  return mentions;
}

const char *ProvenanceName(Provenance provenance) {
  switch (provenance) {
    case Provenance::kLexicon: return "lexicon";
    case Provenance::kMined: return "mined";
    case Provenance::kManual: return "manual";
  }
  return "manual";
}

Provenance ParseProvenance(std::string_view name) {
  if (name == "lexicon") return Provenance::kLexicon;
  if (name == "mined") return Provenance::kMined;
  if (name == "manual") return Provenance::kManual;
  throw Error("unknown provenance \"" + std::string(name) + "\"");
}

SynonymCycleError::SynonymCycleError(std::vector<std::string> cycle)
    : Error("cyclic synonym pairs: " + text::Join(cycle, " -> ")),
      cycle_(std::move(cycle)) {}

SynonymTable SynonymTable::Build(const std::vector<SynonymPair> &pairs) {
  std::map<std::string, std::string> direct;
  std::map<std::string, Provenance> provenance;
  for (const SynonymPair &pair : pairs) {
    if (pair.preferred == pair.alternate) {
      throw Error("self synonym pair for \"" + pair.preferred + "\"");
    }
    auto [it, inserted] = direct.emplace(pair.alternate, pair.preferred);
    if (!inserted && it->second != pair.preferred) {
      throw Error("alternate \"" + pair.alternate +
                  "\" has two preferred names: \"" + it->second +
                  "\" and \"" + pair.preferred + "\"");
    }
    if (inserted) provenance[pair.alternate] = pair.provenance;
  }

  SynonymTable table;
  for (const auto &[alternate, first] : direct) {
    std::vector<std::string> chain = {alternate};
    std::set<std::string> seen = {alternate};
    std::string current = first;
    for (;;) {
      if (seen.count(current)) {
        auto start = std::find(chain.begin(), chain.end(), current);
        std::vector<std::string> cycle(start, chain.end());
        cycle.push_back(current);
        throw SynonymCycleError(std::move(cycle));
      }
      chain.push_back(current);
      seen.insert(current);
      auto next = direct.find(current);
      if (next == direct.end()) break;
      current = next->second;
    }
    table.preferred_[alternate] = current;
    table.pairs_.push_back({current, alternate, provenance[alternate]});
  }
  std::sort(table.pairs_.begin(), table.pairs_.end(),
            [](const SynonymPair &a, const SynonymPair &b) {
              return std::tie(a.preferred, a.alternate) <
                     std::tie(b.preferred, b.alternate);
            });
  return table;
}

SynonymTable SynonymTable::Parse(std::string_view content) {
  std::vector<SynonymPair> pairs;
  std::istringstream in{std::string(content)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::Trim(line).empty() || text::Trim(line)[0] == '#') continue;
    const std::vector<std::string> fields = text::Split(line, '\t');
    if (fields.size() != 3) {
      throw Error("synonym table line " + std::to_string(line_no) +
                  ": expected preferred<TAB>alternate<TAB>provenance");
    }
    pairs.push_back({text::Trim(fields[0]), text::Trim(fields[1]),
                     ParseProvenance(text::Trim(fields[2]))});
  }
  return Build(pairs);
}

SynonymTable SynonymTable::Load(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open synonym table: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return Parse(buffer.str());
}

std::string SynonymTable::ToTsv() const {
  std::string out;
  for (const SynonymPair &pair : pairs_) {
    out += pair.preferred + "\t" + pair.alternate + "\t" +
           ProvenanceName(pair.provenance) + "\n";
  }
  return out;
}

std::string SynonymTable::Resolve(const std::string &name) const {
  auto it = preferred_.find(name);
  return it == preferred_.end() ? name : it->second;
}

bool SynonymTable::IsAlternate(const std::string &name) const {
  return preferred_.count(name) > 0;
}

GeneMention Canonicalize(GeneMention mention, const SynonymTable &table) {
  mention.canonical = table.Resolve(mention.canonical);
  return mention;
}

}  // namespace genic
