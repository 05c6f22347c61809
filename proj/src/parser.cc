#include "genic/parser.h"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>

namespace genic {

namespace {

struct TagName {
  PosTag tag;
  const char *name;
};

constexpr TagName kTagNames[] = {
    {PosTag::kNoun, "noun"},
    {PosTag::kVerb, "verb"},
    {PosTag::kAdjective, "adjective"},
    {PosTag::kAdverb, "adverb"},
    {PosTag::kPreposition, "preposition"},
    {PosTag::kDeterminer, "determiner"},
    {PosTag::kConjunction, "conjunction"},
    {PosTag::kPronoun, "pronoun"},
    {PosTag::kPunctuation, "punctuation"},
    {PosTag::kOther, "other"},
};

struct RelationLabel {
  Relation relation;
  const char *name;
};

constexpr RelationLabel kRelationNames[] = {
    {Relation::kSubject, "Subject"}, {Relation::kObject, "Object"},
    {Relation::kPrep, "Prep"},       {Relation::kVGP, "V-GP"},
    {Relation::kOGP, "O-GP"},        {Relation::kNofN, "NofN"},
    {Relation::kVtoV, "VtoV"},       {Relation::kVcooV, "VcooV"},
    {Relation::kNcooN, "NcooN"},     {Relation::kNVAdj, "nV-Adj"},
    {Relation::kPaSim, "PaSim"},     {Relation::kPaRel, "PaRel"},
};

bool EndsWith(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

const char *PosTagName(PosTag tag) {
  for (const auto &t : kTagNames) {
    if (t.tag == tag) return t.name;
  }
  return "other";
}

PosTag ParsePosTag(std::string_view name) {
  for (const auto &t : kTagNames) {
    if (name == t.name) return t.tag;
  }
  throw Error("unknown part-of-speech tag \"" + std::string(name) + "\"");
}

const char *RelationName(Relation relation) {
  for (const auto &r : kRelationNames) {
    if (r.relation == relation) return r.name;
  }
  return "Subject";
}

Relation ParseRelation(std::string_view name) {
  for (const auto &r : kRelationNames) {
    if (name == r.name) return r.relation;
  }
  throw Error("unknown relation label \"" + std::string(name) + "\"");
}

// ---------------------------------------------------------------------------
// Lexicons

void TagLexicon::Add(const std::string &word, PosTag tag,
                     const std::string &lemma) {
  entries_[text::ToLower(word)] = {tag, lemma};
  if (tag == PosTag::kVerb) verb_stems_.insert(lemma);
  if (tag == PosTag::kNoun) noun_stems_.insert(lemma);
}

TagLexicon TagLexicon::Parse(std::string_view content) {
  TagLexicon lexicon;
  std::istringstream in{std::string(content)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string trimmed = text::Trim(line);
    if (trimmed.empty() || trimmed[0] == '#') continue;
    const auto fields = text::Split(line, '\t');
    if (fields.size() < 2 || fields.size() > 3) {
      throw Error("tag lexicon line " + std::to_string(line_no) +
                  ": expected word<TAB>tag<TAB>lemma");
    }
    const std::string word = text::Trim(fields[0]);
    const std::string lemma =
        fields.size() == 3 ? text::Trim(fields[2]) : text::ToLower(word);
    lexicon.Add(word, ParsePosTag(text::Trim(fields[1])), lemma);
  }
  return lexicon;
}

TagLexicon TagLexicon::Load(const std::string &path) {
  return Parse(text::ReadFile(path, "tag lexicon"));
}

const TagLexicon::Entry *TagLexicon::Find(std::string_view lowercased) const {
  auto it = entries_.find(lowercased);
  return it == entries_.end() ? nullptr : &it->second;
}

bool TagLexicon::IsVerbStem(std::string_view lemma) const {
  return verb_stems_.find(lemma) != verb_stems_.end();
}

bool TagLexicon::IsNounStem(std::string_view lemma) const {
  return noun_stems_.find(lemma) != noun_stems_.end();
}

void TermLexicon::Add(const std::string &term, PosTag tag) {
  const std::vector<Token> tokens = Tokenize(term);
  if (tokens.empty()) return;
  std::vector<std::string> words;
  for (const Token &t : tokens) words.push_back(text::ToLower(t.text));
  terms_[text::Join(words, " ")] = tag;
  max_tokens_ = std::max(max_tokens_, tokens.size());
}

TermLexicon TermLexicon::Parse(std::string_view content) {
  TermLexicon lexicon;
  std::istringstream in{std::string(content)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string trimmed = text::Trim(line);
    if (trimmed.empty() || trimmed[0] == '#') continue;
    const auto fields = text::Split(line, '\t');
    if (fields.size() > 2) {
      throw Error("term lexicon line " + std::to_string(line_no) +
                  ": expected term[<TAB>tag]");
    }
    lexicon.Add(text::Trim(fields[0]), fields.size() == 2
                                           ? ParsePosTag(text::Trim(fields[1]))
                                           : PosTag::kNoun);
  }
  return lexicon;
}

TermLexicon TermLexicon::Load(const std::string &path) {
  return Parse(text::ReadFile(path, "term lexicon"));
}

std::optional<std::pair<std::size_t, PosTag>> TermLexicon::LongestMatch(
    const std::vector<Token> &tokens, std::size_t start) const {
  const std::size_t longest = std::min(max_tokens_, tokens.size() - start);
  for (std::size_t len = longest; len >= 2; --len) {
    std::string key;
    for (std::size_t k = 0; k < len; ++k) {
      if (k > 0) key.push_back(' ');
      key += text::ToLower(tokens[start + k].text);
    }
    auto it = terms_.find(key);
    if (it != terms_.end()) return std::make_pair(len, it->second);
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Tagging

namespace {

struct Analysis {
  PosTag tag;
  std::string lemma;
};

std::optional<std::string> VerbStem(const std::string &w,
                                    const TagLexicon &lexicon) {
  std::vector<std::string> stems;
  auto strip = [&](std::string_view suffix) {
    if (!EndsWith(w, suffix) || w.size() <= suffix.size() + 1) return;
    const std::string base = w.substr(0, w.size() - suffix.size());
    stems.push_back(base);
    stems.push_back(base + "e");
    if (base.size() >= 2 && base.back() == base[base.size() - 2]) {
      stems.push_back(base.substr(0, base.size() - 1));
    }
    if (base.back() == 'i') stems.push_back(base.substr(0, base.size() - 1) + "y");
  };
  strip("ed");
  strip("ing");
  strip("es");
  strip("s");
  for (const std::string &stem : stems) {
    if (lexicon.IsVerbStem(stem)) return stem;
  }
  return std::nullopt;
}

std::string NounLemma(const std::string &w) {
  if (EndsWith(w, "ies") && w.size() > 4) return w.substr(0, w.size() - 3) + "y";
  if (EndsWith(w, "s") && !EndsWith(w, "ss") && !EndsWith(w, "us") &&
      !EndsWith(w, "is") && w.size() > 3) {
    return w.substr(0, w.size() - 1);
  }
  return w;
}

bool HasNounSuffix(const std::string &w) {
  for (const char *s : {"tion", "sion", "ment", "ness", "ity", "ase", "ism",
                        "tions", "sions", "ments", "ases"}) {
    if (EndsWith(w, s)) return true;
  }
  return false;
}

Analysis Analyze(const std::string &surface, const TagLexicon &lexicon) {
  const std::string w = text::ToLower(surface);
  if (const auto *entry = lexicon.Find(w)) return {entry->tag, entry->lemma};
  if (HasNounSuffix(w)) return {PosTag::kNoun, NounLemma(w)};
  if (EndsWith(w, "ly") && w.size() > 4) return {PosTag::kAdverb, w};
  if (const auto stem = VerbStem(w, lexicon)) return {PosTag::kVerb, *stem};
  if (EndsWith(w, "ed") && w.size() > 4) return {PosTag::kAdjective, w};
  for (const char *s : {"al", "ive", "ous", "ic", "ible", "able", "ful"}) {
    if (EndsWith(w, s) && w.size() > std::string_view(s).size() + 3) {
      return {PosTag::kAdjective, w};
    }
  }
  if (EndsWith(w, "s")) return {PosTag::kNoun, NounLemma(w)};
  return {PosTag::kNoun, w};
}

}  // namespace

std::vector<std::pair<std::size_t, std::size_t>>
PosTaggedSentence::term_merges() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const Unit &u : units) {
    if (u.last > u.first) out.emplace_back(u.first, u.last);
  }
  return out;
}

PosTaggedSentence TagSentence(const Sentence &sentence,
                              const TagLexicon &lexicon) {
  PosTaggedSentence tagged;
  tagged.sentence_ref = sentence.ref();
  tagged.tokens = sentence.tokens;
  const std::size_t n = sentence.tokens.size();
  tagged.tags.resize(n);
  tagged.lemmas.resize(n);
  tagged.known.assign(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    const Token &token = sentence.tokens[i];
    switch (token.kind) {
      case TokenKind::kPunctuation:
      case TokenKind::kSymbol:
        tagged.tags[i] = PosTag::kPunctuation;
        tagged.lemmas[i] = token.text;
        break;
      case TokenKind::kNumber:
        tagged.tags[i] = PosTag::kOther;
        tagged.lemmas[i] = token.text;
        break;
      case TokenKind::kWord: {
        const Analysis a = Analyze(token.text, lexicon);
        tagged.tags[i] = a.tag;
        tagged.lemmas[i] = a.lemma;
        tagged.known[i] = lexicon.Find(text::ToLower(token.text)) != nullptr;
        break;
      }
    }
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const std::string w = text::ToLower(sentence.tokens[i].text);
    const PosTag before = tagged.tags[i - 1];
    if (tagged.tags[i] == PosTag::kVerb && EndsWith(w, "ed") &&
        (before == PosTag::kDeterminer || before == PosTag::kAdjective) &&
        tagged.tags[i + 1] == PosTag::kNoun) {
      tagged.tags[i] = PosTag::kAdjective;
      tagged.lemmas[i] = w;
    }
  }
  for (std::size_t i = 1; i < n; ++i) {
    const std::string w = text::ToLower(sentence.tokens[i].text);
    if (tagged.tags[i] == PosTag::kVerb && EndsWith(w, "ing") &&
        tagged.tags[i - 1] == PosTag::kDeterminer) {
      tagged.tags[i] = PosTag::kNoun;
      tagged.lemmas[i] = w;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    tagged.units.push_back(
        {i, i, sentence.tokens[i].text, tagged.lemmas[i], tagged.tags[i], {}});
  }
  return tagged;
}

namespace {

bool IsGenusShape(const std::string &w) {
  const std::u32string c = text::Decode(w);
  if (c.size() < 3 || !text::IsUpper(c[0])) return false;
  return std::all_of(c.begin() + 1, c.end(),
                     [](char32_t ch) { return text::IsLower(ch); });
}

bool IsEpithetShape(const std::string &w) {
  const std::u32string c = text::Decode(w);
  return c.size() >= 3 && std::all_of(c.begin(), c.end(), [](char32_t ch) {
           return text::IsLower(ch);
         });
}

}  // namespace

PosTaggedSentence MergeTerms(const PosTaggedSentence &tagged,
                             const TermLexicon &terms,
                             const std::vector<GeneMention> &mentions,
                             const TagLexicon *lexicon) {
  const std::size_t n = tagged.tokens.size();
  std::vector<const GeneMention *> starts(n, nullptr);
  std::vector<int> inside(n, -1);  // index of the mention covering a token
  for (std::size_t m = 0; m < mentions.size(); ++m) {
    const GeneMention &g = mentions[m];
    if (g.last >= n || g.first > g.last) {
      throw Error("gene mention outside the sentence");
    }
    starts[g.first] = &g;
    for (std::size_t t = g.first; t <= g.last; ++t) inside[t] = static_cast<int>(m);
  }

  PosTaggedSentence out = tagged;
  out.units.clear();
  auto text_of = [&](std::size_t a, std::size_t b) {
    std::string s;
    for (std::size_t t = a; t <= b; ++t) {
      if (t > a && tagged.tokens[t].span.start > tagged.tokens[t - 1].span.end) {
        s.push_back(' ');
      }
      s += tagged.tokens[t].text;
    }
    return s;
  };

  std::size_t i = 0;
  while (i < n) {
    const std::size_t gene_len =
        starts[i] ? starts[i]->last - starts[i]->first + 1 : 0;
    std::size_t term_len = 0;
    PosTag term_tag = PosTag::kNoun;
    if (inside[i] < 0 || starts[i]) {
      if (auto match = terms.LongestMatch(tagged.tokens, i)) {
        const std::size_t end = i + match->first - 1;
        const int m = inside[end];
        const bool splits_mention =
            m >= 0 && mentions[m].last != end;
        if (!splits_mention) {
          term_len = match->first;
          term_tag = match->second;
        }
      }
    }
    if (gene_len > 0 && gene_len >= term_len) {
      const GeneMention &g = *starts[i];
      out.units.push_back({g.first, g.last, text_of(g.first, g.last),
                           g.canonical, PosTag::kNoun, g.canonical});
      i = g.last + 1;
      continue;
    }
    if (term_len > 0) {
      const std::string t = text_of(i, i + term_len - 1);
      out.units.push_back(
          {i, i + term_len - 1, t, text::ToLower(t), term_tag, {}});
      i += term_len;
      continue;
    }
    if (i + 1 < n && inside[i] < 0 && inside[i + 1] < 0 &&
        tagged.tokens[i].kind == TokenKind::kWord &&
        tagged.tokens[i + 1].kind == TokenKind::kWord &&
        !tagged.known[i] && !tagged.known[i + 1] &&
        tagged.tags[i] == PosTag::kNoun &&
        (tagged.tags[i + 1] == PosTag::kNoun ||
         tagged.tags[i + 1] == PosTag::kAdjective) &&
        IsGenusShape(tagged.tokens[i].text) &&
        IsEpithetShape(tagged.tokens[i + 1].text) &&
        !HasNounSuffix(text::ToLower(tagged.tokens[i].text)) &&
        (lexicon == nullptr ||
         (!lexicon->Find(text::ToLower(tagged.tokens[i].text)) &&
          !lexicon->Find(tagged.tokens[i + 1].text)))) {
      const std::string t = text_of(i, i + 1);
      out.units.push_back({i, i + 1, t, t, PosTag::kNoun, {}});
      i += 2;
      continue;
    }
    out.units.push_back(
        {i, i, tagged.tokens[i].text, tagged.lemmas[i], tagged.tags[i], {}});
    ++i;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Graphs

bool DependencyGraph::AddEdge(std::size_t head, std::size_t dependent,
                              Relation label, std::string marker) {
  if (head >= nodes.size() || dependent >= nodes.size()) {
    throw Error("edge endpoint out of range");
  }
  return edges_.insert({head, dependent, label, std::move(marker)}).second;
}

bool DependencyGraph::HasEdge(std::size_t head, std::size_t dependent,
                              Relation label) const {
  return edges_.count({head, dependent, label, ""}) > 0;
}

std::optional<std::size_t> DependencyGraph::FindNode(std::size_t first,
                                                     std::size_t last) const {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].first == first && nodes[i].last == last) return i;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// The cascade

namespace {

enum class ItemKind { kNP, kVG, kPrep, kConj, kRel, kAdv, kAdj, kPunct, kOther };

struct Item {
  ItemKind kind = ItemKind::kOther;
  std::size_t first = 0;  // unit range
  std::size_t last = 0;
  std::size_t head = 0;
  std::string word;  // lowercased head text
  bool passive = false;
  bool bare_participle = false;
  std::optional<std::size_t> negation;
};

struct NpInfo {
  std::optional<std::size_t> pp_parent;     // item the PP attaches to
  std::optional<std::size_t> coord_parent;  // first conjunct
  std::optional<std::size_t> appos_parent;
  std::optional<std::size_t> reduced_antecedent;  // "X encoded by <this>"
  bool object = false;
  bool verb_dependent = false;
};

const std::set<std::string> kAuxiliaries = {
    "be",   "have",  "do",  "can",   "could",  "may",
    "might", "must", "shall", "should", "will", "would"};
const std::set<std::string> kRelativePronouns = {"that", "which", "who",
                                                 "whom", "whose"};
const std::set<std::string> kCoordinators = {"and", "or", "but"};

bool IsAuxiliary(const Unit &u) {
  return u.tag == PosTag::kVerb && kAuxiliaries.count(u.lemma) > 0;
}

bool IsParticiple(const Unit &u) {
  const std::string w = text::ToLower(u.text);
  if (w == u.lemma || EndsWith(w, "ing")) return false;
  if (EndsWith(w, "s") && !EndsWith(w, "ss")) return false;
  return true;
}

std::vector<Item> Chunk(const std::vector<Unit> &units) {
  std::vector<Item> items;
  const std::size_t n = units.size();
  auto single = [&](ItemKind kind, std::size_t i) {
    Item item;
    item.kind = kind;
    item.first = item.last = item.head = i;
    item.word = text::ToLower(units[i].text);
    items.push_back(item);
  };
  auto verb_follows = [&](std::size_t i) {
    while (i < n && units[i].tag == PosTag::kAdverb) ++i;
    return i < n && units[i].tag == PosTag::kVerb;
  };

  std::size_t i = 0;
  while (i < n) {
    const Unit &u = units[i];
    switch (u.tag) {
      case PosTag::kPunctuation:
        single(ItemKind::kPunct, i++);
        continue;
      case PosTag::kPronoun:
        if (kRelativePronouns.count(text::ToLower(u.text))) {
          single(ItemKind::kRel, i++);
        } else {
          single(ItemKind::kNP, i++);
        }
        continue;
      case PosTag::kPreposition:
        single(ItemKind::kPrep, i++);
        continue;
      case PosTag::kConjunction:
        single(ItemKind::kConj, i++);
        continue;
      default:
        break;
    }

    if (u.tag == PosTag::kVerb ||
        (u.tag == PosTag::kAdverb && verb_follows(i))) {
      std::size_t j = i;
      std::size_t last_verb = i;
      while (j < n && (units[j].tag == PosTag::kVerb ||
                       units[j].tag == PosTag::kAdverb)) {
        if (units[j].tag == PosTag::kVerb) last_verb = j;
        ++j;
      }
      Item vg;
      vg.kind = ItemKind::kVG;
      vg.first = i;
      vg.last = vg.head = last_verb;
      vg.word = units[last_verb].lemma;
      bool be = false;
      std::size_t verbs = 0;
      for (std::size_t k = i; k <= last_verb; ++k) {
        if (units[k].tag == PosTag::kVerb) ++verbs;
        if (k < last_verb && IsAuxiliary(units[k]) && units[k].lemma == "be") {
          be = true;
        }
        if (units[k].lemma == "not") vg.negation = k;
      }
      const Unit &head = units[last_verb];
      vg.passive = be && !IsAuxiliary(head) && IsParticiple(head);
      vg.bare_participle = verbs == 1 && !IsAuxiliary(head) &&
                           EndsWith(text::ToLower(head.text), "ed");
      items.push_back(vg);
      i = last_verb + 1;
      continue;
    }

    auto nominal = [&](std::size_t k) {
      return units[k].tag == PosTag::kNoun ||
             units[k].tag == PosTag::kAdjective ||
             (units[k].tag == PosTag::kOther && !units[k].text.empty() &&
              text::IsDigit(text::Decode(units[k].text)[0]));
    };
    if (u.tag == PosTag::kDeterminer || nominal(i)) {
      std::size_t j = i;
      while (j < n && units[j].tag == PosTag::kDeterminer) ++j;
      std::optional<std::size_t> head;
      while (j < n && nominal(j)) {
        if (units[j].tag == PosTag::kNoun) head = j;
        ++j;
      }
      if (head) {
        Item np;
        np.kind = ItemKind::kNP;
        np.first = i;
        np.last = np.head = *head;
        np.word = text::ToLower(units[*head].text);
        items.push_back(np);
        i = *head + 1;
        continue;
      }
      single(u.tag == PosTag::kAdjective ? ItemKind::kAdj : ItemKind::kOther,
             i++);
      continue;
    }
    single(u.tag == PosTag::kAdverb ? ItemKind::kAdv : ItemKind::kOther, i++);
  }
  return items;
}

class Cascade {
 public:
  Cascade(const PosTaggedSentence &tagged, DependencyGraph *graph)
      : units_(tagged.units), items_(Chunk(units_)), info_(items_.size()),
        graph_(graph) {}

  void Run() {
    for (std::size_t k = 0; k < items_.size(); ++k) {
      switch (items_[k].kind) {
        case ItemKind::kNP:
          NounPhrase(k);
          break;
        case ItemKind::kVG:
          VerbGroup(k);
          break;
        case ItemKind::kAdv:
          if (items_[k].word == "not" && k + 1 < items_.size() &&
              items_[k + 1].kind == ItemKind::kAdj) {
            Add(items_[k + 1].head, items_[k].head, Relation::kNVAdj);
          }
          break;
        default:
          break;
      }
    }
  }

 private:
  bool Is(std::optional<std::size_t> k, ItemKind kind,
          const char *word = nullptr) const {
    return k && items_[*k].kind == kind && (!word || items_[*k].word == word);
  }

  std::optional<std::size_t> Prev(std::size_t k, bool skip_adverbs,
                                  bool skip_commas = false) const {
    while (k > 0) {
      --k;
      const Item &it = items_[k];
      if (skip_adverbs && it.kind == ItemKind::kAdv) continue;
      if (skip_commas && it.kind == ItemKind::kPunct && it.word == ",") {
        continue;
      }
      return k;
    }
    return std::nullopt;
  }

  std::optional<std::size_t> Next(std::size_t k, bool skip_adverbs) const {
    for (++k; k < items_.size(); ++k) {
      if (skip_adverbs && items_[k].kind == ItemKind::kAdv) continue;
      return k;
    }
    return std::nullopt;
  }

  void Add(std::size_t head, std::size_t dependent, Relation label,
           std::string marker = "") {
    if (head != dependent) graph_->AddEdge(head, dependent, label, marker);
  }

  std::size_t CoordRoot(std::size_t k) const {
    while (info_[k].coord_parent) k = *info_[k].coord_parent;
    return k;
  }

  std::size_t PpRoot(std::size_t k) const {
    while (info_[k].pp_parent) k = *info_[k].pp_parent;
    return k;
  }

  // NP whose chain of PP, coordination and apposition links ends at `k`,
  // unless that chain belongs to another verb.
  std::size_t SubjectOf(std::size_t k) const {
    std::size_t r = k;
    for (;;) {
      if (info_[r].pp_parent) {
        r = *info_[r].pp_parent;
      } else if (info_[r].coord_parent) {
        r = *info_[r].coord_parent;
      } else if (info_[r].appos_parent) {
        r = *info_[r].appos_parent;
      } else if (info_[r].reduced_antecedent) {
        r = *info_[r].reduced_antecedent;
      } else {
        break;
      }
    }
    return info_[r].verb_dependent ? k : r;
  }

  std::optional<std::size_t> Antecedent(std::size_t rel) const {
    auto x = Prev(rel, false, true);
    if (!x) return std::nullopt;
    if (Is(x, ItemKind::kPunct, ")")) {
      std::size_t k = *x;
      while (k > 0 && !(items_[k].kind == ItemKind::kPunct &&
                        items_[k].word == "(")) {
        --k;
      }
      if (k == 0) return std::nullopt;
      x = k - 1;
    }
    if (!Is(x, ItemKind::kNP)) return std::nullopt;
    if (info_[*x].appos_parent) return info_[*x].appos_parent;
    return x;
  }

  bool ListContinues(std::size_t k) const {
    std::size_t m = k + 1;
    while (m + 1 < items_.size()) {
      const Item &sep = items_[m];
      if (sep.kind == ItemKind::kConj && kCoordinators.count(sep.word)) {
        return items_[m + 1].kind == ItemKind::kNP;
      }
      if (sep.kind != ItemKind::kPunct || sep.word != ",") return false;
      if (items_[m + 1].kind == ItemKind::kConj &&
          kCoordinators.count(items_[m + 1].word)) {
        return m + 2 < items_.size() && items_[m + 2].kind == ItemKind::kNP;
      }
      if (items_[m + 1].kind != ItemKind::kNP) return false;
      m += 2;
    }
    return false;
  }

  void NounPhrase(std::size_t k) {
    const Item &np = items_[k];
    for (std::size_t u = np.first; u < np.head; ++u) {
      if (units_[u].tag == PosTag::kNoun) Add(np.head, u, Relation::kNofN);
    }
    const auto p = Prev(k, false);

    if (Is(p, ItemKind::kPrep)) {
      const std::string &prep = items_[*p].word;
      const auto x = Prev(*p, true);
      if (Is(x, ItemKind::kVG)) {
        Add(items_[*x].head, np.head, Relation::kVGP, prep);
        info_[k].verb_dependent = true;
        const auto reduced = reduced_relatives_.find(*x);
        if (reduced != reduced_relatives_.end()) {
          info_[k].reduced_antecedent = reduced->second;
        }
      } else if (Is(x, ItemKind::kNP)) {
        info_[k].pp_parent = *x;
        if (prep == "of") {
          Add(items_[*x].head, np.head, Relation::kNofN);
        } else {
          const std::size_t root = PpRoot(*x);
          if (info_[root].object) {
            Add(items_[root].head, np.head, Relation::kOGP, prep);
          } else {
            Add(items_[*x].head, np.head, Relation::kPrep, prep);
          }
        }
      }
      return;
    }

    if (p && items_[*p].kind == ItemKind::kConj &&
        kCoordinators.count(items_[*p].word)) {
      const auto x = Prev(*p, false, true);
      if (Is(x, ItemKind::kNP)) {
        const std::size_t root = CoordRoot(*x);
        Add(items_[root].head, np.head, Relation::kNcooN);
        info_[k].coord_parent = root;
        return;
      }
    }

    if (Is(p, ItemKind::kPunct, "(") && *p > 0 &&
        items_[*p - 1].kind == ItemKind::kNP && k + 1 < items_.size() &&
        Is(k + 1, ItemKind::kPunct, ")")) {
      Add(items_[*p - 1].head, np.head, Relation::kNcooN);
      info_[k].appos_parent = *p - 1;
      return;
    }

    if (Is(p, ItemKind::kPunct, ",") && *p > 0 &&
        items_[*p - 1].kind == ItemKind::kNP && ListContinues(k)) {
      const std::size_t root = CoordRoot(*p - 1);
      Add(items_[root].head, np.head, Relation::kNcooN);
      info_[k].coord_parent = root;
      return;
    }

    const auto v = Prev(k, true);
    if (Is(v, ItemKind::kVG) && !items_[*v].passive) {
      Add(items_[*v].head, np.head, Relation::kObject);
      info_[k].object = true;
      info_[k].verb_dependent = true;
    }
  }

  void VerbGroup(std::size_t k) {
    const Item &vg = items_[k];
    if (vg.negation) Add(vg.head, *vg.negation, Relation::kNVAdj);
    const auto j = Prev(k, true);
    const Relation subject =
        vg.passive ? Relation::kPaSim : Relation::kSubject;

    if (Is(j, ItemKind::kPrep, "to")) {
      const auto u = Prev(*j, true);
      if (Is(u, ItemKind::kVG)) Add(items_[*u].head, vg.head, Relation::kVtoV);
      return;
    }
    if (Is(j, ItemKind::kRel)) {
      if (items_[*j].word == "whose") return;
      if (const auto a = Antecedent(*j)) {
        Add(vg.head, items_[*a].head,
            vg.passive ? Relation::kPaRel : Relation::kSubject);
        info_[*a].verb_dependent = true;
        anchor_ = k;
      }
      return;
    }
    if (Is(j, ItemKind::kNP)) {
      const auto r = Prev(*j, false);
      if (Is(r, ItemKind::kRel, "whose")) {
        Add(vg.head, items_[*j].head, subject);
        info_[*j].verb_dependent = true;
        if (const auto a = Antecedent(*r)) {
          Add(vg.head, items_[*a].head, Relation::kPaRel);
        }
        anchor_ = k;
        return;
      }
      const auto next = Next(k, true);
      if (vg.bare_participle && Is(next, ItemKind::kPrep, "by")) {
        Add(vg.head, items_[*j].head, Relation::kPaRel);
        reduced_relatives_[k] = *j;
        return;
      }
      const std::size_t s = SubjectOf(*j);
      Add(vg.head, items_[s].head, subject);
      info_[s].verb_dependent = true;
      anchor_ = k;
      return;
    }
    const auto c = Prev(k, true, true);
    if (c && items_[*c].kind == ItemKind::kConj &&
        kCoordinators.count(items_[*c].word) && anchor_) {
      Add(items_[*anchor_].head, vg.head, Relation::kVcooV);
    }
  }

  const std::vector<Unit> &units_;
  std::vector<Item> items_;
  std::vector<NpInfo> info_;
  DependencyGraph *graph_;
  std::optional<std::size_t> anchor_;
  std::map<std::size_t, std::size_t> reduced_relatives_;  // verb -> NP
};

}  // namespace

DependencyGraph ExtractRelations(const PosTaggedSentence &tagged) {
  DependencyGraph graph;
  graph.sentence_ref = tagged.sentence_ref;
  for (const Unit &u : tagged.units) {
    graph.nodes.push_back({u.first, u.last, u.text, u.lemma, u.tag, u.gene, {}});
  }
  Cascade(tagged, &graph).Run();
  return graph;
}

DependencyGraph DistributeCoordination(DependencyGraph graph) {
  bool changed = true;
  while (changed) {
    changed = false;
    const std::set<Edge> snapshot = graph.edges();
    std::map<std::size_t, std::set<std::size_t>> subjects;
    for (const Edge &e : snapshot) {
      if (e.label == Relation::kSubject) subjects[e.head].insert(e.dependent);
    }
    for (const Edge &e : snapshot) {
      if (e.label == Relation::kVcooV) {
        const auto &from = subjects[e.head];
        const auto &to = subjects[e.dependent];
        if (from.empty()) continue;
        if (!std::includes(from.begin(), from.end(), to.begin(), to.end())) {
          continue;
        }
        for (std::size_t s : from) {
          if (s != e.dependent) {
            changed |= graph.AddEdge(e.dependent, s, Relation::kSubject);
          }
        }
      } else if (e.label == Relation::kNcooN) {
        for (const Edge &in : snapshot) {
          if (in.dependent != e.head || in.label == Relation::kNcooN) continue;
          if (in.head == e.dependent) continue;
          changed |= graph.AddEdge(in.head, e.dependent, in.label, in.marker);
        }
      }
    }
  }
  return graph;
}

DependencyGraph NormalizePassive(DependencyGraph graph) {
  const std::set<Edge> snapshot = graph.edges();
  std::set<std::size_t> passive_verbs;
  for (const Edge &e : snapshot) {
    if (e.label == Relation::kPaSim || e.label == Relation::kPaRel) {
      passive_verbs.insert(e.head);
      graph.AddEdge(e.head, e.dependent, Relation::kObject);
    }
  }
  for (const Edge &e : snapshot) {
    if (e.label == Relation::kVGP && e.marker == "by" &&
        passive_verbs.count(e.head)) {
      graph.AddEdge(e.head, e.dependent, Relation::kSubject);
    }
  }
  return graph;
}

ParserResources ParserResources::Load(const std::string &data_dir) {
  ParserResources r;
  r.tags = TagLexicon::Load(data_dir + "/tag_lexicon.tsv");
  r.terms = TermLexicon::Load(data_dir + "/terms.txt");
  return r;
}

DependencyGraph ParseSentence(const Sentence &sentence,
                              const std::vector<GeneMention> &mentions,
                              const ParserResources &resources) {
  const PosTaggedSentence tagged =
      MergeTerms(TagSentence(sentence, resources.tags), resources.terms,
                 mentions, &resources.tags);
  DependencyGraph graph = ExtractRelations(tagged);
  for (;;) {
    const std::size_t before = graph.edges().size();
    graph = NormalizePassive(DistributeCoordination(std::move(graph)));
    if (graph.edges().size() == before) break;
  }
  return graph;
}

// ---------------------------------------------------------------------------
// Evaluation and formats

RelationMetrics ComputeMetrics(const EvaluationCounts &counts) {
  if (counts.rel_ok > std::min(counts.nb_rel, counts.rel_tot)) {
    throw Error("relOK exceeds nbRel or RelTot");
  }
  RelationMetrics m;
  m.counts = counts;
  m.recall = counts.nb_rel == 0
                 ? 1.0
                 : static_cast<double>(counts.rel_ok) / counts.nb_rel;
  m.precision = counts.rel_tot == 0
                    ? 1.0
                    : static_cast<double>(counts.rel_ok) / counts.rel_tot;
  return m;
}

double RoundTo2(double value) { return std::round(value * 100.0) / 100.0; }

namespace {

using EdgeKey = std::tuple<std::size_t, std::size_t, std::size_t, std::size_t,
                           Relation>;

std::map<SentenceRef, const DependencyGraph *> BySentence(
    const std::vector<DependencyGraph> &graphs, const char *side) {
  std::map<SentenceRef, const DependencyGraph *> out;
  for (const DependencyGraph &g : graphs) {
    if (!out.emplace(g.sentence_ref, &g).second) {
      throw Error(std::string("duplicate sentence in ") + side + ": " +
                  g.sentence_ref.doc_id + "#" +
                  std::to_string(g.sentence_ref.index));
    }
  }
  return out;
}

std::set<EdgeKey> Keys(const DependencyGraph &g) {
  std::set<EdgeKey> keys;
  for (const Edge &e : g.edges()) {
    const Node &h = g.nodes[e.head];
    const Node &d = g.nodes[e.dependent];
    keys.insert({h.first, h.last, d.first, d.last, e.label});
  }
  return keys;
}

}  // namespace

std::map<Relation, RelationMetrics> EvaluateRelations(
    const std::vector<DependencyGraph> &gold,
    const std::vector<DependencyGraph> &predicted) {
  const auto g = BySentence(gold, "gold");
  const auto p = BySentence(predicted, "predictions");
  if (g.size() != p.size() ||
      !std::equal(g.begin(), g.end(), p.begin(),
                  [](const auto &a, const auto &b) {
                    return a.first == b.first;
                  })) {
    throw Error("gold and predicted graphs cover different sentences");
  }
  std::map<Relation, EvaluationCounts> counts;
  for (Relation r : kAllRelations) counts[r] = {};
  for (const auto &[ref, gold_graph] : g) {
    const auto gold_keys = Keys(*gold_graph);
    const auto pred_keys = Keys(*p.at(ref));
    for (const EdgeKey &k : gold_keys) ++counts[std::get<4>(k)].nb_rel;
    for (const EdgeKey &k : pred_keys) {
      ++counts[std::get<4>(k)].rel_tot;
      if (gold_keys.count(k)) ++counts[std::get<4>(k)].rel_ok;
    }
  }
  std::map<Relation, RelationMetrics> out;
  for (const auto &[r, c] : counts) out[r] = ComputeMetrics(c);
  return out;
}

namespace {

std::string TokenField(const Node &n) {
  std::string s = n.text + "@" + std::to_string(n.first);
  if (n.last != n.first) s += "-" + std::to_string(n.last);
  return s;
}

std::size_t ParseIndex(const std::string &s, std::size_t line_no) {
  if (s.empty() || !std::all_of(s.begin(), s.end(), ::isdigit)) {
    throw Error("gold line " + std::to_string(line_no) + ": bad index \"" +
                s + "\"");
  }
  return std::stoul(s);
}

std::size_t NodeFor(DependencyGraph &g, const std::string &field,
                    std::size_t line_no) {
  const auto at = field.rfind('@');
  if (at == std::string::npos || at == 0) {
    throw Error("gold line " + std::to_string(line_no) +
                ": token field must be surface@first[-last]");
  }
  const std::string surface = field.substr(0, at);
  const std::string range = field.substr(at + 1);
  const auto dash = range.find('-');
  const std::size_t first = ParseIndex(range.substr(0, dash), line_no);
  const std::size_t last =
      dash == std::string::npos ? first
                                : ParseIndex(range.substr(dash + 1), line_no);
  if (last < first) {
    throw Error("gold line " + std::to_string(line_no) + ": reversed range");
  }
  if (const auto existing = g.FindNode(first, last)) {
    if (g.nodes[*existing].text != surface) {
      throw Error("gold line " + std::to_string(line_no) +
                  ": token range has two surfaces");
    }
    return *existing;
  }
  Node node;
  node.first = first;
  node.last = last;
  node.text = surface;
  node.lemma = text::ToLower(surface);
  g.nodes.push_back(node);
  return g.nodes.size() - 1;
}

}  // namespace

std::vector<DependencyGraph> ParseGoldRelations(std::string_view content) {
  std::map<SentenceRef, DependencyGraph> graphs;
  std::istringstream in{std::string(content)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::Trim(line).empty() || line[0] == '#') continue;
    const auto f = text::Split(line, '\t');
    if (f.size() != 5) {
      throw Error("gold line " + std::to_string(line_no) +
                  ": expected 5 tab-separated fields");
    }
    const SentenceRef ref{f[0], ParseIndex(f[1], line_no)};
    DependencyGraph &g = graphs[ref];
    g.sentence_ref = ref;
    const Relation label = ParseRelation(f[2]);
    const std::size_t h = NodeFor(g, f[3], line_no);
    const std::size_t d = NodeFor(g, f[4], line_no);
    if (!g.AddEdge(h, d, label)) {
      throw Error("gold line " + std::to_string(line_no) + ": duplicate edge");
    }
  }
  std::vector<DependencyGraph> out;
  for (auto &[ref, g] : graphs) out.push_back(std::move(g));
  return out;
}

std::string FormatRelations(const std::vector<DependencyGraph> &graphs) {
  std::string out;
  for (const DependencyGraph &g : graphs) {
    for (const Edge &e : g.edges()) {
      out += g.sentence_ref.doc_id + "\t" +
             std::to_string(g.sentence_ref.index) + "\t" +
             RelationName(e.label) + "\t" + TokenField(g.nodes[e.head]) +
             "\t" + TokenField(g.nodes[e.dependent]) + "\n";
    }
  }
  return out;
}

nlohmann::json GraphToJson(const DependencyGraph &graph) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const Node &n : graph.nodes) {
    nlohmann::json j = {{"first", n.first}, {"last", n.last},
                        {"text", n.text},   {"lemma", n.lemma},
                        {"tag", PosTagName(n.tag)}};
    if (n.gene) j["gene"] = *n.gene;
    if (n.semantic_class) j["semantic_class"] = *n.semantic_class;
    nodes.push_back(std::move(j));
  }
  nlohmann::json edges = nlohmann::json::array();
  for (const Edge &e : graph.edges()) {
    nlohmann::json j = {{"head", e.head},
                        {"dependent", e.dependent},
                        {"label", RelationName(e.label)}};
    if (!e.marker.empty()) j["marker"] = e.marker;
    edges.push_back(std::move(j));
  }
  return {{"doc_id", graph.sentence_ref.doc_id},
          {"index", graph.sentence_ref.index},
          {"nodes", std::move(nodes)},
          {"edges", std::move(edges)}};
}

DependencyGraph GraphFromJson(const nlohmann::json &json) {
  try {
    DependencyGraph g;
    g.sentence_ref = {json.at("doc_id").get<std::string>(),
                      json.at("index").get<std::size_t>()};
    for (const auto &n : json.at("nodes")) {
      Node node;
      node.first = n.at("first");
      node.last = n.at("last");
      node.text = n.at("text");
      node.lemma = n.value("lemma", text::ToLower(node.text));
      node.tag = ParsePosTag(n.value("tag", "noun"));
      if (n.contains("gene")) node.gene = n.at("gene").get<std::string>();
      if (n.contains("semantic_class")) {
        node.semantic_class = n.at("semantic_class").get<std::string>();
      }
      g.nodes.push_back(std::move(node));
    }
    for (const auto &e : json.at("edges")) {
      g.AddEdge(e.at("head"), e.at("dependent"),
                ParseRelation(e.at("label").get<std::string>()),
                e.value("marker", ""));
    }
    return g;
  } catch (const nlohmann::json::exception &e) {
    throw Error(std::string("malformed graph: ") + e.what());
  }
}

}  // namespace genic
