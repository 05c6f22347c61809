#include "genic/synonyms.h"

#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"

namespace genic {
namespace {

Sentence MakeSentence(const std::string &text, std::size_t index = 0) {
  Sentence sentence;
  sentence.doc_id = "doc";
  sentence.index = index;
  sentence.text = text;
  sentence.tokens = Tokenize(text);
  return sentence;
}

std::vector<TriggerPattern> DefaultPatterns() {
  return LoadTriggerPatterns(std::string(GENIC_DATA_DIR) + "/triggers.json");
}

std::string ReadFile(const std::string &path) {
  std::ifstream in(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::vector<std::pair<std::string, std::string>> Pairs(
    const std::vector<SynonymCandidate> &candidates) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto &c : candidates) {
    out.emplace_back(c.left.canonical, c.right.canonical);
  }
  return out;
}

TEST_CASE("former-name trigger inside parentheses") {
  GeneLexicon lexicon;
  lexicon.Add("PMD1");
  lexicon.Add("SYGP-ORF50");
  const Sentence s = MakeSentence("PMD1 (formerly SYGP-ORF50) is required.");
  const auto candidates =
      MatchTriggers(s, FindGeneMentions(s, lexicon), DefaultPatterns());
  REQUIRE(candidates.size() == 1);
  CHECK(candidates[0].left.canonical == "PMD1");
  CHECK(candidates[0].right.canonical == "SYGP-ORF50");
  CHECK(candidates[0].direction == TriggerDirection::kSecondIsFormerName);
  CHECK(candidates[0].pattern_id == "formerly");
}

TEST_CASE("no trigger, no candidate") {
  GeneLexicon lexicon;
  lexicon.Add("GerE");
  lexicon.Add("cotD");
  const Sentence s = MakeSentence("GerE stimulates cotD transcription.");
  CHECK(MatchTriggers(s, FindGeneMentions(s, lexicon), DefaultPatterns())
            .empty());
}

// Oracle: enumerate every (left mention, trigger occurrence, right mention)
// window and test the window conditions one by one.
std::vector<std::pair<std::string, std::string>> BruteForceWindows(
    const Sentence &s, const std::vector<GeneMention> &mentions,
    const std::vector<std::string> &trigger, std::size_t max_gap) {
  std::vector<std::pair<std::string, std::string>> out;
  const auto &tok = s.tokens;
  auto inside = [&](std::size_t t) {
    for (const auto &m : mentions) {
      if (m.first <= t && t <= m.last) return true;
    }
    return false;
  };
  auto barrier = [](const std::string &t) {
    return t == "(" || t == ")" || t == "[" || t == "]" || t == ";" ||
           t == ":";
  };
  for (std::size_t t0 = 0; t0 + trigger.size() <= tok.size(); ++t0) {
    bool hit = true;
    for (std::size_t k = 0; k < trigger.size(); ++k) {
      hit = hit && !inside(t0 + k) &&
            text::ToLower(tok[t0 + k].text) == trigger[k];
    }
    if (!hit) continue;
    const std::size_t t1 = t0 + trigger.size() - 1;
    for (const auto &l : mentions) {
      for (const auto &r : mentions) {
        if (!(l.last < t0 && r.first > t1)) continue;
        if (t0 - l.last - 1 > max_gap || r.first - t1 - 1 > max_gap) continue;
        bool nearest = true;
        for (const auto &m : mentions) {
          if (m.last > l.last && m.last < t0) nearest = false;
        }
        bool clear = true;
        for (std::size_t t = l.last + 1; t < t0; ++t) {
          if (barrier(tok[t].text) &&
              !(t + 1 == t0 && (tok[t].text == "(" || tok[t].text == "["))) {
            clear = false;
          }
        }
        for (std::size_t t = t1 + 1; t < r.first; ++t) {
          if (barrier(tok[t].text)) clear = false;
        }
        if (nearest && clear && l.canonical != r.canonical) {
          out.emplace_back(l.canonical, r.canonical);
        }
      }
    }
  }
  return out;
}

TEST_CASE("one trigger pairs the left gene with each right gene in range") {
  GeneLexicon lexicon;
  for (const char *g : {"geneA", "geneB", "geneC"}) lexicon.Add(g);
  const Sentence s = MakeSentence("geneA, also called geneB and geneC.");
  const auto mentions = FindGeneMentions(s, lexicon);
  const auto candidates = MatchTriggers(s, mentions, DefaultPatterns());
  const std::vector<std::pair<std::string, std::string>> expected = {
      {"geneA", "geneB"}, {"geneA", "geneC"}};
  CHECK(Pairs(candidates) == expected);
  CHECK(BruteForceWindows(s, mentions, {"also", "called"}, 3) == expected);
  for (const auto &c : candidates) {
    CHECK(c.span.start <= s.tokens[c.left.first].span.start);
    CHECK(c.span.end >= s.tokens[c.right.last].span.end);
  }
}

TEST_CASE("random windows agree with brute-force enumeration") {
  std::mt19937 rng(29);
  GeneLexicon lexicon;
  for (const char *g : {"geneA", "geneB", "geneC", "geneD"}) lexicon.Add(g);
  const std::vector<std::string> vocab = {"geneA", "geneB", "geneC", "geneD",
                                          "also",  "called", "the",  ",",
                                          "(",     ")",     ";",    "and"};
  TriggerPattern pattern;
  pattern.id = "also-called";
  pattern.tokens = {"also", "called"};
  pattern.direction = TriggerDirection::kSecondIsAlias;
  for (int trial = 0; trial < 2000; ++trial) {
    std::string text;
    const int n = 2 + static_cast<int>(rng() % 12);
    for (int i = 0; i < n; ++i) text += vocab[rng() % vocab.size()] + " ";
    const Sentence s = MakeSentence(text);
    const auto mentions = FindGeneMentions(s, lexicon);
    auto got = Pairs(MatchTriggers(s, mentions, {pattern}));
    auto want = BruteForceWindows(s, mentions, pattern.tokens, 3);
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    CHECK(got == want);
    for (const auto &c : MatchTriggers(s, mentions, {pattern})) {
      CHECK(c.left.canonical != c.right.canonical);
      CHECK(c.confidence <= 1.0);
      CHECK(c.confidence > 0.0);
    }
  }
}

TEST_CASE("punctuation schemas") {
  GeneLexicon lexicon;
  for (const char *g : {"degU", "sacU", "abrB", "cpsX"}) lexicon.Add(g);
  const Sentence slash = MakeSentence("degU/sacU is phosphorylated.");
  auto c = MatchTriggers(slash, FindGeneMentions(slash, lexicon),
                         DefaultPatterns());
  REQUIRE(c.size() == 1);
  CHECK(c[0].pattern_id == "slash");
  const Sentence paren = MakeSentence("abrB (cpsX) is expressed.");
  c = MatchTriggers(paren, FindGeneMentions(paren, lexicon), DefaultPatterns());
  REQUIRE(c.size() == 1);
  CHECK(c[0].pattern_id == "parenthesis");
  CHECK(c[0].confidence == doctest::Approx(0.85));
}

SynonymCandidate Candidate(const std::string &left, const std::string &right,
                           double confidence,
                           TriggerDirection direction =
                               TriggerDirection::kSecondIsAlias) {
  SynonymCandidate c;
  c.left.canonical = left;
  c.right.canonical = right;
  c.confidence = confidence;
  c.direction = direction;
  return c;
}

TEST_CASE("table building") {
  const auto single = BuildSynonymTable(
      {Candidate("PMD1", "SYGP-ORF50", 1.0,
                 TriggerDirection::kSecondIsFormerName)});
  REQUIRE(single.table.size() == 1);
  CHECK(single.table.pairs()[0] ==
        SynonymPair{"PMD1", "SYGP-ORF50", Provenance::kMined});
  CHECK(BuildSynonymTable({}).table.empty());

  const auto undirected = BuildSynonymTable(
      {Candidate("sinR", "flaD", 0.9, TriggerDirection::kUndirected)});
  CHECK(undirected.table.Resolve("sinR") == "flaD");

  const auto low = BuildSynonymTable({Candidate("A", "B", 0.7)}, 0.8);
  CHECK(low.table.empty());
}

TEST_CASE("conflicts keep the stronger preferred name") {
  const auto mined = BuildSynonymTable(
      {Candidate("X", "B", 0.9), Candidate("Y", "B", 0.4),
       Candidate("Z", "C", 0.5)},
      0.0);
  // Oracle: per alternate, keep the unique maximum.
  CHECK(mined.table.Resolve("B") == "X");
  CHECK(mined.table.Resolve("C") == "Z");
  REQUIRE(mined.conflicts.size() == 1);
  CHECK(mined.conflicts[0].kept_preferred == "X");
  CHECK(mined.conflicts[0].rejected_preferred ==
        std::vector<std::string>{"Y"});

  const auto tie = BuildSynonymTable(
      {Candidate("X", "B", 0.9), Candidate("Y", "B", 0.9)}, 0.0);
  CHECK(tie.table.empty());
  REQUIRE(tie.conflicts.size() == 1);
  CHECK_FALSE(tie.conflicts[0].kept_preferred.has_value());

  // Two weak mentions outweigh one strong one.
  const auto summed = BuildSynonymTable(
      {Candidate("X", "B", 0.9), Candidate("Y", "B", 0.5),
       Candidate("Y", "B", 0.5)},
      0.0);
  CHECK(summed.table.Resolve("B") == "Y");

  const auto reversed = BuildSynonymTable(
      {Candidate("A", "B", 0.9), Candidate("B", "A", 0.8)}, 0.0);
  CHECK(reversed.table.Resolve("B") == "A");

  CHECK_THROWS_AS(BuildSynonymTable({Candidate("A", "B", 1.0),
                                     Candidate("B", "C", 1.0),
                                     Candidate("C", "A", 1.0)}),
                  SynonymCycleError);
}

TEST_CASE("evaluation") {
  const SynonymTable gold = SynonymTable::Build({{"a", "b", Provenance::kManual},
                                                 {"c", "d", Provenance::kManual},
                                                 {"e", "f", Provenance::kManual},
                                                 {"g", "h", Provenance::kManual},
                                                 {"i", "j", Provenance::kManual}});
  auto pr = EvaluateSynonymMining(gold, gold);
  CHECK(pr.precision == 1.0);
  CHECK(pr.recall == 1.0);
  const SynonymTable four = SynonymTable::Build({{"b", "a", Provenance::kMined},
                                                 {"c", "d", Provenance::kMined},
                                                 {"e", "f", Provenance::kMined},
                                                 {"g", "h", Provenance::kMined}});
  pr = EvaluateSynonymMining(four, gold);
  CHECK(pr.precision == 1.0);
  CHECK(pr.recall == doctest::Approx(0.8));
  pr = EvaluateSynonymMining(SynonymTable(), gold);
  CHECK(pr.precision == 1.0);
  CHECK(pr.recall == 0.0);

  // Adding a correct pair never lowers either metric.
  std::mt19937 rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<SynonymPair> predicted;
    for (int i = 0; i < 3; ++i) {
      const std::string a = "p" + std::to_string(rng() % 100);
      const std::string b = "q" + std::to_string(rng() % 100);
      if (rng() % 2) {
        predicted.push_back({a, b, Provenance::kMined});
      } else {
        predicted.push_back(gold.pairs()[rng() % 5]);
      }
    }
    std::sort(predicted.begin(), predicted.end(),
              [](auto &x, auto &y) { return x.alternate < y.alternate; });
    predicted.erase(std::unique(predicted.begin(), predicted.end(),
                                [](auto &x, auto &y) {
                                  return x.alternate == y.alternate;
                                }),
                    predicted.end());
    const auto before = EvaluateSynonymMining(SynonymTable::Build(predicted), gold);
    for (const auto &g : gold.pairs()) {
      bool present = false;
      for (const auto &p : predicted) present |= p.alternate == g.alternate;
      if (present) continue;
      auto more = predicted;
      more.push_back(g);
      const auto after = EvaluateSynonymMining(SynonymTable::Build(more), gold);
      CHECK(after.precision >= before.precision);
      CHECK(after.recall >= before.recall);
      CHECK(after.precision <= 1.0);
      CHECK(after.recall <= 1.0);
      break;
    }
  }
}

TEST_CASE("pattern file validation") {
  CHECK(DefaultPatterns().size() >= 8);
  CHECK_THROWS_AS(ParseTriggerPatterns("{}"), Error);
  CHECK_THROWS_AS(ParseTriggerPatterns(R"([{"id": "x"}])"), Error);
  CHECK_THROWS_AS(
      ParseTriggerPatterns(R"([{"id": "x", "tokens": ["a"], "score": 2}])"),
      Error);
  CHECK_THROWS_AS(ParseTriggerPatterns(
                      R"([{"id": "x", "tokens": ["a"], "direction": "up"}])"),
                  Error);
}

TEST_CASE("fixture sentences mine exactly the gold pairs") {
  const std::string dir = std::string(GENIC_FIXTURE_DIR) + "/synonyms/";
  const GeneLexicon lexicon = GeneLexicon::Load(dir + "lexicon.tsv");
  const SynonymTable gold = SynonymTable::Load(dir + "gold.tsv");
  std::istringstream in(ReadFile(dir + "sentences.txt"));
  std::vector<SynonymCandidate> all;
  std::string line;
  std::size_t index = 0;
  while (std::getline(in, line)) {
    const Sentence s = MakeSentence(line, index++);
    const auto c = MatchTriggers(s, FindGeneMentions(s, lexicon),
                                 DefaultPatterns());
    all.insert(all.end(), c.begin(), c.end());
  }
  const auto pr = EvaluateSynonymMining(BuildSynonymTable(all).table, gold);
  CHECK(pr.precision == 1.0);
  CHECK(pr.recall == 1.0);
}

}  // namespace
}  // namespace genic
