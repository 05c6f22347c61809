#include "genic/ner.h"

#include <random>

#include "doctest.h"

namespace genic {
namespace {

const char kGerESentence[] =
    "GerE stimulates cotD transcription and inhibits cotA transcription in "
    "vitro by sigma K RNA polymerase, as expected from in vivo studies, and, "
    "unexpectedly, profoundly inhibits in vitro transcription of the gene "
    "(sigK) that encode sigma K.";

Sentence MakeSentence(const std::string &text) {
  Sentence sentence;
  sentence.doc_id = "doc";
  sentence.text = text;
  sentence.tokens = Tokenize(text);
  return sentence;
}

std::vector<std::string> Surfaces(const std::vector<GeneMention> &mentions) {
  std::vector<std::string> out;
  for (const auto &m : mentions) out.push_back(m.surface);
  return out;
}

// Independent oracle: enumerate every (start, length) lexicon hit, then keep
// hits greedily by start position, preferring the longer one.
std::vector<std::pair<std::size_t, std::size_t>> BruteForceMatches(
    const Sentence &sentence, const GeneLexicon &lexicon) {
  std::vector<std::pair<std::size_t, std::size_t>> hits;
  const std::size_t n = sentence.tokens.size();
  for (std::size_t start = 0; start < n; ++start) {
    for (std::size_t len = 1; start + len <= n; ++len) {
      if (lexicon.Lookup(std::span<const Token>(sentence.tokens)
                             .subspan(start, len))) {
        hits.emplace_back(start, start + len - 1);
      }
    }
  }
  std::sort(hits.begin(), hits.end(), [](auto a, auto b) {
    if (a.first != b.first) return a.first < b.first;
    return a.second > b.second;
  });
  std::vector<std::pair<std::size_t, std::size_t>> kept;
  std::size_t next_free = 0;
  for (auto hit : hits) {
    if (hit.first < next_free) continue;
    kept.push_back(hit);
    next_free = hit.second + 1;
  }
  return kept;
}

TEST_CASE("GerE sentence yields six mentions") {
  GeneLexicon lexicon;
  for (const char *name : {"GerE", "cotD", "cotA", "sigK", "sigma K"}) {
    lexicon.Add(name);
  }
  const auto mentions = FindGeneMentions(MakeSentence(kGerESentence), lexicon);
  CHECK(Surfaces(mentions) == std::vector<std::string>{"GerE", "cotD", "cotA",
                                                       "sigma K", "sigK",
                                                       "sigma K"});
  for (const auto &m : mentions) CHECK(lexicon.ContainsCanonical(m.canonical));
}

TEST_CASE("empty lexicon finds nothing") {
  CHECK(FindGeneMentions(MakeSentence(kGerESentence), GeneLexicon()).empty());
}

TEST_CASE("longest match wins over a shorter overlapping variant") {
  GeneLexicon lexicon;
  lexicon.Add("sigma");
  lexicon.Add("sigK", {"sigma K"});
  const Sentence sentence = MakeSentence("transcribed by sigma K and sigma");
  const auto mentions = FindGeneMentions(sentence, lexicon);
  REQUIRE(mentions.size() == 2);
  CHECK(mentions[0].surface == "sigma K");
  CHECK(mentions[0].canonical == "sigK");
  CHECK(mentions[0].first == 2);
  CHECK(mentions[0].last == 3);
  CHECK(mentions[1].surface == "sigma");
  const auto oracle = BruteForceMatches(sentence, lexicon);
  REQUIRE(oracle.size() == 2);
  CHECK(oracle[0] == std::make_pair<std::size_t, std::size_t>(2, 3));
}

TEST_CASE("multiword variants and hyphen/space alternation") {
  GeneLexicon lexicon;
  lexicon.Add("GerE RNA polymerase");
  lexicon.Add("GerE");
  lexicon.Add("sigK", {"sigma K"});
  const auto mentions = FindGeneMentions(
      MakeSentence("by GerE RNA polymerase and sigma-K with GerE"), lexicon);
  CHECK(Surfaces(mentions) ==
        std::vector<std::string>{"GerE RNA polymerase", "sigma-K", "GerE"});
  CHECK(mentions[1].canonical == "sigK");
}

TEST_CASE("case policies") {
  GeneLexicon exact(CasePolicy::kExact);
  exact.Add("GerE");
  GeneLexicon first(CasePolicy::kFoldFirstChar);
  first.Add("GerE");
  GeneLexicon all(CasePolicy::kFoldAll);
  all.Add("GerE");
  const Sentence sentence = MakeSentence("gerE GERE GerE");
  CHECK(FindGeneMentions(sentence, exact).size() == 1);
  CHECK(FindGeneMentions(sentence, first).size() == 2);
  CHECK(FindGeneMentions(sentence, all).size() == 3);
  CHECK_THROWS_AS(all.Add("gere"), Error);
}

TEST_CASE("a variant cannot map to two canonical names") {
  GeneLexicon lexicon;
  lexicon.Add("sigK", {"sigma K"});
  CHECK_THROWS_AS(lexicon.Add("sigE", {"sigma K"}), Error);
}

TEST_CASE("lexicon file format") {
  const GeneLexicon lexicon =
      GeneLexicon::Parse("# comment\nsigK\tsigma K|sigma-K\nGerE\n\n");
  CHECK(lexicon.entries().size() == 2);
  CHECK(lexicon.entries().at("sigK").count("sigma K") == 1);
  CHECK_THROWS_AS(GeneLexicon::Parse("a\tb\tc\n"), Error);
}

TEST_CASE("mention properties on random sentences") {
  std::mt19937 rng(3);
  const std::vector<std::string> words = {"sigma", "K", "RNA", "polymerase",
                                          "GerE", "cotA", "of", "the", "A",
                                          "B", "C"};
  GeneLexicon lexicon;
  lexicon.Add("sigma");
  lexicon.Add("sigK", {"sigma K"});
  lexicon.Add("holo", {"sigma K RNA polymerase"});
  lexicon.Add("GerE");
  lexicon.Add("AB", {"A B"});
  lexicon.Add("B");
  for (int trial = 0; trial < 500; ++trial) {
    std::string sentence_text;
    const int n = static_cast<int>(rng() % 12);
    for (int i = 0; i < n; ++i) {
      sentence_text += words[rng() % words.size()] + " ";
    }
    const Sentence sentence = MakeSentence(sentence_text);
    const auto mentions = FindGeneMentions(sentence, lexicon);
    const auto oracle = BruteForceMatches(sentence, lexicon);
    REQUIRE(mentions.size() == oracle.size());
    std::vector<bool> used(sentence.tokens.size(), false);
    for (std::size_t i = 0; i < mentions.size(); ++i) {
      CHECK(mentions[i].first == oracle[i].first);
      CHECK(mentions[i].last == oracle[i].second);
      for (std::size_t t = mentions[i].first; t <= mentions[i].last; ++t) {
        CHECK_FALSE(used[t]);
        used[t] = true;
      }
    }
    // Single-token completeness.
    for (std::size_t t = 0; t < sentence.tokens.size(); ++t) {
      if (used[t]) continue;
      CHECK_FALSE(
          lexicon.Lookup(std::span<const Token>(sentence.tokens).subspan(t, 1)));
    }
  }
}

TEST_CASE("canonicalize through the synonym table") {
  GeneMention mention;
  mention.surface = "SYGP-ORF50";
  mention.canonical = "SYGP-ORF50";
  const SynonymTable table =
      SynonymTable::Build({{"PMD1", "SYGP-ORF50", Provenance::kManual}});
  CHECK(Canonicalize(mention, table).canonical == "PMD1");

  GeneMention gere;
  gere.canonical = "GerE";
  CHECK(Canonicalize(gere, SynonymTable()) == gere);
}

TEST_CASE("alias chains resolve transitively") {
  const SynonymTable table = SynonymTable::Build(
      {{"A", "B", Provenance::kManual}, {"B", "C", Provenance::kMined}});
  GeneMention mention;
  mention.canonical = "C";
  CHECK(Canonicalize(mention, table).canonical == "A");
  // No stored alternate is also a preferred name.
  for (const auto &pair : table.pairs()) {
    CHECK_FALSE(table.IsAlternate(pair.preferred));
  }
}

// Oracle: follow direct edges until a fixed point.
std::string FollowChain(const std::vector<SynonymPair> &pairs,
                        std::string name) {
  for (std::size_t step = 0; step <= pairs.size(); ++step) {
    bool moved = false;
    for (const auto &pair : pairs) {
      if (pair.alternate == name) {
        name = pair.preferred;
        moved = true;
        break;
      }
    }
    if (!moved) return name;
  }
  return "<cycle>";
}

TEST_CASE("closure matches brute-force chain following; idempotent") {
  std::mt19937 rng(5);
  const std::vector<std::string> names = {"a", "b", "c", "d", "e", "f", "g"};
  int built = 0;
  for (int trial = 0; trial < 400; ++trial) {
    std::vector<SynonymPair> pairs;
    std::set<std::string> alternates;
    const int n = static_cast<int>(rng() % 6);
    for (int i = 0; i < n; ++i) {
      const auto &p = names[rng() % names.size()];
      const auto &a = names[rng() % names.size()];
      if (p == a || alternates.count(a)) continue;
      alternates.insert(a);
      pairs.push_back({p, a, Provenance::kManual});
    }
    bool cyclic = false;
    for (const auto &name : names) {
      if (FollowChain(pairs, name) == "<cycle>") cyclic = true;
    }
    if (cyclic) {
      CHECK_THROWS_AS(SynonymTable::Build(pairs), SynonymCycleError);
      continue;
    }
    const SynonymTable table = SynonymTable::Build(pairs);
    ++built;
    for (const auto &name : names) {
      CHECK(table.Resolve(name) == FollowChain(pairs, name));
      GeneMention m;
      m.canonical = name;
      CHECK(Canonicalize(Canonicalize(m, table), table) ==
            Canonicalize(m, table));
    }
  }
  CHECK(built > 100);
}

TEST_CASE("cycles and conflicts are rejected") {
  try {
    SynonymTable::Build({{"A", "B", Provenance::kManual},
                         {"B", "A", Provenance::kManual}});
    FAIL("expected a cycle error");
  } catch (const SynonymCycleError &e) {
    CHECK(e.cycle().size() == 3);
    CHECK(e.cycle().front() == e.cycle().back());
  }
  CHECK_THROWS_AS(SynonymTable::Build({{"A", "A", Provenance::kManual}}),
                  Error);
  CHECK_THROWS_AS(SynonymTable::Build({{"A", "C", Provenance::kManual},
                                       {"B", "C", Provenance::kManual}}),
                  Error);
}

TEST_CASE("synonym table TSV") {
  const SynonymTable table =
      SynonymTable::Parse("PMD1\tSYGP-ORF50\tmined\nA\tB\tmanual\n");
  CHECK(table.size() == 2);
  CHECK(table.ToTsv() == "A\tB\tmanual\nPMD1\tSYGP-ORF50\tmined\n");
  CHECK(SynonymTable::Parse(table.ToTsv()).pairs() == table.pairs());
  CHECK_THROWS_AS(SynonymTable::Parse("A\tB\tguessed\n"), Error);
}

}  // namespace
}  // namespace genic
