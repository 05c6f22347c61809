// One line per criterion: "PASS name: detail" or "FAIL name: detail".
// With arguments, runs only the named criteria. Exit status 0 iff all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>

#include "genic/annotations.h"
#include "genic/filter.h"
#include "genic/learner.h"
#include "genic/pipeline.h"
#include "genic/semclass.h"
#include "genic/synonyms.h"
#include "oracles.h"

namespace genic {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace oracles;

// Tolerances.
constexpr double kTableTolerance = 0.005;     // after 2-decimal rounding
constexpr std::size_t kTableRequiredCells = 23;  // of the Link Parser's 24
constexpr double kTableSeconds = 1.0;
constexpr double kPosteriorTolerance = 1e-9;
constexpr double kFilterAccuracy = 0.95;
constexpr double kCvTolerance = 1e-12;
constexpr double kLearnerTolerance = 1e-12;

const std::string kData = GENIC_DATA_DIR;
const std::string kFixtures = GENIC_FIXTURE_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Format(const char *fmt, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, fmt, a, b, c);
  return buf;
}

const AnnotationSchema &Schema() {
  static const AnnotationSchema s = AnnotationSchema::Load(kData + "/schema.json");
  return s;
}

const InteractionLexicon &Interactions() {
  static const InteractionLexicon l =
      InteractionLexicon::Load(kData + "/interaction_lexemes.tsv");
  return l;
}

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            ("genic-acceptance-" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string operator/(const std::string &name) const {
    return (path_ / name).string();
  }

 private:
  fs::path path_;
};

// Gold and predicted graphs of one sentence realizing the counts of a row:
// `ok` predicted edges coincide with gold ones.
std::pair<DependencyGraph, DependencyGraph> RealizeCounts(
    const SentenceRef &ref, Relation label, const EvaluationCounts &c) {
  DependencyGraph gold, predicted;
  gold.sentence_ref = predicted.sentence_ref = ref;
  for (std::size_t i = 0; i < 1 + c.nb_rel + c.rel_tot; ++i) {
    Node n;
    n.first = n.last = i;
    n.text = n.lemma = "w" + std::to_string(i);
    gold.nodes.push_back(n);
    predicted.nodes.push_back(n);
  }
  for (std::size_t i = 1; i <= c.nb_rel; ++i) gold.AddEdge(0, i, label);
  for (std::size_t i = 1; i <= c.rel_ok; ++i) predicted.AddEdge(0, i, label);
  for (std::size_t j = c.rel_ok; j < c.rel_tot; ++j) {
    predicted.AddEdge(0, c.nb_rel + 1 + j, label);
  }
  return {gold, predicted};
}

Outcome ParserMetricTable() {
  const auto start = std::chrono::steady_clock::now();
  std::vector<DependencyGraph> gold[2], predicted[2];  // Link Parser, HCP
  std::size_t index = 0;
  for (const PrintedRow &row : kParserComparison) {
    const Relation label = ParseRelation(row.label);
    const EvaluationCounts counts[2] = {{row.nb_rel, row.lp_ok, row.lp_tot},
                                        {row.nb_rel, row.hcp_ok, row.hcp_tot}};
    for (int p = 0; p < 2; ++p) {
      auto [g, q] = RealizeCounts({"table", index}, label, counts[p]);
      gold[p].push_back(std::move(g));
      predicted[p].push_back(std::move(q));
    }
    ++index;
  }
  const auto lp = EvaluateRelations(gold[0], predicted[0]);
  const auto hcp = EvaluateRelations(gold[1], predicted[1]);
  std::size_t lp_ok = 0, lp_cells = 0;
  std::vector<std::string> lp_bad, hcp_bad;
  auto check = [](double computed, double printed) {
    return std::abs(RoundTo2(computed) - printed) <= kTableTolerance + 1e-12;
  };
  for (const PrintedRow &row : kParserComparison) {
    const Relation label = ParseRelation(row.label);
    const RelationMetrics &l = lp.at(label), &h = hcp.at(label);
    const std::string name = row.label;
    for (const auto &[computed, printed, cell] :
         {std::tuple{l.recall, row.lp_r, name + " R"},
          std::tuple{l.precision, row.lp_p, name + " P"}}) {
      ++lp_cells;
      if (check(computed, printed)) {
        ++lp_ok;
      } else {
        lp_bad.push_back(cell + Format(" %.4f vs printed %.2f", computed, printed));
      }
    }
    if (!check(h.recall, row.hcp_r)) hcp_bad.push_back(name + " R");
    if (!check(h.precision, row.hcp_p)) hcp_bad.push_back(name + " P");
  }
  const double seconds = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - start)
                             .count();
  std::string detail = "Link Parser " + std::to_string(lp_ok) + "/" +
                       std::to_string(lp_cells) + " cells (need " +
                       std::to_string(kTableRequiredCells) + "); mismatches: " +
                       text::Join(lp_bad, ", ") + "; HCP mismatches: " +
                       text::Join(hcp_bad, ", ") + Format("; %.4f s", seconds);
  return {lp_ok >= kTableRequiredCells && seconds < kTableSeconds, detail};
}

Outcome ListingRoundTrip() {
  const std::string listing =
      text::ReadFile(kFixtures + "/annotations/listing.xml");
  const AnnotatedText parsed = ParseAnnotationXml(listing, Schema());
  std::vector<Violation> violations;
  for (const InteractionFrame &f : parsed.frames) {
    const auto v = ValidateFrame(f, Schema(), text::Length(parsed.text));
    violations.insert(violations.end(), v.begin(), v.end());
  }
  const std::string xml =
      SerializeAnnotationXml(parsed.frames, parsed.text, Schema());
  const AnnotatedText again = ParseAnnotationXml(xml, Schema());
  const bool equal = again == parsed;
  const bool same_form = CanonicalXml(xml) == CanonicalXml(listing);
  return {parsed.frames.size() == 1 && violations.empty() && equal && same_form,
          std::to_string(parsed.frames.size()) + " frame, " +
              std::to_string(violations.size()) + " violations, re-parse " +
              (equal ? "equal" : "differs") + ", serialized form " +
              (same_form ? "matches" : "differs from") + " the listing"};
}

std::map<SentenceRef, std::shared_ptr<const DependencyGraph>> ParseDocument(
    const AnnotatedDocument &doc, const GeneLexicon &genes) {
  static const ParserResources resources = ParserResources::Load(kData);
  std::map<SentenceRef, std::shared_ptr<const DependencyGraph>> out;
  for (std::size_t i = 0; i < doc.sentences.size(); ++i) {
    Sentence s;
    s.doc_id = doc.id;
    s.index = i;
    s.text = doc.sentences[i];
    s.tokens = Tokenize(s.text);
    out[s.ref()] = std::make_shared<DependencyGraph>(
        ParseSentence(s, FindGeneMentions(s, genes), resources));
  }
  return out;
}

Outcome SpoIIGExtraction() {
  const std::string dir = kFixtures + "/learner/";
  const GeneLexicon genes = GeneLexicon::Load(dir + "genes.txt");
  const AnnotatedDocument training =
      ParseDocumentXml(text::ReadFile(dir + "depends.xml"), Schema());
  const auto examples = BuildExamples({training}, ParseDocument(training, genes));
  const auto learned = LearnRules(examples.examples, Interactions(), LearnerParams{});
  const DependencyGraph gold =
      GraphFromJson(json::parse(text::ReadFile(dir + "spoIIG_gold.json")));
  const auto out = ApplyRules(learned.rules, gold, Interactions(), LearnerParams{});
  std::set<std::tuple<std::string, std::string, std::string>> got;
  std::vector<std::string> shown;
  for (const auto &e : out) {
    got.emplace(e.type, e.agent, e.target);
    shown.push_back("(" + e.type + ", " + e.agent + ", " + e.target + ")");
  }
  const std::set<std::tuple<std::string, std::string, std::string>> expected = {
      {"positive", "sigA", "spoIIG"}, {"positive", "Spo0AP", "spoIIG"}};
  return {examples.examples.size() == 12 && got == expected && out.size() == 2,
          std::to_string(examples.examples.size()) + " training examples, " +
              std::to_string(learned.rules.size()) + " rules; extracted " +
              text::Join(shown, " ")};
}

PipelineConfig Figure1Config(const std::string &output) {
  const std::string dir = kFixtures + "/pipeline/";
  const json config = {{"paths",
                        {{"corpus", dir + "figure1.medline"},
                         {"lexicon", dir + "lexicon.tsv"},
                         {"data_dir", kData},
                         {"output", output}}},
                       {"learner", {{"folds", 2}, {"seed", 1}}}};
  const auto result = ValidateConfig(
      config, dir, [](const std::string &) { return std::nullopt; });
  if (!result.config) throw Error(text::Join(result.violations, "; "));
  return *result.config;
}

void LearnAndExtract(const PipelineConfig &config) {
  Pipeline pipeline(config);
  pipeline.Record(pipeline.Learn(kFixtures + "/pipeline/training.xml"));
  for (const StageReport &r : pipeline.Extract()) pipeline.Record(r);
}

Outcome CoordinationTemplates() {
  TempDir dir;
  const PipelineConfig config = Figure1Config(dir / "out");
  LearnAndExtract(config);
  std::vector<std::tuple<std::string, std::string, std::string>> got;
  std::vector<std::string> shown;
  for (const std::string &line :
       text::Split(text::ReadFile(dir / "out/templates.jsonl"), '\n')) {
    if (line.empty()) continue;
    const json t = json::parse(line);
    got.emplace_back(t["type"], t["agent"], t["target"]);
    shown.push_back("(" + t["type"].get<std::string>() + ", " +
                    t["agent"].get<std::string>() + ", " +
                    t["target"].get<std::string>() + ")");
  }
  std::sort(got.begin(), got.end());
  const std::vector<std::tuple<std::string, std::string, std::string>> expected = {
      {"negative", "GerE", "cotA"},
      {"negative", "GerE", "sigK"},
      {"positive", "GerE", "cotD"}};
  return {got == expected, "templates " + text::Join(shown, " ")};
}

// (a) naive Bayes against brute-force Bayes.
std::string NbOracle(bool *pass) {
  std::mt19937 rng(101);
  std::size_t agree = 0;
  double worst = 0;
  constexpr int kInstances = 1000;
  for (int trial = 0; trial < kInstances; ++trial) {
    const std::size_t features = 1 + rng() % 10;
    const auto training = RandomNbTraining(rng, features);
    std::set<std::string> vocabulary;
    for (std::size_t f = 0; f < features; ++f) {
      if (rng() % 4) vocabulary.insert("f" + std::to_string(f));
    }
    const double alpha = 0.25 + (rng() % 8) * 0.25;
    const auto model = TrainNaiveBayes(training, vocabulary, alpha);
    std::set<std::string> bag;
    for (std::size_t f = 0; f < features; ++f) {
      if (rng() % 2) bag.insert("f" + std::to_string(f));
    }
    const ExactPosterior expected =
        BruteForcePosterior(training, vocabulary, alpha, bag);
    const Classification c = Classify(model, bag);
    const double err = std::abs(c.posterior_relevant - expected.relevant);
    worst = std::max(worst, err);
    agree += err <= kPosteriorTolerance && c.accepted == expected.accepted;
  }
  *pass = agree == kInstances;
  return Format("(a) NB oracle %.0f/%.0f, max error %.1e", agree, kInstances, worst);
}

// (b) generated separable corpus, trained on one half, scored on the other.
std::string SeparableFilter(bool *pass) {
  GeneLexicon lexicon;
  for (const std::string &g : SeparableFilterGenes()) lexicon.Add(g);
  const auto all = ParseTrainingTsv(SeparableFilterCorpus(7, 200), lexicon);
  std::vector<LabeledSentence> train, test;
  for (std::size_t i = 0; i < all.size(); ++i) {
    (i % 4 < 2 ? train : test).push_back(all[i]);
  }
  const auto model = TrainNaiveBayes(train, SelectFeatures(train, 500));
  std::size_t ok = 0;
  for (const auto &s : test) {
    ok += Classify(model, s.bag).accepted == (*s.label == Relevance::kRelevant);
  }
  const double accuracy = static_cast<double>(ok) / test.size();
  *pass = all.size() == 200 && accuracy >= kFilterAccuracy;
  return Format("(b) separable corpus accuracy %.3f on %.0f held-out sentences",
                accuracy, test.size());
}

// (c) trigger and decoy sentences.
std::string SynonymFixture(bool *pass) {
  const std::string dir = kFixtures + "/synonyms/";
  const GeneLexicon lexicon = GeneLexicon::Load(dir + "lexicon.tsv");
  const SynonymTable gold = SynonymTable::Load(dir + "gold.tsv");
  const auto patterns = LoadTriggerPatterns(kData + "/triggers.json");
  std::vector<SynonymCandidate> all;
  std::size_t index = 0;
  for (const std::string &line : text::Split(text::ReadFile(dir + "sentences.txt"), '\n')) {
    if (line.empty()) continue;
    Sentence s;
    s.doc_id = "fixture";
    s.index = index++;
    s.text = line;
    s.tokens = Tokenize(line);
    const auto c = MatchTriggers(s, FindGeneMentions(s, lexicon), patterns);
    all.insert(all.end(), c.begin(), c.end());
  }
  const auto pr = EvaluateSynonymMining(BuildSynonymTable(all).table, gold);
  *pass = index == 20 && gold.size() == 10 && pr.precision == 1.0 &&
          pr.recall == 1.0;
  return Format("(c) synonyms P=%.3f R=%.3f on %.0f sentences", pr.precision,
                pr.recall, index);
}

// (d) fold statistics and fold assignment.
std::string CvArithmetic(bool *pass) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> unit(0, 1);
  double worst = 0;
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> v(2 + rng() % 10);
    for (double &x : v) x = unit(rng);
    double sum = 0;
    for (double x : v) sum += x;
    const double mean = sum / v.size();
    double ss = 0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / (v.size() - 1));
    const MeanStd s = Summarize(v);
    worst = std::max({worst, std::abs(s.mean - mean), std::abs(s.std - sd)});
  }
  bool folds_ok = true;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 2 + rng() % 80, k = 2 + rng() % 10;
    std::vector<bool> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = rng() % 3 == 0;
    const auto f = AssignFolds(y, k, rng());
    std::vector<std::size_t> size(k), pos(k);
    for (std::size_t i = 0; i < n; ++i) {
      if (f[i] >= k) folds_ok = false;
      else ++size[f[i]], pos[f[i]] += y[i];
    }
    const auto [smin, smax] = std::minmax_element(size.begin(), size.end());
    const auto [pmin, pmax] = std::minmax_element(pos.begin(), pos.end());
    std::size_t total = 0;
    for (std::size_t s : size) total += s;
    folds_ok = folds_ok && f.size() == n && total == n && *smax - *smin <= 1 &&
               *pmax - *pmin <= 1;
  }
  // Report statistics against their own fold rows.
  const std::string dir = kFixtures + "/learner/";
  const AnnotatedDocument training =
      ParseDocumentXml(text::ReadFile(dir + "depends.xml"), Schema());
  const auto examples =
      BuildExamples({training}, ParseDocument(training, GeneLexicon::Load(dir + "genes.txt")))
          .examples;
  for (std::size_t k = 2; k <= 5; ++k) {
    const CvReport report =
        CrossValidate(examples, k, 42 + k, Interactions(), LearnerParams{});
    std::vector<double> p, r;
    std::size_t total = 0;
    for (const FoldResult &fold : report.folds) {
      p.push_back(fold.precision);
      r.push_back(fold.recall);
      total += fold.size;
    }
    const MeanStd sp = Summarize(p), sr = Summarize(r);
    worst = std::max({worst, std::abs(sp.mean - report.precision.mean),
                      std::abs(sp.std - report.precision.std),
                      std::abs(sr.mean - report.recall.mean),
                      std::abs(sr.std - report.recall.std)});
    folds_ok = folds_ok && report.folds.size() == k && total == examples.size();
  }
  *pass = worst <= kCvTolerance && folds_ok;
  return Format("(d) CV max error %.1e, folds partition and stratify: ", worst) +
         (folds_ok ? "yes" : "no");
}

Outcome CorpusSubstitutes() {
  bool a = false, b = false, c = false, d = false;
  const std::string detail = NbOracle(&a) + "; " + SeparableFilter(&b) + "; " +
                             SynonymFixture(&c) + "; " + CvArithmetic(&d);
  return {a && b && c && d, detail};
}

Outcome LearnerOracle() {
  std::size_t matched = 0, within_budget = 0, rules = 0;
  constexpr std::uint64_t kSeeds = 100;
  for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
    std::mt19937_64 rng(seed);
    const std::size_t nf = 1 + rng() % 8, ne = 2 + rng() % 9;
    auto data = RandomData(rng, nf, ne);
    data[0].positive = true;
    data[0].regulation = "activate";
    std::vector<std::string> names;
    for (std::size_t f = 0; f < nf; ++f) names.push_back("f" + std::to_string(f));
    LearnerParams params;
    params.noise_budget = seed % 2;
    const auto learned = LearnRules(data, params).rules;
    const double greedy = Accuracy(learned, data);
    const double best = BruteForceBest(data, names, params.max_literals,
                                       params.noise_budget, learned.size());
    matched += std::abs(greedy - best) <= kLearnerTolerance;
    for (const auto &rule : learned) {
      ++rules;
      within_budget += rule.neg_covered <= params.noise_budget;
    }
  }
  return {matched == kSeeds && within_budget == rules,
          "greedy equals the brute-force optimum of equal size on " +
              std::to_string(matched) + "/" + std::to_string(kSeeds) +
              " instances; " + std::to_string(within_budget) + "/" +
              std::to_string(rules) + " rules within the noise budget"};
}

Outcome ClusteringOracle() {
  std::mt19937 rng(29);
  constexpr int kInstances = 50;
  int equal = 0;
  std::size_t merges = 0;
  for (int trial = 0; trial < kInstances; ++trial) {
    const auto triples = RandomTriples(rng, 6);
    const double threshold = (rng() % 5) * 0.1;
    const Hierarchy h = Cluster(triples, threshold);
    const auto expected = BruteForceMerges(triples, threshold);
    bool same = h.merges.size() == expected.size();
    for (std::size_t i = 0; same && i < expected.size(); ++i) {
      same = h.at(h.merges[i].left).members == expected[i].first &&
             h.at(h.merges[i].right).members == expected[i].second;
    }
    equal += same;
    merges += h.merges.size();
  }
  return {equal == kInstances,
          std::to_string(equal) + "/" + std::to_string(kInstances) +
              " merge sequences equal the exhaustive recomputation (" +
              std::to_string(merges) + " merges)"};
}

std::map<std::string, std::string> Snapshot(const std::string &dir) {
  std::map<std::string, std::string> files;
  for (const auto &e : fs::directory_iterator(dir)) {
    if (e.path().filename() == artifacts::kTimings) continue;
    files[e.path().filename().string()] = text::ReadFile(e.path().string());
  }
  return files;
}

Outcome Determinism() {
  TempDir dir;
  const PipelineConfig config = Figure1Config(dir / "out");
  LearnAndExtract(config);
  const auto first = Snapshot(dir / "out");
  fs::remove_all(dir / "out");
  LearnAndExtract(config);
  const auto second = Snapshot(dir / "out");
  std::vector<std::string> differing;
  for (const auto &[name, bytes] : first) {
    const auto it = second.find(name);
    if (it == second.end() || it->second != bytes) differing.push_back(name);
  }
  const bool same = differing.empty() && first.size() == second.size();
  return {same && first.count(artifacts::kTemplates),
          std::to_string(first.size()) + " artifacts compared" +
              (same ? ", all byte-identical" : "; differing: " + text::Join(differing, ", "))};
}

const std::vector<std::pair<std::string, std::function<Outcome()>>> &Criteria() {
  static const std::vector<std::pair<std::string, std::function<Outcome()>>> c = {
      {"parser-metric-table", ParserMetricTable},
      {"listing-round-trip", ListingRoundTrip},
      {"spoiig-extraction", SpoIIGExtraction},
      {"coordination-templates", CoordinationTemplates},
      {"corpus-substitutes", CorpusSubstitutes},
      {"learner-oracle", LearnerOracle},
      {"clustering-oracle", ClusteringOracle},
      {"determinism", Determinism},
  };
  return c;
}

}  // namespace
}  // namespace genic

int main(int argc, char **argv) {
  std::set<std::string> selected(argv + 1, argv + argc);
  bool all = true;
  std::size_t run = 0;
  for (const auto &[name, criterion] : genic::Criteria()) {
    if (!selected.empty() && !selected.count(name)) continue;
    ++run;
    genic::Outcome outcome;
    try {
      outcome = criterion();
    } catch (const std::exception &e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %s: %s\n", outcome.pass ? "PASS" : "FAIL", name.c_str(),
                outcome.detail.c_str());
    all = all && outcome.pass;
  }
  if (run == 0) {
    std::fprintf(stderr, "no such criterion\n");
    return 2;
  }
  return all ? 0 : 1;
}
