#include "genic/learner.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <tuple>

namespace genic {

InteractionLexicon InteractionLexicon::Parse(std::string_view content) {
  InteractionLexicon lex;
  std::size_t line_no = 0;
  for (const std::string &raw : text::Split(content, '\n')) {
    ++line_no;
    const std::string line = text::Trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const auto fields = text::Split(line, '\t');
    if (fields.size() != 2 || text::Trim(fields[0]).empty() ||
        text::Trim(fields[1]).empty()) {
      throw Error("interaction lexicon line " + std::to_string(line_no) +
                  ": expected lemma<TAB>class");
    }
    lex.Add(text::Trim(fields[0]), text::Trim(fields[1]));
  }
  return lex;
}

InteractionLexicon InteractionLexicon::Load(const std::string &path) {
  return Parse(text::ReadFile(path, "interaction lexicon"));
}

void InteractionLexicon::Add(const std::string &lemma, const std::string &cls) {
  classes_[text::ToLower(lemma)] = cls;
}

std::optional<std::string> InteractionLexicon::ClassOf(
    std::string_view lemma) const {
  const auto it = classes_.find(text::ToLower(lemma));
  if (it == classes_.end()) return std::nullopt;
  return it->second;
}

std::string InteractionType(std::string_view regulation) {
  if (regulation == "activate") return "positive";
  if (regulation == "inhibit") return "negative";
  return "unknown";
}

const std::string &RelationalExample::agent_name() const {
  return *graph->nodes[agent].gene;
}

const std::string &RelationalExample::target_name() const {
  return *graph->nodes[target].gene;
}

namespace {

std::vector<std::size_t> GeneNodes(const DependencyGraph &graph) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    if (graph.nodes[i].gene) out.push_back(i);
  }
  return out;
}

// Ordered pairs of gene nodes naming different genes.
std::vector<std::pair<std::size_t, std::size_t>> CandidatePairs(
    const DependencyGraph &graph) {
  const auto genes = GeneNodes(graph);
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t a : genes) {
    for (std::size_t t : genes) {
      if (*graph.nodes[a].gene != *graph.nodes[t].gene) out.emplace_back(a, t);
    }
  }
  return out;
}

}  // namespace

ExampleSet BuildExamples(
    const std::vector<AnnotatedDocument> &documents,
    const std::map<SentenceRef, std::shared_ptr<const DependencyGraph>> &graphs) {
  ExampleSet out;
  for (const AnnotatedDocument &doc : documents) {
    for (std::size_t i = 0; i < doc.sentences.size(); ++i) {
      const SentenceRef ref{doc.id, i};
      const auto git = graphs.find(ref);
      if (git == graphs.end()) {
        throw Error("no graph for sentence " + doc.id + ":" + std::to_string(i));
      }
      const auto graph = git->second;
      const auto tokens = Tokenize(doc.sentences[i]);
      auto node_span = [&](const Node &n) -> std::optional<Span> {
        if (n.last >= tokens.size()) return std::nullopt;
        return Span{tokens[n.first].span.start, tokens[n.last].span.end};
      };
      auto align = [&](const Span &inner) -> std::optional<std::size_t> {
        for (std::size_t n = 0; n < graph->nodes.size(); ++n) {
          if (!graph->nodes[n].gene) continue;
          const auto s = node_span(graph->nodes[n]);
          if (s && s->overlaps(inner)) return n;
        }
        return std::nullopt;
      };

      std::map<std::pair<std::size_t, std::size_t>, std::string> positives;
      for (const InteractionFrame &frame : doc.frames) {
        if (frame.sentence_ref.index != i) continue;
        const std::string regulation =
            frame.attribute("regulation").value_or("unknown");
        std::vector<std::size_t> agents, targets;
        for (const AnnotationSpan &span : frame.spans) {
          if (span.role != SpanRole::kAgent && span.role != SpanRole::kTarget) {
            continue;
          }
          const auto node = align(span.inner);
          if (!node) {
            ++out.skipped_spans;
            out.warnings.push_back(
                doc.id + ":" + std::to_string(i) + " frame " + frame.id + ": " +
                SpanRoleName(span.role) + " " + std::to_string(span.index) +
                " '" + text::Slice(doc.sentences[i], span.inner) +
                "' is not aligned to a gene mention");
            continue;
          }
          (span.role == SpanRole::kAgent ? agents : targets).push_back(*node);
        }
        for (std::size_t a : agents) {
          for (std::size_t t : targets) {
            if (*graph->nodes[a].gene == *graph->nodes[t].gene) {
              out.warnings.push_back(doc.id + ":" + std::to_string(i) +
                                     " frame " + frame.id +
                                     ": agent and target name the same gene");
              continue;
            }
            positives.emplace(std::make_pair(a, t), regulation);
          }
        }
      }
      for (const auto &[a, t] : CandidatePairs(*graph)) {
        RelationalExample ex{graph, a, t, false, ""};
        const auto p = positives.find({a, t});
        if (p != positives.end()) {
          ex.positive = true;
          ex.regulation = p->second;
        }
        out.examples.push_back(std::move(ex));
      }
    }
  }
  return out;
}

std::vector<GraphPath> EnumeratePaths(const DependencyGraph &graph,
                                      std::size_t from, std::size_t to,
                                      std::size_t max_length) {
  struct Step {
    std::size_t node;
    std::string label;
  };
  std::vector<std::vector<Step>> adjacent(graph.nodes.size());
  for (const Edge &e : graph.edges()) {
    const std::string name = RelationName(e.label);
    adjacent[e.dependent].push_back({e.head, name + "↑"});
    adjacent[e.head].push_back({e.dependent, name + "↓"});
  }
  std::vector<GraphPath> out;
  if (from == to || from >= graph.nodes.size() || to >= graph.nodes.size()) {
    return out;
  }
  std::vector<std::size_t> nodes{from};
  std::vector<std::string> labels;
  std::function<void()> walk = [&]() {
    const std::size_t here = nodes.back();
    if (here == to) {
      out.push_back({text::Join(labels, "·"), nodes});
      return;
    }
    if (labels.size() == max_length) return;
    for (const Step &s : adjacent[here]) {
      if (std::find(nodes.begin(), nodes.end(), s.node) != nodes.end()) continue;
      nodes.push_back(s.node);
      labels.push_back(s.label);
      walk();
      nodes.pop_back();
      labels.pop_back();
    }
  };
  walk();
  std::sort(out.begin(), out.end(), [](const GraphPath &a, const GraphPath &b) {
    return std::tie(a.descriptor, a.nodes) < std::tie(b.descriptor, b.nodes);
  });
  return out;
}

std::vector<std::string> ExtractFeatures(const DependencyGraph &graph,
                                         std::size_t agent, std::size_t target,
                                         const InteractionLexicon &lexicon,
                                         std::size_t max_path_length) {
  std::set<std::string> features;
  for (const GraphPath &path : EnumeratePaths(graph, agent, target,
                                              max_path_length)) {
    features.insert("path:" + path.descriptor);
    for (std::size_t i = 1; i + 1 < path.nodes.size(); ++i) {
      const Node &n = graph.nodes[path.nodes[i]];
      if (const auto cls = lexicon.ClassOf(n.lemma)) {
        features.insert("ilex:" + *cls);
      }
      if (n.semantic_class) features.insert("path_class:" + *n.semantic_class);
    }
  }
  const Node &a = graph.nodes.at(agent);
  const Node &t = graph.nodes.at(target);
  if (a.semantic_class) features.insert("agent_class:" + *a.semantic_class);
  if (t.semantic_class) features.insert("target_class:" + *t.semantic_class);
  if (a.first < t.first) features.insert("order:agent-first");
  return {features.begin(), features.end()};
}

FeatureDictionary FeatureDictionary::Build(
    const std::vector<std::vector<std::string>> &feature_lists) {
  std::set<std::string> all;
  for (const auto &list : feature_lists) all.insert(list.begin(), list.end());
  FeatureDictionary dict;
  dict.names_.assign(all.begin(), all.end());
  return dict;
}

std::optional<std::size_t> FeatureDictionary::Find(std::string_view name) const {
  const auto it = std::lower_bound(names_.begin(), names_.end(), name);
  if (it == names_.end() || *it != name) return std::nullopt;
  return static_cast<std::size_t>(it - names_.begin());
}

FeatureVector Propositionalize(const RelationalExample &example,
                               const FeatureDictionary &dictionary,
                               const InteractionLexicon &lexicon,
                               const LearnerParams &params) {
  FeatureVector out;
  for (const std::string &f :
       ExtractFeatures(*example.graph, example.agent, example.target, lexicon,
                       params.max_path_length)) {
    if (const auto id = dictionary.Find(f)) out.push_back(*id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

double ExtractionRule::precision() const {
  const std::size_t covered = pos_covered + neg_covered;
  return covered == 0 ? 0.0 : static_cast<double>(pos_covered) / covered;
}

bool ExtractionRule::Matches(const std::set<std::string> &features) const {
  return std::all_of(literals.begin(), literals.end(), [&](const auto &l) {
    return features.count(l) > 0;
  });
}

namespace {

class Bitset {
 public:
  explicit Bitset(std::size_t n = 0) : words_((n + 63) / 64, 0) {}
  void Set(std::size_t i) { words_[i / 64] |= std::uint64_t{1} << (i % 64); }
  bool Test(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1; }
  Bitset &operator&=(const Bitset &o) {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
    return *this;
  }
  std::size_t CountAnd(const Bitset &o) const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < words_.size(); ++i) {
      n += __builtin_popcountll(words_[i] & o.words_[i]);
    }
    return n;
  }
  void Clear(const Bitset &o) {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= ~o.words_[i];
  }
  bool Any() const {
    return std::any_of(words_.begin(), words_.end(),
                       [](std::uint64_t w) { return w != 0; });
  }

 private:
  std::vector<std::uint64_t> words_;
};

struct Candidate {
  std::vector<std::string> literals;
  std::size_t pos = 0;
  std::size_t neg = 0;
  double score = 0;
};

}  // namespace

LearnResult LearnRules(const std::vector<LabeledFeatures> &training,
                       const LearnerParams &params) {
  std::set<std::string> regulations;
  std::set<std::string> names;
  for (const LabeledFeatures &ex : training) {
    if (ex.positive) regulations.insert(ex.regulation);
    names.insert(ex.features.begin(), ex.features.end());
  }
  if (regulations.empty()) throw Error("learn_rules: no positive examples");

  const std::size_t n = training.size();
  std::map<std::string, Bitset> covers;
  for (const std::string &f : names) covers.emplace(f, Bitset(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (const std::string &f : training[i].features) covers.at(f).Set(i);
  }

  LearnResult result;
  struct Learned {
    ExtractionRule rule;
    std::size_t order;
  };
  std::vector<Learned> learned;
  for (const std::string &reg : regulations) {
    Bitset positives(n), negatives(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (training[i].positive && training[i].regulation == reg) {
        positives.Set(i);
      } else {
        negatives.Set(i);
      }
    }
    Bitset remaining = positives;
    Termination why = Termination::kExhausted;
    while (remaining.Any()) {
      std::optional<Candidate> best;
      std::set<std::vector<std::string>> tried;
      for (std::size_t seed = 0; seed < n; ++seed) {
        if (!remaining.Test(seed)) continue;
        const auto &pool = training[seed].features;
        Candidate c;
        Bitset covered(n);
        for (std::size_t i = 0; i < n; ++i) covered.Set(i);
        c.pos = covered.CountAnd(remaining);
        c.neg = covered.CountAnd(negatives);
        c.score = c.pos - params.lambda * c.neg;
        while (c.literals.size() < params.max_literals) {
          std::optional<std::tuple<double, std::size_t, std::string>> pick;
          for (const std::string &f : pool) {
            if (std::find(c.literals.begin(), c.literals.end(), f) !=
                c.literals.end()) {
              continue;
            }
            Bitset next = covered;
            next &= covers.at(f);
            const std::size_t pos = next.CountAnd(remaining);
            const std::size_t neg = next.CountAnd(negatives);
            const double score = pos - params.lambda * neg;
            // Higher score, then fewer negatives, then smaller name.
            if (!pick || score > std::get<0>(*pick) ||
                (score == std::get<0>(*pick) && neg < std::get<1>(*pick))) {
              pick.emplace(score, neg, f);
            }
          }
          if (!pick) break;
          const bool over_budget = c.neg > params.noise_budget;
          if (!over_budget && !c.literals.empty() &&
              std::get<0>(*pick) <= c.score) {
            break;
          }
          covered &= covers.at(std::get<2>(*pick));
          c.literals.push_back(std::get<2>(*pick));
          c.pos = covered.CountAnd(remaining);
          c.neg = covered.CountAnd(negatives);
          c.score = std::get<0>(*pick);
        }
        std::sort(c.literals.begin(), c.literals.end());
        if (c.literals.empty() || c.neg > params.noise_budget || c.score <= 0 ||
            !tried.insert(c.literals).second) {
          continue;
        }
        if (!best || c.score > best->score ||
            (c.score == best->score && c.literals < best->literals)) {
          best = c;
        }
      }
      if (!best) {
        why = Termination::kNoRule;
        break;
      }
      Bitset covered(n);
      for (std::size_t i = 0; i < n; ++i) covered.Set(i);
      for (const std::string &l : best->literals) covered &= covers.at(l);
      ExtractionRule rule;
      rule.literals = best->literals;
      rule.regulation = reg;
      rule.pos_covered = covered.CountAnd(positives);
      rule.neg_covered = covered.CountAnd(negatives);
      learned.push_back({std::move(rule), learned.size()});
      remaining.Clear(covered);
    }
    result.termination[reg] = why;
  }

  std::stable_sort(learned.begin(), learned.end(),
                   [](const Learned &a, const Learned &b) {
                     // Exact comparison of pa/(pa+na) and pb/(pb+nb).
                     const auto &ra = a.rule, &rb = b.rule;
                     const std::uint64_t lhs =
                         ra.pos_covered * (rb.pos_covered + rb.neg_covered);
                     const std::uint64_t rhs =
                         rb.pos_covered * (ra.pos_covered + ra.neg_covered);
                     if (lhs != rhs) return lhs > rhs;
                     if (ra.pos_covered != rb.pos_covered) {
                       return ra.pos_covered > rb.pos_covered;
                     }
                     return a.order < b.order;
                   });
  for (std::size_t i = 0; i < learned.size(); ++i) {
    learned[i].rule.id = "r" + std::to_string(i + 1);
    result.rules.push_back(std::move(learned[i].rule));
  }
  return result;
}

namespace {

std::vector<std::vector<std::string>> FeaturesOf(
    const std::vector<RelationalExample> &examples,
    const InteractionLexicon &lexicon, const LearnerParams &params) {
  std::vector<std::vector<std::string>> out;
  out.reserve(examples.size());
  for (const RelationalExample &ex : examples) {
    out.push_back(ExtractFeatures(*ex.graph, ex.agent, ex.target, lexicon,
                                  params.max_path_length));
  }
  return out;
}

std::vector<LabeledFeatures> Label(
    const std::vector<RelationalExample> &examples,
    const std::vector<std::vector<std::string>> &features,
    const FeatureDictionary &dictionary) {
  std::vector<LabeledFeatures> out;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    LabeledFeatures lf;
    for (const std::string &f : features[i]) {
      if (dictionary.Find(f)) lf.features.insert(f);
    }
    lf.positive = examples[i].positive;
    lf.regulation = examples[i].regulation;
    out.push_back(std::move(lf));
  }
  return out;
}

}  // namespace

LearnResult LearnRules(const std::vector<RelationalExample> &training,
                       const InteractionLexicon &lexicon,
                       const LearnerParams &params) {
  const auto features = FeaturesOf(training, lexicon, params);
  return LearnRules(Label(training, features, FeatureDictionary::Build(features)),
                    params);
}

std::vector<Extraction> ApplyRules(const std::vector<ExtractionRule> &rules,
                                   const DependencyGraph &graph,
                                   const InteractionLexicon &lexicon,
                                   const LearnerParams &params) {
  std::vector<Extraction> out;
  if (rules.empty()) return out;
  std::set<std::tuple<std::string, std::string, std::string>> seen;
  for (const auto &[a, t] : CandidatePairs(graph)) {
    const auto list =
        ExtractFeatures(graph, a, t, lexicon, params.max_path_length);
    const std::set<std::string> features(list.begin(), list.end());
    for (const ExtractionRule &rule : rules) {
      if (!rule.Matches(features)) continue;
      Extraction e{InteractionType(rule.regulation), *graph.nodes[a].gene,
                   *graph.nodes[t].gene, graph.sentence_ref, rule.id};
      if (seen.emplace(e.type, e.agent, e.target).second) {
        out.push_back(std::move(e));
      }
      break;
    }
  }
  return out;
}

MeanStd Summarize(const std::vector<double> &values) {
  MeanStd out;
  if (values.empty()) return out;
  double sum = 0;
  for (double v : values) sum += v;
  out.mean = sum / values.size();
  if (values.size() > 1) {
    double ss = 0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(ss / (values.size() - 1));
  }
  return out;
}

std::vector<std::size_t> AssignFolds(const std::vector<bool> &positive,
                                     std::size_t k, std::uint64_t seed) {
  if (k == 0) throw Error("cross_validate: k must be at least 2");
  std::mt19937_64 rng(seed);
  auto shuffle = [&rng](std::vector<std::size_t> &v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[rng() % i]);
    }
  };
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < positive.size(); ++i) {
    (positive[i] ? pos : neg).push_back(i);
  }
  shuffle(pos);
  shuffle(neg);
  std::vector<std::size_t> fold(positive.size());
  for (std::size_t j = 0; j < pos.size(); ++j) fold[pos[j]] = j % k;
  for (std::size_t j = 0; j < neg.size(); ++j) {
    fold[neg[j]] = (pos.size() + j) % k;
  }
  return fold;
}

CvReport CrossValidate(const std::vector<RelationalExample> &examples,
                       std::size_t k, std::uint64_t seed,
                       const InteractionLexicon &lexicon,
                       const LearnerParams &params) {
  if (k < 2) throw Error("cross_validate: k must be at least 2");
  if (examples.size() < k) {
    throw Error("cross_validate: " + std::to_string(examples.size()) +
                " examples for " + std::to_string(k) + " folds");
  }
  std::vector<bool> positive;
  for (const RelationalExample &ex : examples) positive.push_back(ex.positive);
  const std::size_t n_pos = std::count(positive.begin(), positive.end(), true);
  if (n_pos < k) {
    throw Error("cross_validate: fewer positives (" + std::to_string(n_pos) +
                ") than folds (" + std::to_string(k) + "); use a smaller k");
  }
  const auto fold = AssignFolds(positive, k, seed);
  const auto features = FeaturesOf(examples, lexicon, params);

  using Triple = std::tuple<SentenceRef, std::string, std::string, std::string>;
  CvReport report;
  report.k = k;
  report.seed = seed;
  std::vector<double> precisions, recalls;
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<RelationalExample> train, test;
    std::vector<std::vector<std::string>> train_features, test_features;
    for (std::size_t i = 0; i < examples.size(); ++i) {
      if (fold[i] == f) {
        test.push_back(examples[i]);
        test_features.push_back(features[i]);
      } else {
        train.push_back(examples[i]);
        train_features.push_back(features[i]);
      }
    }
    const auto dictionary = FeatureDictionary::Build(train_features);
    const auto rules =
        LearnRules(Label(train, train_features, dictionary), params).rules;
    const auto labeled = Label(test, test_features, dictionary);

    std::set<Triple> gold, predicted;
    FoldResult r;
    r.size = test.size();
    r.rules = rules.size();
    for (std::size_t i = 0; i < test.size(); ++i) {
      const RelationalExample &ex = test[i];
      if (ex.positive) {
        ++r.positives;
        gold.emplace(ex.sentence_ref(), InteractionType(ex.regulation),
                     ex.agent_name(), ex.target_name());
      }
      for (const ExtractionRule &rule : rules) {
        if (!rule.Matches(labeled[i].features)) continue;
        predicted.emplace(ex.sentence_ref(), InteractionType(rule.regulation),
                          ex.agent_name(), ex.target_name());
        break;
      }
    }
    std::size_t correct = 0;
    for (const Triple &t : predicted) correct += gold.count(t);
    r.precision = predicted.empty() ? 1.0
                                    : static_cast<double>(correct) /
                                          predicted.size();
    r.recall = gold.empty() ? 1.0 : static_cast<double>(correct) / gold.size();
    precisions.push_back(r.precision);
    recalls.push_back(r.recall);
    report.folds.push_back(r);
  }
  report.precision = Summarize(precisions);
  report.recall = Summarize(recalls);
  return report;
}

nlohmann::json RulesToJson(const std::vector<ExtractionRule> &rules,
                           const LearnerParams &params) {
  nlohmann::json list = nlohmann::json::array();
  for (const ExtractionRule &r : rules) {
    list.push_back({{"id", r.id},
                    {"regulation", r.regulation},
                    {"literals", r.literals},
                    {"pos_covered", r.pos_covered},
                    {"neg_covered", r.neg_covered}});
  }
  return {{"params",
           {{"max_path_length", params.max_path_length},
            {"lambda", params.lambda},
            {"max_literals", params.max_literals},
            {"noise_budget", params.noise_budget}}},
          {"rules", list}};
}

std::vector<ExtractionRule> RulesFromJson(const nlohmann::json &json,
                                          LearnerParams *params) {
  std::vector<ExtractionRule> out;
  try {
    if (params && json.contains("params")) {
      const auto &p = json.at("params");
      params->max_path_length = p.at("max_path_length").get<std::size_t>();
      params->lambda = p.at("lambda").get<double>();
      params->max_literals = p.at("max_literals").get<std::size_t>();
      params->noise_budget = p.at("noise_budget").get<std::size_t>();
    }
    for (const auto &r : json.at("rules")) {
      ExtractionRule rule;
      rule.id = r.at("id").get<std::string>();
      rule.regulation = r.at("regulation").get<std::string>();
      rule.literals = r.at("literals").get<std::vector<std::string>>();
      std::sort(rule.literals.begin(), rule.literals.end());
      rule.pos_covered = r.at("pos_covered").get<std::size_t>();
      rule.neg_covered = r.at("neg_covered").get<std::size_t>();
      out.push_back(std::move(rule));
    }
  } catch (const nlohmann::json::exception &e) {
    throw Error(std::string("malformed rules: ") + e.what());
  }
  return out;
}

nlohmann::json CvReportToJson(const CvReport &report) {
  nlohmann::json folds = nlohmann::json::array();
  for (const FoldResult &f : report.folds) {
    folds.push_back({{"size", f.size},
                     {"positives", f.positives},
                     {"rules", f.rules},
                     {"precision", f.precision},
                     {"recall", f.recall}});
  }
  return {{"k", report.k},
          {"seed", report.seed},
          {"folds", folds},
          {"precision",
           {{"mean", report.precision.mean}, {"std", report.precision.std}}},
          {"recall", {{"mean", report.recall.mean}, {"std", report.recall.std}}}};
}

std::string FormatCvReport(const CvReport &report) {
  std::string out = "fold\tsize\tpos\trules\tprecision\trecall\n";
  char buf[128];
  for (std::size_t i = 0; i < report.folds.size(); ++i) {
    const FoldResult &f = report.folds[i];
    std::snprintf(buf, sizeof buf, "%zu\t%zu\t%zu\t%zu\t%.4f\t%.4f\n", i + 1,
                  f.size, f.positives, f.rules, f.precision, f.recall);
    out += buf;
  }
  std::snprintf(buf, sizeof buf,
                "precision %.1f%% ± %.1f%%\nrecall %.1f%% ± %.1f%%\n",
                100 * report.precision.mean, 100 * report.precision.std,
                100 * report.recall.mean, 100 * report.recall.std);
  out += buf;
  return out;
}

nlohmann::json ExtractionToJson(const Extraction &e) {
  return {{"type", e.type},
          {"agent", e.agent},
          {"target", e.target},
          {"sentence_ref",
           {{"doc_id", e.sentence_ref.doc_id}, {"index", e.sentence_ref.index}}},
          {"rule_id", e.rule_id}};
}

}  // namespace genic
