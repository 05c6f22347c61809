#include "genic/filter.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>

namespace genic {

const char *RelevanceName(Relevance label) {
  return label == Relevance::kRelevant ? "relevant" : "irrelevant";
}

Relevance ParseRelevance(std::string_view name) {
  if (name == "relevant") return Relevance::kRelevant;
  if (name == "irrelevant") return Relevance::kIrrelevant;
  throw Error("unknown relevance label \"" + std::string(name) + "\"");
}

const char *CountModeName(CountMode mode) {
  return mode == CountMode::kRawMentions ? "raw_mentions"
                                         : "distinct_canonical";
}

CountMode ParseCountMode(std::string_view name) {
  if (name == "raw_mentions") return CountMode::kRawMentions;
  if (name == "distinct_canonical") return CountMode::kDistinctCanonical;
  throw Error("unknown count mode \"" + std::string(name) + "\"");
}

std::set<std::string> BuildFeatureBag(
    const Sentence &sentence, const std::vector<GeneMention> &mentions) {
  std::vector<bool> masked(sentence.tokens.size(), false);
  std::set<std::string> bag;
  for (const GeneMention &mention : mentions) {
    for (std::size_t t = mention.first;
         t <= mention.last && t < masked.size(); ++t) {
      masked[t] = true;
    }
    bag.insert(kGenePlaceholder);
  }
  for (std::size_t t = 0; t < sentence.tokens.size(); ++t) {
    const Token &token = sentence.tokens[t];
    if (masked[t]) continue;
    if (token.kind != TokenKind::kWord && token.kind != TokenKind::kNumber) {
      continue;
    }
    bag.insert(text::ToLower(token.text));
  }
  return bag;
}

std::size_t CountGenes(const std::vector<GeneMention> &mentions,
                       CountMode mode) {
  if (mode == CountMode::kRawMentions) return mentions.size();
  std::set<std::string> distinct;
  for (const GeneMention &m : mentions) distinct.insert(m.canonical);
  return distinct.size();
}

bool CandidateFilter(const Sentence &sentence,
                     const std::vector<GeneMention> &mentions,
                     CountMode mode) {
  for (const GeneMention &m : mentions) {
    if (m.sentence_ref != sentence.ref() || m.last >= sentence.tokens.size()) {
      throw Error("mention \"" + m.surface +
                  "\" does not belong to the sentence");
    }
  }
  return CountGenes(mentions, mode) >= 2;
}

double MutualInformation(std::size_t with_feature_relevant,
                         std::size_t with_feature_irrelevant,
                         std::size_t total_relevant,
                         std::size_t total_irrelevant) {
  const double n = static_cast<double>(total_relevant + total_irrelevant);
  if (n == 0) return 0.0;
  const double cells[2][2] = {
      {static_cast<double>(with_feature_relevant),
       static_cast<double>(with_feature_irrelevant)},
      {static_cast<double>(total_relevant - with_feature_relevant),
       static_cast<double>(total_irrelevant - with_feature_irrelevant)}};
  const double class_totals[2] = {static_cast<double>(total_relevant),
                                  static_cast<double>(total_irrelevant)};
  double mi = 0.0;
  for (int f = 0; f < 2; ++f) {
    const double feature_total = cells[f][0] + cells[f][1];
    for (int c = 0; c < 2; ++c) {
      if (cells[f][c] == 0) continue;
      mi += cells[f][c] / n *
            std::log(cells[f][c] * n / (feature_total * class_totals[c]));
    }
  }
  return std::max(0.0, mi);
}

namespace {

std::array<std::size_t, 2> LabelCounts(
    const std::vector<LabeledSentence> &training) {
  std::array<std::size_t, 2> counts{};
  for (const LabeledSentence &s : training) {
    if (!s.label) throw Error("training sentence without a label");
    ++counts[static_cast<int>(*s.label)];
  }
  return counts;
}

void RequireBothLabels(const std::array<std::size_t, 2> &counts) {
  if (counts[0] == 0 || counts[1] == 0) {
    throw Error("training data must contain both relevant and irrelevant "
                "sentences");
  }
}

// Quantized so that mathematically equal scores computed in a different
// summation order compare equal.
std::int64_t ScoreKey(double mi) {
  return static_cast<std::int64_t>(std::llround(mi * 1e12));
}

}  // namespace

std::vector<RankedFeature> RankFeatures(
    const std::vector<LabeledSentence> &training) {
  const auto totals = LabelCounts(training);
  RequireBothLabels(totals);
  std::map<std::string, std::array<std::size_t, 2>> counts;
  for (const LabeledSentence &s : training) {
    for (const std::string &feature : s.bag) {
      ++counts[feature][static_cast<int>(*s.label)];
    }
  }
  std::vector<RankedFeature> ranked;
  ranked.reserve(counts.size());
  for (const auto &[feature, c] : counts) {
    ranked.push_back(
        {feature, MutualInformation(c[0], c[1], totals[0], totals[1])});
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const RankedFeature &a, const RankedFeature &b) {
                     const auto ka = ScoreKey(a.mutual_information);
                     const auto kb = ScoreKey(b.mutual_information);
                     if (ka != kb) return ka > kb;
                     return a.feature < b.feature;
                   });
  return ranked;
}

std::set<std::string> SelectFeatures(
    const std::vector<LabeledSentence> &training, std::size_t k) {
  if (k < 1) throw Error("feature count k must be at least 1");
  const std::vector<RankedFeature> ranked = RankFeatures(training);
  std::set<std::string> selected;
  for (std::size_t i = 0; i < ranked.size() && i < k; ++i) {
    selected.insert(ranked[i].feature);
  }
  return selected;
}

NaiveBayesModel TrainNaiveBayes(const std::vector<LabeledSentence> &training,
                                const std::set<std::string> &vocabulary,
                                double alpha, double threshold) {
  if (training.empty()) throw Error("empty training set");
  if (!(alpha > 0)) throw Error("smoothing alpha must be positive");
  if (!(threshold >= 0 && threshold <= 1)) {
    throw Error("threshold must lie in [0, 1]");
  }
  const auto totals = LabelCounts(training);
  RequireBothLabels(totals);

  NaiveBayesModel model;
  model.vocabulary = vocabulary;
  model.smoothing_alpha = alpha;
  model.threshold = threshold;
  model.class_counts = totals;
  const double n = static_cast<double>(training.size());
  for (int c = 0; c < 2; ++c) {
    model.class_log_priors[c] = std::log(totals[c] / n);
  }
  std::map<std::string, std::array<std::size_t, 2>> counts;
  for (const std::string &feature : vocabulary) counts[feature] = {0, 0};
  for (const LabeledSentence &s : training) {
    for (const std::string &feature : s.bag) {
      auto it = counts.find(feature);
      if (it != counts.end()) ++it->second[static_cast<int>(*s.label)];
    }
  }
  for (const auto &[feature, c] : counts) {
    auto &entry = model.feature_log_likelihoods[feature];
    for (int k = 0; k < 2; ++k) {
      entry[k] = std::log((c[k] + alpha) / (totals[k] + 2 * alpha));
    }
  }
  return model;
}

Classification Classify(const NaiveBayesModel &model,
                        const std::set<std::string> &bag) {
  std::array<double, 2> score = model.class_log_priors;
  for (const std::string &feature : bag) {
    auto it = model.feature_log_likelihoods.find(feature);
    if (it == model.feature_log_likelihoods.end()) continue;
    score[0] += it->second[0];
    score[1] += it->second[1];
  }
  Classification result;
  // Equal joints summed in different orders can differ by rounding.
  const double tie = 1e-12 * (1 + std::abs(score[0]) + std::abs(score[1]));
  if (std::abs(score[0] - score[1]) <= tie) {
    result.posterior_relevant = result.posterior_irrelevant = 0.5;
  } else {
    const double top = std::max(score[0], score[1]);
    const double e0 = std::exp(score[0] - top);
    const double e1 = std::exp(score[1] - top);
    result.posterior_relevant = e0 / (e0 + e1);
    result.posterior_irrelevant = e1 / (e0 + e1);
  }
  result.accepted = result.posterior_relevant >= model.threshold;
  return result;
}

FilterDecision DecideSentence(const Sentence &sentence,
                              const std::vector<GeneMention> &mentions,
                              const NaiveBayesModel *model, CountMode mode) {
  FilterDecision decision;
  decision.sentence_ref = sentence.ref();
  decision.candidate = CandidateFilter(sentence, mentions, mode);
  if (!decision.candidate) return decision;
  if (model == nullptr) {
    decision.posterior_relevant = 1.0;
    decision.accepted = true;
    return decision;
  }
  const Classification c = Classify(*model, BuildFeatureBag(sentence, mentions));
  decision.posterior_relevant = c.posterior_relevant;
  decision.accepted = c.accepted;
  return decision;
}

nlohmann::json ModelToJson(const NaiveBayesModel &model) {
  nlohmann::json likelihoods = nlohmann::json::object();
  for (const auto &[feature, values] : model.feature_log_likelihoods) {
    likelihoods[feature] = {values[0], values[1]};
  }
  return {
      {"format", "genic-naive-bayes"},
      {"version", NaiveBayesModel::kFormatVersion},
      {"classes", {"relevant", "irrelevant"}},
      {"class_log_priors", {model.class_log_priors[0],
                            model.class_log_priors[1]}},
      {"class_counts", {model.class_counts[0], model.class_counts[1]}},
      {"smoothing_alpha", model.smoothing_alpha},
      {"threshold", model.threshold},
      {"vocabulary", model.vocabulary},
      {"feature_log_likelihoods", likelihoods},
  };
}

NaiveBayesModel ModelFromJson(const nlohmann::json &json) {
  try {
    if (json.at("format") != "genic-naive-bayes") {
      throw Error("not a naive Bayes model file");
    }
    if (json.at("version").get<int>() != NaiveBayesModel::kFormatVersion) {
      throw Error("unsupported model version " +
                  json.at("version").dump());
    }
    NaiveBayesModel model;
    model.class_log_priors = json.at("class_log_priors");
    model.class_counts = json.at("class_counts");
    model.smoothing_alpha = json.at("smoothing_alpha");
    model.threshold = json.at("threshold");
    model.vocabulary = json.at("vocabulary").get<std::set<std::string>>();
    for (const auto &[feature, values] :
         json.at("feature_log_likelihoods").items()) {
      model.feature_log_likelihoods[feature] = {values.at(0).get<double>(),
                                                values.at(1).get<double>()};
    }
    return model;
  } catch (const nlohmann::json::exception &e) {
    throw Error(std::string("malformed model: ") + e.what());
  }
}

std::vector<LabeledSentence> ParseTrainingTsv(std::string_view content,
                                              const GeneLexicon &lexicon) {
  std::vector<LabeledSentence> out;
  std::istringstream in{std::string(content)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::Trim(line).empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error("training line " + std::to_string(line_no) +
                  ": expected label<TAB>sentence");
    }
    Sentence sentence;
    sentence.doc_id = "train";
    sentence.index = out.size();
    sentence.text = text::NormalizeNfc(text::Trim(line.substr(tab + 1)));
    sentence.tokens = Tokenize(sentence.text);
    LabeledSentence labeled;
    labeled.sentence_ref = sentence.ref();
    labeled.label = ParseRelevance(text::Trim(line.substr(0, tab)));
    labeled.bag = BuildFeatureBag(sentence, FindGeneMentions(sentence, lexicon));
    out.push_back(std::move(labeled));
  }
  return out;
}

}  // namespace genic
