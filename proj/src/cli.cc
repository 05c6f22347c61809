#include <pthread.h>

#include <csignal>
#include <filesystem>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "genic/annotation_service.h"
#include "genic/pipeline.h"

namespace genic {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> folds;
  std::optional<int> port;
  std::string examples;
  bool no_cv = false;
  std::string gold;
  std::string predicted;
  std::string store;
  bool json_output = false;
};

int Serve(const PipelineConfig &config, const Pipeline &pipeline) {
  if (config.paths.store.empty()) {
    throw Error("annotate-serve: no store (--store or paths.store)");
  }
  AnnotationStore store(config.paths.store,
                        AnnotationSchema::Load(config.paths.schema));
  std::size_t imported = 0;
  if (fs::is_regular_file(pipeline.OutputPath(artifacts::kCorpus))) {
    for (const std::string &line :
         text::Split(text::ReadFile(pipeline.OutputPath(artifacts::kCorpus)), '\n')) {
      if (text::Trim(line).empty()) continue;
      const json j = json::parse(line);
      std::vector<std::string> texts;
      for (const json &s : j.at("sentences")) texts.push_back(s.at("text"));
      Document doc;
      doc.id = j.at("id");
      doc.title = j.at("title");
      doc.abstract_text = j.at("abstract");
      for (std::size_t i = 0; i < texts.size(); ++i) {
        Sentence s;
        s.doc_id = doc.id;
        s.index = i;
        s.text = texts[i];
        doc.sentences.push_back(std::move(s));
      }
      imported += store.Add(doc);
    }
  }

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  AnnotationServer server(&store, config.static_dir);
  const int port = server.Bind(config.serve_host, config.serve_port);
  std::cout << "imported " << imported << " documents\n"
            << "listening on http://" << config.serve_host << ":" << port
            << std::endl;
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.Stop();
  });
  server.Listen();
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  return 0;
}

int Run(const std::string &command, const Options &options) {
  auto loaded = LoadConfig(options.config);
  if (loaded.config) {
    PipelineConfig &c = *loaded.config;
    if (options.seed) c.seed = *options.seed;
    if (options.folds) {
      if (*options.folds < 2) loaded.violations.push_back("--folds: must be at least 2");
      c.folds = *options.folds;
    }
    if (options.port) {
      if (*options.port < 0 || *options.port > 65535) {
        loaded.violations.push_back("--port: must be in [0, 65535]");
      }
      c.serve_port = *options.port;
    }
    if (!options.store.empty()) c.paths.store = fs::absolute(options.store).string();
  }
  if (!loaded.violations.empty()) {
    std::cerr << "invalid configuration " << options.config << ":\n";
    for (const std::string &v : loaded.violations) std::cerr << "  " << v << "\n";
    return 1;
  }
  Pipeline pipeline(*loaded.config);
  auto emit = [&](const StageReport &r) {
    pipeline.Record(r);
    std::cout << FormatStageReport(r);
  };
  if (command == "ingest") emit(pipeline.Ingest());
  else if (command == "ner") emit(pipeline.Ner());
  else if (command == "filter") emit(pipeline.Filter());
  else if (command == "synonyms") emit(pipeline.Synonyms());
  else if (command == "parse") emit(pipeline.Parse());
  else if (command == "cluster") emit(pipeline.ClusterStage());
  else if (command == "learn") emit(pipeline.Learn(options.examples, !options.no_cv));
  else if (command == "eval") emit(pipeline.Eval(options.gold, options.predicted));
  else if (command == "extract") {
    const auto reports = pipeline.Extract();
    for (std::size_t i = 0; i + 1 < reports.size(); ++i) {
      std::cout << FormatStageReport(reports[i]);
    }
    emit(reports.back());
  } else if (command == "annotate-serve") {
    return Serve(pipeline.config(), pipeline);
  } else if (command == "report") {
    const std::string path = pipeline.OutputPath(artifacts::kReport);
    if (!fs::is_regular_file(path)) throw MissingArtifactError("ingest", path);
    const json report = json::parse(text::ReadFile(path));
    const std::string tpath = pipeline.OutputPath(artifacts::kTimings);
    const json timings = fs::is_regular_file(tpath)
                             ? json::parse(text::ReadFile(tpath))
                             : json::object();
    if (options.json_output) {
      std::cout << json{{"report", report}, {"timings", timings}}.dump(1) << "\n";
    } else {
      std::cout << FormatRunReport(report, timings);
    }
  }
  return 0;
}

}  // namespace

int RunCli(int argc, char **argv) {
  CLI::App app{"Gene interaction extraction pipeline"};
  app.require_subcommand(1);
  Options options;
  app.add_option("--config", options.config, "Pipeline configuration (JSON)")
      ->required();
  app.add_option("--seed", options.seed, "Override learner.seed");
  app.add_option("--folds", options.folds, "Override learner.folds");
  app.add_option("--port", options.port, "Override serve.port");

  const std::vector<std::pair<const char *, const char *>> commands = {
      {"ingest", "Segment the corpus into sentences"},
      {"ner", "Find gene mentions"},
      {"filter", "Keep sentences likely to describe an interaction"},
      {"synonyms", "Mine gene synonyms from trigger phrases"},
      {"parse", "Dependency-parse the accepted sentences"},
      {"cluster", "Build the semantic class hierarchy"},
      {"annotate-serve", "Serve the annotation store over HTTP"},
      {"learn", "Learn extraction rules from annotated documents"},
      {"extract", "Run the pipeline and apply the rules"},
      {"eval", "Score predicted relations against gold ones"},
      {"report", "Print the run report"},
  };
  for (const auto &[name, description] : commands) {
    CLI::App *sub = app.add_subcommand(name, description);
    sub->fallthrough();
    const std::string command = name;
    if (command == "learn") {
      sub->add_option("--examples", options.examples,
                      "Annotated document XML or store directory");
      sub->add_flag("--no-cv", options.no_cv, "Skip cross-validation");
    } else if (command == "eval") {
      sub->add_option("--gold", options.gold, "Gold relations TSV");
      sub->add_option("--predicted", options.predicted, "Predicted relations TSV");
    } else if (command == "annotate-serve") {
      sub->add_option("--store", options.store, "Store directory");
    } else if (command == "report") {
      sub->add_flag("--json", options.json_output, "Print raw JSON");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return Run(command, options);
  } catch (const MissingArtifactError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << command << ": " << e.what() << "\n";
    return 3;
  }
}

}  // namespace genic
