#include "genic/annotations.h"

#include <filesystem>
#include <random>
#include <regex>
#include <thread>

#include "doctest.h"
#include "genic/annotation_service.h"
#include "httplib.h"
#include "oracles.h"

namespace genic {
namespace {

using namespace oracles;

namespace fs = std::filesystem;

const AnnotationSchema &Schema() {
  static const AnnotationSchema s =
      AnnotationSchema::Load(std::string(GENIC_DATA_DIR) + "/schema.json");
  return s;
}

std::string Listing() {
  return text::ReadFile(std::string(GENIC_FIXTURE_DIR) +
                        "/annotations/listing.xml");
}

std::string Covered(const std::string &text, const Span &span) {
  return text::Slice(text, span);
}

TEST_CASE("the annotation listing parses into one frame") {
  const AnnotatedText parsed = ParseAnnotationXml(Listing(), Schema());
  REQUIRE(parsed.frames.size() == 1);
  const InteractionFrame &f = parsed.frames[0];
  CHECK(f.id == "1");
  CHECK(f.attribute("type") == std::optional<std::string>("transcriptional"));
  CHECK(f.attribute("assertion") == std::optional<std::string>("exist"));
  CHECK(f.attribute("regulation") == std::optional<std::string>("activate"));
  CHECK(f.attribute("uncertainty") == std::optional<std::string>("certain"));
  CHECK(f.attribute("self-contained") == std::optional<std::string>("yes"));
  CHECK(f.attribute("text-clarity") == std::optional<std::string>("good"));
  CHECK(Covered(parsed.text, f.range) == parsed.text);

  std::vector<std::string> interactions;
  std::map<int, std::pair<std::string, Attributes>> agents;
  std::vector<std::string> targets, confidence;
  for (const AnnotationSpan &s : f.spans) {
    const std::string inner = Covered(parsed.text, s.inner);
    switch (s.role) {
      case SpanRole::kInteraction: interactions.push_back(inner); break;
      case SpanRole::kAgent: agents[s.index] = {inner, s.attributes}; break;
      case SpanRole::kTarget: targets.push_back(inner); break;
      case SpanRole::kConfidence: confidence.push_back(inner); break;
    }
  }
  CHECK(interactions == std::vector<std::string>{"low level", "activated"});
  REQUIRE(agents.size() == 2);
  CHECK(agents[1].first == "GerE");
  CHECK(agents[1].second == Attributes{{"type", "protein"},
                                       {"role", "modulate"},
                                       {"direct", "yes"}});
  CHECK(agents[2].first == "GerE RNA polymerase");
  CHECK(agents[2].second ==
        Attributes{{"type", "protein"}, {"role", "required"}});
  CHECK(targets == std::vector<std::string>{"CotD"});
  CHECK(confidence == std::vector<std::string>{"in vitro"});
  CHECK(ValidateFrame(f, Schema(), text::Length(parsed.text)).empty());
}

TEST_CASE("serialization matches the listing and is a fixed point") {
  const std::string listing = Listing();
  const AnnotatedText parsed = ParseAnnotationXml(listing, Schema());
  const std::string xml =
      SerializeAnnotationXml(parsed.frames, parsed.text, Schema());
  CHECK(CanonicalXml(xml) == CanonicalXml(listing));
  const AnnotatedText again = ParseAnnotationXml(xml, Schema());
  CHECK(again == parsed);
  CHECK(SerializeAnnotationXml(again.frames, again.text, Schema()) == xml);
}

TEST_CASE("parse errors") {
  const std::string head =
      "<GENIC-INTERACTION id=\"1\" type=\"transcriptional\" assertion=\"exist\" "
      "regulation=\"activate\" uncertainty=\"certain\" self-contained=\"yes\" "
      "text-clarity=\"good\"";
  auto message = [&](const std::string &xml) -> std::string {
    try {
      ParseAnnotationXml(xml, Schema());
    } catch (const AnnotationError &e) {
      return e.what();
    }
    return "";
  };
  CHECK(message(head + "/>").find("no Interaction span") != std::string::npos);
  CHECK_FALSE(message(head + "><IF><I>x</I></IF>").empty());
  CHECK(message(head + "><IF><I>x</I></IF><B>y</B></GENIC-INTERACTION>")
            .find("unknown tag") != std::string::npos);
  CHECK(message(head + "><IF><I>x</I></IF><A1>y</A1></GENIC-INTERACTION>")
            .find("outside its frame tag") != std::string::npos);
  CHECK(message(head + "><IF><I>x</I></IF><AF1><A2>y</A2></AF1>"
                       "</GENIC-INTERACTION>")
            .find("outside its frame tag") != std::string::npos);
  CHECK(message("<A1 type=protein>GerE</A1>").find("outside") !=
        std::string::npos);
  CHECK(message(head + "><IF>x</IF></GENIC-INTERACTION>")
            .find("has no I") != std::string::npos);
  CHECK(message(head + " regulation=\"explode\"><IF><I>x</I></IF>"
                       "</GENIC-INTERACTION>")
            .find("duplicate attribute") != std::string::npos);
  CHECK_FALSE(message("a &bogus; b").empty());
  CHECK_FALSE(message("<p>unclosed").empty());

  const std::string explode =
      "<GENIC-INTERACTION id=\"1\" type=\"transcriptional\" assertion=\"exist\" "
      "regulation=\"explode\" uncertainty=\"certain\" self-contained=\"yes\" "
      "text-clarity=\"good\"><IF><I>x</I></IF></GENIC-INTERACTION>";
  try {
    ParseAnnotationXml(explode, Schema());
    FAIL("accepted an out-of-vocabulary value");
  } catch (const AnnotationError &e) {
    REQUIRE(e.violations().size() == 1);
    CHECK(e.violations()[0].code == "vocabulary");
  }
}

TEST_CASE("markup outside frames is preserved") {
  const std::string xml =
      "<title lang=\"en\">On GerE</title> GerE &amp; <GENIC-INTERACTION "
      "id=\"9\" type=\"transcriptional\" assertion=\"exist\" "
      "regulation=\"inhibit\" uncertainty=\"certain\" self-contained=\"yes\" "
      "text-clarity=\"good\"><IF><I>inhibits</I></IF> "
      "<TF1><T1 type=\"gene\">cotA</T1></TF1></GENIC-INTERACTION><br/>";
  const AnnotatedText parsed = ParseAnnotationXml(xml, Schema());
  CHECK(parsed.text == "On GerE GerE & inhibits cotA");
  REQUIRE(parsed.opaque.size() == 2);
  CHECK(parsed.opaque[0].name == "title");
  CHECK(parsed.opaque[0].attributes == Attributes{{"lang", "en"}});
  CHECK(Covered(parsed.text, parsed.opaque[0].range) == "On GerE");
  CHECK(parsed.opaque[1].range.empty());
  const std::string out = SerializeAnnotationXml(parsed.frames, parsed.text,
                                                 Schema(), parsed.opaque);
  CHECK(ParseAnnotationXml(out, Schema()) == parsed);
}

TEST_CASE("no frames leaves the text unwrapped") {
  CHECK(SerializeAnnotationXml({}, "GerE activates cotD", Schema()) ==
        "GerE activates cotD");
  CHECK(SerializeAnnotationXml({}, "a < b", Schema()) == "a &lt; b");
}

InteractionFrame ValidFrame() {
  InteractionFrame f;
  f.id = "1";
  f.attributes = {{"type", "transcriptional"}, {"assertion", "exist"},
                  {"regulation", "activate"},  {"uncertainty", "certain"},
                  {"self-contained", "yes"},   {"text-clarity", "good"}};
  f.range = {0, 19};  // "GerE activates cotD"
  AnnotationSpan agent{SpanRole::kAgent, 1, {0, 4}, {0, 4},
                       {{"type", "protein"}}};
  AnnotationSpan interaction{SpanRole::kInteraction, 0, {5, 14}, {5, 14}, {}};
  AnnotationSpan target{SpanRole::kTarget, 1, {15, 19}, {15, 19},
                        {{"type", "gene"}}};
  f.spans = {agent, interaction, target};
  return f;
}

std::vector<std::string> Codes(const std::vector<Violation> &v) {
  std::vector<std::string> out;
  for (const auto &x : v) out.push_back(x.code);
  return out;
}

TEST_CASE("each violation code has a triggering frame") {
  const std::string sentence = "GerE activates cotD in vitro";
  CHECK(ValidateFrame(ValidFrame(), Schema(), text::Length(sentence)).empty());

  std::map<std::string, std::vector<Violation>> seen;
  auto check_one = [&](const std::string &code, InteractionFrame f) {
    const auto v = ValidateFrame(f, Schema(), text::Length(sentence));
    CAPTURE(code);
    CHECK(Codes(v) == std::vector<std::string>{code});
    seen[code] = v;
  };
  {
    auto f = ValidFrame();
    f.attributes["regulation"] = "explode";
    check_one("vocabulary", f);
  }
  {
    auto f = ValidFrame();
    f.attributes.erase("uncertainty");
    check_one("missing_attribute", f);
  }
  {
    auto f = ValidFrame();
    f.spans[0].attributes["colour"] = "red";
    check_one("unknown_attribute", f);
  }
  {
    auto f = ValidFrame();
    f.spans.erase(f.spans.begin() + 1);
    check_one("no_interaction", f);
  }
  {
    // Oracle: [5, 9) is not within [0, 4).
    auto f = ValidFrame();
    f.spans[0].inner = {5, 9};
    f.spans[1].outer = f.spans[1].inner = {10, 14};
    check_one("nesting", f);
  }
  {
    auto f = ValidFrame();
    f.range = {0, 14};
    check_one("outside_frame", f);
  }
  {
    auto f = ValidFrame();
    f.spans[2].outer = {10, 19};
    check_one("overlap", f);
  }
  {
    auto f = ValidFrame();
    f.spans[0].index = 0;
    check_one("bad_index", f);
  }
  {
    auto f = ValidFrame();
    f.spans[2].role = SpanRole::kAgent;
    f.spans[2].attributes = {{"type", "gene"}};
    check_one("duplicate_index", f);
  }
  {
    auto f = ValidFrame();
    f.range = {0, 40};
    check_one("span_bounds", f);
  }

  // Document-level codes.
  auto a = ValidFrame();
  auto b = ValidFrame();
  b.range = {20, 28};
  b.spans = {{SpanRole::kInteraction, 0, {20, 28}, {20, 28}, {}}};
  const auto dup = ValidateFrames({a, b}, {sentence}, Schema());
  CHECK(Codes(dup) == std::vector<std::string>{"duplicate_frame_id"});
  seen["duplicate_frame_id"] = dup;
  b.id = "2";
  b.range = {15, 28};
  b.spans = {{SpanRole::kInteraction, 0, {20, 28}, {20, 28}, {}}};
  const auto crossing = ValidateFrames({a, b}, {sentence}, Schema());
  CHECK(Codes(crossing) == std::vector<std::string>{"frame_overlap"});
  seen["frame_overlap"] = crossing;
  b.sentence_ref.index = 3;
  const auto unknown = ValidateFrames({a, b}, {sentence}, Schema());
  CHECK(Codes(unknown) == std::vector<std::string>{"unknown_sentence"});
  seen["unknown_sentence"] = unknown;

  for (const std::string &code : ViolationCodes()) {
    CAPTURE(code);
    CHECK(seen.count(code) == 1);
  }
}

// Random valid frames over a word sequence, with span boundaries on words.
struct RandomCase {
  std::string text;
  std::vector<InteractionFrame> frames;
};

RandomCase MakeRandomCase(std::mt19937 &rng) {
  const std::vector<std::string> vocabulary = {
      "GerE", "activates", "cotD", "transcription", "of", "in", "vitro",
      "the", "sigma", "K", "&", "<x>", "protein", "é"};
  const std::size_t n = 6 + rng() % 20;
  std::vector<std::string> words;
  std::vector<std::size_t> starts;
  std::size_t offset = 0;
  for (std::size_t i = 0; i < n; ++i) {
    words.push_back(vocabulary[rng() % vocabulary.size()]);
    starts.push_back(offset);
    offset += text::Length(words.back()) + 1;
  }
  RandomCase c;
  c.text = text::Join(words, " ");
  auto range = [&](std::size_t first, std::size_t last) {
    return Span{starts[first], starts[last] + text::Length(words[last])};
  };
  const std::vector<std::string> regs = {"activate", "inhibit", "unknown"};
  std::size_t w = 0;
  int id = 1;
  while (w < n) {
    const std::size_t len = 1 + rng() % 6;
    if (w + len > n || rng() % 3 == 0) {
      ++w;
      continue;
    }
    InteractionFrame f;
    f.id = std::to_string(id++);
    f.attributes = {{"type", "transcriptional"},
                    {"assertion", rng() % 2 ? "exist" : "non-exist"},
                    {"regulation", regs[rng() % regs.size()]},
                    {"uncertainty", "certain"},
                    {"self-contained", "yes"},
                    {"text-clarity", "good"}};
    f.range = range(w, w + len - 1);
    // Disjoint outer spans over word runs inside the frame.
    int agents = 0, targets = 0;
    bool interaction = false;
    std::size_t k = w;
    while (k < w + len) {
      const std::size_t span_len = 1 + rng() % (w + len - k);
      if (rng() % 4 == 0 && interaction) {
        k += span_len;
        continue;
      }
      AnnotationSpan s;
      const int pick = interaction ? static_cast<int>(rng() % 4) : 2;
      s.role = static_cast<SpanRole>(pick);
      if (s.role == SpanRole::kAgent) {
        s.index = ++agents;
        s.attributes = {{"type", "protein"}, {"direct", "no"}};
      } else if (s.role == SpanRole::kTarget) {
        s.index = ++targets;
        s.attributes = {{"type", "gene"}};
      }
      interaction |= s.role == SpanRole::kInteraction;
      s.outer = range(k, k + span_len - 1);
      const std::size_t a = k + rng() % span_len;
      const std::size_t b = a + rng() % (k + span_len - a);
      s.inner = range(a, b);
      f.spans.push_back(s);
      k += span_len;
    }
    c.frames.push_back(std::move(f));
    w += len;
  }
  return c;
}

TEST_CASE("parse inverts serialize on random valid frames") {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const RandomCase c = MakeRandomCase(rng);
    REQUIRE(ValidateFrames(c.frames, {c.text}, Schema()).empty());
    const std::string xml = SerializeAnnotationXml(c.frames, c.text, Schema());
    const AnnotatedText back = ParseAnnotationXml(xml, Schema());
    CHECK(back.text == c.text);
    CHECK(back.frames == c.frames);
    CHECK(SerializeAnnotationXml(back.frames, back.text, Schema()) == xml);
  }
}

TEST_CASE("invalid frames are not serialized") {
  auto f = ValidFrame();
  f.spans.clear();
  CHECK_THROWS_AS(SerializeAnnotationXml({f}, "GerE activates cotD in vitro",
                                         Schema()),
                  AnnotationError);
}

TEST_CASE("frame JSON round trip") {
  const AnnotatedText parsed = ParseAnnotationXml(Listing(), Schema());
  const auto json = nlohmann::json::parse(FrameToJson(parsed.frames[0]).dump());
  CHECK(FrameFromJson(json) == parsed.frames[0]);
  CHECK_THROWS_AS(FrameFromJson(nlohmann::json::object()), Error);
}

AnnotatedDocument SampleDocument() {
  AnnotatedDocument doc;
  doc.id = "doc1";
  doc.title = "GerE & friends";
  doc.sentences = {"GerE activates cotD in vitro", "Nothing here."};
  doc.frames = {ValidFrame()};
  doc.frames[0].sentence_ref = {"doc1", 0};
  doc.version = 4;
  return doc;
}

TEST_CASE("document XML round trip") {
  const AnnotatedDocument doc = SampleDocument();
  const std::string xml = SerializeDocumentXml(doc, Schema());
  CHECK(ParseDocumentXml(xml, Schema()) == doc);
  CHECK_THROWS_AS(ParseDocumentXml("<SENTENCE/>", Schema()), AnnotationError);
}

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("genic-store-" + std::to_string(::getpid()) + "-" +
            std::to_string(counter++));
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

Document PlainDocument() {
  return BuildDocument("doc1", "GerE",
                       "GerE activates cotD in vitro. Nothing here.");
}

TEST_CASE("store saves with optimistic versions") {
  TempDir dir;
  AnnotationStore store(dir.path.string(), Schema());
  CHECK(store.Add(PlainDocument()));
  CHECK_FALSE(store.Add(PlainDocument()));
  REQUIRE(store.Get("doc1"));
  CHECK(store.Get("doc1")->version == 0);
  CHECK(store.Get("doc1")->frames.empty());
  CHECK_FALSE(store.Get("nope"));
  const fs::path file = dir.path / "doc1.xml";

  auto saved = store.Save("doc1", {ValidFrame()}, 0);
  CHECK(saved.status == AnnotationStore::SaveStatus::kSaved);
  CHECK(saved.version == 1);
  const std::string bytes = text::ReadFile(file.string());

  const auto stale = store.Save("doc1", {}, 0);
  CHECK(stale.status == AnnotationStore::SaveStatus::kVersionConflict);
  CHECK(stale.version == 1);
  CHECK(text::ReadFile(file.string()) == bytes);

  auto bad = ValidFrame();
  bad.attributes["regulation"] = "explode";
  const auto invalid = store.Save("doc1", {bad}, 1);
  CHECK(invalid.status == AnnotationStore::SaveStatus::kInvalid);
  CHECK(Codes(invalid.violations) == std::vector<std::string>{"vocabulary"});
  CHECK(text::ReadFile(file.string()) == bytes);

  CHECK(store.Save("nope", {}, 0).status ==
        AnnotationStore::SaveStatus::kNotFound);

  // Restart.
  AnnotationStore reopened(dir.path.string(), Schema());
  const auto doc = reopened.Get("doc1");
  REQUIRE(doc);
  CHECK(doc->version == 1);
  REQUIRE(doc->frames.size() == 1);
  auto expected = ValidFrame();
  expected.sentence_ref = {"doc1", 0};
  CHECK(doc->frames[0] == expected);
  const auto index = nlohmann::json::parse(
      text::ReadFile((dir.path / "index.json").string()));
  CHECK(index["documents"][0]["version"] == 1);
  CHECK_THROWS_AS(store.Add(BuildDocument("../x", "", "a.")), Error);
}

struct RunningServer {
  TempDir dir;
  AnnotationStore store;
  AnnotationServer server;
  int port = 0;
  std::thread thread;

  RunningServer()
      : store((fs::create_directories(dir.path), dir.path.string()), Schema()),
        server(&store) {
    store.Add(PlainDocument());
    port = server.Bind("127.0.0.1", 0);
    thread = std::thread([this] { server.Listen(); });
  }
  ~RunningServer() {
    server.Stop();
    thread.join();
  }
  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port);
    c.set_connection_timeout(5);
    return c;
  }
};

std::string PutBody(long version, const std::vector<InteractionFrame> &frames) {
  nlohmann::json f = nlohmann::json::array();
  for (const auto &x : frames) f.push_back(FrameToJson(x));
  return nlohmann::json{{"version", version}, {"frames", f}}.dump();
}

TEST_CASE("service endpoints over HTTP") {
  RunningServer s;
  auto c = s.client();

  auto list = c.Get("/documents");
  REQUIRE(list);
  CHECK(list->status == 200);
  CHECK(nlohmann::json::parse(list->body)["documents"] ==
        nlohmann::json::parse(R"([{"id":"doc1","version":0}])"));

  auto doc = c.Get("/documents/doc1");
  REQUIRE(doc);
  CHECK(doc->status == 200);
  auto body = nlohmann::json::parse(doc->body);
  CHECK(body["sentences"][0]["text"] == "GerE activates cotD in vitro.");
  CHECK(body["frames"].empty());
  CHECK(c.Get("/documents/missing")->status == 404);

  auto frame = ValidFrame();
  const std::string file = (s.dir.path / "doc1.xml").string();
  auto put = c.Put("/documents/doc1/annotations", PutBody(0, {frame}),
                   "application/json");
  REQUIRE(put);
  CHECK(put->status == 200);
  CHECK(nlohmann::json::parse(put->body)["version"] == 1);
  const std::string saved = text::ReadFile(file);

  // Read your writes.
  body = nlohmann::json::parse(c.Get("/documents/doc1")->body);
  CHECK(body["version"] == 1);
  REQUIRE(body["frames"].size() == 1);
  frame.sentence_ref.doc_id = "doc1";
  auto got = FrameFromJson(body["frames"][0]);
  got.sentence_ref.doc_id = "doc1";
  CHECK(got == frame);

  auto stale = c.Put("/documents/doc1/annotations", PutBody(0, {}),
                     "application/json");
  CHECK(stale->status == 409);
  CHECK(text::ReadFile(file) == saved);

  auto bad = frame;
  bad.spans.erase(bad.spans.begin() + 1);
  auto invalid = c.Put("/documents/doc1/annotations", PutBody(1, {bad}),
                       "application/json");
  CHECK(invalid->status == 422);
  const auto violations = nlohmann::json::parse(invalid->body)["violations"];
  REQUIRE(violations.size() == 1);
  CHECK(violations[0]["code"] == "no_interaction");
  CHECK(text::ReadFile(file) == saved);

  CHECK(c.Put("/documents/doc1/annotations", "{", "application/json")->status ==
        400);
  CHECK(c.Put("/documents/missing/annotations", PutBody(0, {}),
              "application/json")
            ->status == 404);

  auto schema = c.Get("/schema");
  REQUIRE(schema);
  const auto sj = nlohmann::json::parse(schema->body);
  CHECK(sj["frame_tag"] == "GENIC-INTERACTION");
  CHECK(sj["tags"].size() == 9);
  CHECK(sj["violation_codes"].size() == ViolationCodes().size());
}

TEST_CASE("concurrent saves with one version: exactly one wins") {
  RunningServer s;
  std::vector<int> statuses(8);
  std::vector<std::thread> threads;
  for (std::size_t i = 0; i < statuses.size(); ++i) {
    threads.emplace_back([&, i] {
      auto c = s.client();
      auto r = c.Put("/documents/doc1/annotations", PutBody(0, {ValidFrame()}),
                     "application/json");
      statuses[i] = r ? r->status : -1;
    });
  }
  for (auto &t : threads) t.join();
  CHECK(std::count(statuses.begin(), statuses.end(), 200) == 1);
  CHECK(std::count(statuses.begin(), statuses.end(), 409) == 7);
  CHECK(s.store.Get("doc1")->version == 1);
}

}  // namespace
}  // namespace genic
