#ifndef GENIC_ANNOTATIONS_H_
#define GENIC_ANNOTATIONS_H_

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "genic/corpus.h"
#include "json.hpp"

namespace genic {

enum class SpanRole { kAgent, kTarget, kInteraction, kConfidence };

const char *SpanRoleName(SpanRole role);
SpanRole ParseSpanRole(std::string_view name);

struct AttributeSpec {
  std::string name;
  bool required = false;
  std::vector<std::string> values;  // empty: free text
};

struct RoleSpec {
  SpanRole role = SpanRole::kInteraction;
  std::string outer_tag;  // "AF", "IF", ...
  std::string inner_tag;  // "A", "I", ...
  bool indexed = false;   // AF1/A1, AF2/A2, ...
  std::vector<AttributeSpec> attributes;  // on the inner element
};

// Controlled vocabularies and the tag subset, loaded from JSON.
struct AnnotationSchema {
  std::string frame_tag = "GENIC-INTERACTION";
  std::vector<AttributeSpec> frame_attributes;  // serialization order
  std::vector<RoleSpec> roles;
  nlohmann::json raw;

  static AnnotationSchema Parse(const nlohmann::json &json);
  static AnnotationSchema Load(const std::string &path);

  const RoleSpec &role(SpanRole r) const;
  // Role and index of a tag name such as "AF2" or "I"; nullopt if unknown.
  // The bool is true for an outer (frame) tag.
  struct TagInfo {
    SpanRole role;
    bool outer;
    int index;
  };
  std::optional<TagInfo> Classify(std::string_view tag) const;
  std::string TagName(SpanRole role, bool outer, int index) const;
};

using Attributes = std::map<std::string, std::string>;

struct AnnotationSpan {
  SpanRole role = SpanRole::kInteraction;
  int index = 0;      // 1.. for agents and targets, 0 otherwise
  Span outer;         // AF/TF/IF/CF extent, within the sentence
  Span inner;         // A/T/I/C extent
  Attributes attributes;  // of the inner element

  friend bool operator==(const AnnotationSpan &,
                         const AnnotationSpan &) = default;
};

struct InteractionFrame {
  std::string id;
  Attributes attributes;  // without "id"
  Span range;             // GENIC-INTERACTION extent
  std::vector<AnnotationSpan> spans;
  SentenceRef sentence_ref;

  std::optional<std::string> attribute(std::string_view name) const;
  friend bool operator==(const InteractionFrame &,
                         const InteractionFrame &) = default;
};

// Markup outside interaction frames, kept as-is.
struct OpaqueElement {
  std::string name;
  Attributes attributes;
  Span range;
  int depth = 0;

  friend bool operator==(const OpaqueElement &,
                         const OpaqueElement &) = default;
};

struct AnnotatedText {
  std::string text;  // whitespace runs collapsed, trimmed
  std::vector<InteractionFrame> frames;
  std::vector<OpaqueElement> opaque;

  friend bool operator==(const AnnotatedText &,
                         const AnnotatedText &) = default;
};

struct Violation {
  std::string code;
  std::string frame_id;
  std::string message;

  friend bool operator==(const Violation &, const Violation &) = default;
};

// Every code validation can report.
const std::vector<std::string> &ViolationCodes();

class AnnotationError : public Error {
 public:
  AnnotationError(const std::string &message,
                  std::vector<Violation> violations = {});
  const std::vector<Violation> &violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

// Never throws. `text_length` enables the span bound checks against the
// sentence.
std::vector<Violation> ValidateFrame(
    const InteractionFrame &frame, const AnnotationSchema &schema,
    std::optional<std::size_t> text_length = std::nullopt);

// Per-frame checks plus unique ids, non-crossing frames and known
// sentences.
std::vector<Violation> ValidateFrames(
    const std::vector<InteractionFrame> &frames,
    const std::vector<std::string> &sentence_texts,
    const AnnotationSchema &schema);

// Inline XML for one sentence. Element ranges are character ranges in the
// collapsed text, trimmed of surrounding spaces. Unquoted attribute values
// are accepted. Throws AnnotationError on malformed XML, unknown tags inside
// a frame, misplaced inner tags, or any validation violation.
AnnotatedText ParseAnnotationXml(std::string_view xml,
                                 const AnnotationSchema &schema);

// Canonical form: frame attributes as id then schema order, inner
// attributes in schema order, no insignificant whitespace. Throws
// AnnotationError for invalid frames.
std::string SerializeAnnotationXml(const std::vector<InteractionFrame> &frames,
                                   std::string_view text,
                                   const AnnotationSchema &schema,
                                   const std::vector<OpaqueElement> &opaque = {});

nlohmann::json FrameToJson(const InteractionFrame &frame);
InteractionFrame FrameFromJson(const nlohmann::json &json);
nlohmann::json ViolationToJson(const Violation &violation);

struct AnnotatedDocument {
  std::string id;
  std::string title;
  std::vector<std::string> sentences;
  std::vector<InteractionFrame> frames;
  long version = 0;

  friend bool operator==(const AnnotatedDocument &,
                         const AnnotatedDocument &) = default;
};

// `<DOCUMENT id=".." title=".." version="N">` holding one `<SENTENCE>`
// element per sentence with its frames inline.
std::string SerializeDocumentXml(const AnnotatedDocument &document,
                                 const AnnotationSchema &schema);
AnnotatedDocument ParseDocumentXml(std::string_view xml,
                                   const AnnotationSchema &schema);

nlohmann::json DocumentToJson(const AnnotatedDocument &document);

// `store/{doc_id}.xml` plus `store/index.json`. Saves are atomic renames;
// a document's version is bumped on every successful save.
class AnnotationStore {
 public:
  AnnotationStore(std::string directory, AnnotationSchema schema);

  struct Entry {
    std::string id;
    long version = 0;
  };

  enum class SaveStatus { kSaved, kNotFound, kVersionConflict, kInvalid };
  struct SaveResult {
    SaveStatus status = SaveStatus::kSaved;
    long version = 0;  // new version, or current one on conflict
    std::vector<Violation> violations;
  };

  std::vector<Entry> List() const;
  std::optional<AnnotatedDocument> Get(const std::string &id) const;
  // Adds a document at version 0 unless one with the id exists. Returns
  // false if it existed.
  bool Add(const Document &document);
  SaveResult Save(const std::string &id,
                  const std::vector<InteractionFrame> &frames,
                  long expected_version);

  const AnnotationSchema &schema() const { return schema_; }
  const std::string &directory() const { return directory_; }

  static bool IsValidId(std::string_view id);

 private:
  std::string PathOf(const std::string &id) const;
  void WriteIndex() const;  // caller holds index_mutex_
  std::mutex &MutexOf(const std::string &id);

  std::string directory_;
  AnnotationSchema schema_;
  mutable std::mutex index_mutex_;
  std::map<std::string, long> versions_;
  std::mutex doc_mutexes_guard_;
  std::map<std::string, std::unique_ptr<std::mutex>> doc_mutexes_;
};

}  // namespace genic

#endif  // GENIC_ANNOTATIONS_H_
