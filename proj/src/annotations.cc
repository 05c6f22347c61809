#include "genic/annotations.h"

#include <algorithm>
#include <filesystem>
#include <set>

namespace genic {

namespace fs = std::filesystem;

const char *SpanRoleName(SpanRole role) {
  switch (role) {
    case SpanRole::kAgent: return "agent";
    case SpanRole::kTarget: return "target";
    case SpanRole::kInteraction: return "interaction";
    case SpanRole::kConfidence: return "confidence";
  }
  return "interaction";
}

SpanRole ParseSpanRole(std::string_view name) {
  if (name == "agent") return SpanRole::kAgent;
  if (name == "target") return SpanRole::kTarget;
  if (name == "interaction") return SpanRole::kInteraction;
  if (name == "confidence") return SpanRole::kConfidence;
  throw Error("unknown span role \"" + std::string(name) + "\"");
}

// ---------------------------------------------------------------------------
// Schema

namespace {

AttributeSpec ParseAttributeSpec(const nlohmann::json &json) {
  AttributeSpec spec;
  spec.name = json.at("name").get<std::string>();
  spec.required = json.value("required", false);
  if (json.contains("values")) {
    spec.values = json.at("values").get<std::vector<std::string>>();
  }
  if (spec.name.empty() || spec.name == "id") {
    throw Error("invalid attribute name \"" + spec.name + "\" in schema");
  }
  return spec;
}

}  // namespace

AnnotationSchema AnnotationSchema::Parse(const nlohmann::json &json) {
  AnnotationSchema schema;
  try {
    schema.frame_tag = json.value("frame_tag", schema.frame_tag);
    for (const auto &a : json.at("frame_attributes")) {
      schema.frame_attributes.push_back(ParseAttributeSpec(a));
    }
    std::set<SpanRole> seen;
    std::set<std::string> tags = {schema.frame_tag};
    for (const auto &r : json.at("roles")) {
      RoleSpec role;
      role.role = ParseSpanRole(r.at("role").get<std::string>());
      role.outer_tag = r.at("outer").get<std::string>();
      role.inner_tag = r.at("inner").get<std::string>();
      role.indexed = r.value("indexed", false);
      for (const auto &a : r.value("attributes", nlohmann::json::array())) {
        role.attributes.push_back(ParseAttributeSpec(a));
      }
      if (!seen.insert(role.role).second) {
        throw Error(std::string("role listed twice: ") +
                    SpanRoleName(role.role));
      }
      if (!tags.insert(role.outer_tag).second ||
          !tags.insert(role.inner_tag).second) {
        throw Error("tag used twice in schema");
      }
      schema.roles.push_back(std::move(role));
    }
    if (!seen.count(SpanRole::kInteraction)) {
      throw Error("schema lacks the interaction role");
    }
  } catch (const nlohmann::json::exception &e) {
    throw Error(std::string("malformed annotation schema: ") + e.what());
  }
  schema.raw = json;
  return schema;
}

AnnotationSchema AnnotationSchema::Load(const std::string &path) {
  try {
    return Parse(nlohmann::json::parse(text::ReadFile(path, "schema")));
  } catch (const nlohmann::json::exception &e) {
    throw Error("malformed annotation schema " + path + ": " + e.what());
  }
}

const RoleSpec &AnnotationSchema::role(SpanRole r) const {
  for (const RoleSpec &spec : roles) {
    if (spec.role == r) return spec;
  }
  throw Error(std::string("role not in schema: ") + SpanRoleName(r));
}

std::optional<AnnotationSchema::TagInfo> AnnotationSchema::Classify(
    std::string_view tag) const {
  for (const RoleSpec &spec : roles) {
    for (const bool outer : {true, false}) {
      const std::string &base = outer ? spec.outer_tag : spec.inner_tag;
      if (tag.substr(0, base.size()) != base) continue;
      const std::string_view rest = tag.substr(base.size());
      if (!spec.indexed) {
        if (rest.empty()) return TagInfo{spec.role, outer, 0};
        continue;
      }
      if (rest.empty() || rest.size() > 6 || rest[0] == '0' ||
          !std::all_of(rest.begin(), rest.end(),
                       [](char c) { return c >= '0' && c <= '9'; })) {
        continue;
      }
      return TagInfo{spec.role, outer, std::stoi(std::string(rest))};
    }
  }
  return std::nullopt;
}

std::string AnnotationSchema::TagName(SpanRole r, bool outer,
                                      int index) const {
  const RoleSpec &spec = role(r);
  std::string name = outer ? spec.outer_tag : spec.inner_tag;
  if (spec.indexed) name += std::to_string(index);
  return name;
}

std::optional<std::string> InteractionFrame::attribute(
    std::string_view name) const {
  const auto it = attributes.find(std::string(name));
  if (it == attributes.end()) return std::nullopt;
  return it->second;
}

// ---------------------------------------------------------------------------
// Validation

const std::vector<std::string> &ViolationCodes() {
  static const std::vector<std::string> codes = {
      "missing_attribute", "unknown_attribute", "vocabulary",
      "no_interaction",    "span_bounds",       "nesting",
      "outside_frame",     "overlap",           "bad_index",
      "duplicate_index",   "duplicate_frame_id", "frame_overlap",
      "unknown_sentence"};
  return codes;
}

AnnotationError::AnnotationError(const std::string &message,
                                 std::vector<Violation> violations)
    : Error(message), violations_(std::move(violations)) {}

namespace {

void CheckAttributes(const Attributes &attributes,
                     const std::vector<AttributeSpec> &specs,
                     const std::string &frame_id, const std::string &where,
                     std::vector<Violation> *out) {
  for (const AttributeSpec &spec : specs) {
    const auto it = attributes.find(spec.name);
    if (it == attributes.end()) {
      if (spec.required) {
        out->push_back({"missing_attribute", frame_id,
                        where + " lacks attribute " + spec.name});
      }
      continue;
    }
    if (!spec.values.empty() &&
        std::find(spec.values.begin(), spec.values.end(), it->second) ==
            spec.values.end()) {
      out->push_back({"vocabulary", frame_id,
                      where + ": " + spec.name + "=\"" + it->second +
                          "\" is not in the vocabulary"});
    }
  }
  for (const auto &[name, value] : attributes) {
    const bool known =
        std::any_of(specs.begin(), specs.end(),
                    [&](const AttributeSpec &s) { return s.name == name; });
    if (!known) {
      out->push_back({"unknown_attribute", frame_id,
                      where + " has unknown attribute " + name});
    }
  }
}

std::string RangeText(const Span &s) {
  return "[" + std::to_string(s.start) + ", " + std::to_string(s.end) + ")";
}

}  // namespace

std::vector<Violation> ValidateFrame(const InteractionFrame &frame,
                                     const AnnotationSchema &schema,
                                     std::optional<std::size_t> text_length) {
  std::vector<Violation> out;
  const std::string &id = frame.id;
  const std::string where = "frame " + id;
  if (id.empty()) {
    out.push_back({"missing_attribute", id, "frame lacks attribute id"});
  }
  CheckAttributes(frame.attributes, schema.frame_attributes, id, where, &out);

  auto bad_range = [&](const Span &s) {
    return s.empty() || (text_length && s.end > *text_length);
  };
  if (bad_range(frame.range)) {
    out.push_back({"span_bounds", id,
                   where + " range " + RangeText(frame.range) + " is invalid"});
  }

  bool has_interaction = false;
  std::set<std::pair<SpanRole, int>> indices;
  for (const AnnotationSpan &span : frame.spans) {
    has_interaction |= span.role == SpanRole::kInteraction;
    const RoleSpec *spec = nullptr;
    for (const RoleSpec &r : schema.roles) {
      if (r.role == span.role) spec = &r;
    }
    if (spec == nullptr) {
      out.push_back({"unknown_attribute", id,
                     std::string("role not in schema: ") +
                         SpanRoleName(span.role)});
      continue;
    }
    const std::string name =
        spec->outer_tag + (spec->indexed ? std::to_string(span.index) : "");
    const std::string inner_name =
        spec->inner_tag + (spec->indexed ? std::to_string(span.index) : "");
    if (spec->indexed ? span.index < 1 : span.index != 0) {
      out.push_back({"bad_index", id,
                     where + ": index " + std::to_string(span.index) +
                         " is not valid for " + SpanRoleName(span.role)});
    } else if (spec->indexed && !indices.insert({span.role, span.index}).second) {
      out.push_back({"duplicate_index", id,
                     where + ": " + name + " appears twice"});
    }
    if (bad_range(span.outer)) {
      out.push_back({"span_bounds", id,
                     name + " range " + RangeText(span.outer) + " is invalid"});
    }
    if (bad_range(span.inner)) {
      out.push_back({"span_bounds", id, inner_name + " range " +
                                            RangeText(span.inner) +
                                            " is invalid"});
    }
    if (!span.outer.contains(span.inner)) {
      out.push_back({"nesting", id,
                     inner_name + " " + RangeText(span.inner) +
                         " is not inside " + name + " " +
                         RangeText(span.outer)});
    }
    if (!frame.range.contains(span.outer)) {
      out.push_back({"outside_frame", id,
                     name + " " + RangeText(span.outer) +
                         " is not inside the frame " +
                         RangeText(frame.range)});
    }
    CheckAttributes(span.attributes, spec->attributes, id, inner_name, &out);
  }
  for (std::size_t i = 0; i < frame.spans.size(); ++i) {
    for (std::size_t j = i + 1; j < frame.spans.size(); ++j) {
      if (frame.spans[i].outer.overlaps(frame.spans[j].outer)) {
        out.push_back({"overlap", id,
                       where + ": spans " + RangeText(frame.spans[i].outer) +
                           " and " + RangeText(frame.spans[j].outer) +
                           " overlap"});
      }
    }
  }
  if (!has_interaction) {
    out.push_back({"no_interaction", id, where + " has no Interaction span"});
  }
  return out;
}

std::vector<Violation> ValidateFrames(
    const std::vector<InteractionFrame> &frames,
    const std::vector<std::string> &sentence_texts,
    const AnnotationSchema &schema) {
  std::vector<Violation> out;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const InteractionFrame &f = frames[i];
    std::optional<std::size_t> length;
    if (f.sentence_ref.index >= sentence_texts.size()) {
      out.push_back({"unknown_sentence", f.id,
                     "frame " + f.id + " refers to sentence " +
                         std::to_string(f.sentence_ref.index)});
    } else {
      length = text::Length(sentence_texts[f.sentence_ref.index]);
    }
    const auto v = ValidateFrame(f, schema, length);
    out.insert(out.end(), v.begin(), v.end());
    if (!f.id.empty() && !ids.insert(f.id).second) {
      out.push_back({"duplicate_frame_id", f.id,
                     "frame id " + f.id + " is used twice"});
    }
    for (std::size_t j = 0; j < i; ++j) {
      const InteractionFrame &g = frames[j];
      if (g.sentence_ref.index == f.sentence_ref.index &&
          g.range.overlaps(f.range)) {
        out.push_back({"frame_overlap", f.id,
                       "frames " + g.id + " and " + f.id + " overlap"});
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// XML reading

namespace {

struct XmlEvent {
  enum Kind { kStart, kEnd, kEmpty, kText } kind = kText;
  std::string name;
  Attributes attributes;
  std::string text;  // decoded character data
};

bool IsXmlSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r';
}

bool IsNameChar(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9') || c == '-' || c == '_' || c == ':' ||
         c == '.' || static_cast<unsigned char>(c) >= 0x80;
}

std::string DecodeEntities(std::string_view raw) {
  std::string out;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] != '&') {
      out.push_back(raw[i]);
      continue;
    }
    const std::size_t semi = raw.find(';', i);
    if (semi == std::string_view::npos) throw AnnotationError("unterminated entity");
    const std::string_view name = raw.substr(i + 1, semi - i - 1);
    if (name == "amp") out += '&';
    else if (name == "lt") out += '<';
    else if (name == "gt") out += '>';
    else if (name == "quot") out += '"';
    else if (name == "apos") out += '\'';
    else if (name.size() > 1 && name[0] == '#') {
      long code = 0;
      try {
        code = name[1] == 'x' || name[1] == 'X'
                   ? std::stol(std::string(name.substr(2)), nullptr, 16)
                   : std::stol(std::string(name.substr(1)));
      } catch (const std::exception &) {
        throw AnnotationError("bad character reference &" + std::string(name) +
                              ";");
      }
      if (code <= 0 || code > 0x10FFFF || (code >= 0xD800 && code <= 0xDFFF)) {
        throw AnnotationError("bad character reference &" + std::string(name) +
                              ";");
      }
      text::AppendUtf8(static_cast<char32_t>(code), &out);
    } else {
      throw AnnotationError("unknown entity &" + std::string(name) + ";");
    }
    i = semi;
  }
  return out;
}

std::vector<XmlEvent> ReadEvents(std::string_view xml) {
  if (!text::IsValidUtf8(xml)) throw AnnotationError("XML is not valid UTF-8");
  std::vector<XmlEvent> events;
  std::size_t i = 0;
  auto fail = [&](const std::string &what) {
    throw AnnotationError("malformed XML at byte " + std::to_string(i) + ": " +
                          what);
  };
  while (i < xml.size()) {
    if (xml[i] != '<') {
      const std::size_t next = std::min(xml.find('<', i), xml.size());
      XmlEvent e;
      e.text = DecodeEntities(xml.substr(i, next - i));
      events.push_back(std::move(e));
      i = next;
      continue;
    }
    if (xml.substr(i, 4) == "<!--") {
      const std::size_t end = xml.find("-->", i + 4);
      if (end == std::string_view::npos) fail("unterminated comment");
      i = end + 3;
      continue;
    }
    if (xml.substr(i, 9) == "<![CDATA[") {
      const std::size_t end = xml.find("]]>", i + 9);
      if (end == std::string_view::npos) fail("unterminated CDATA");
      XmlEvent e;
      e.text = std::string(xml.substr(i + 9, end - i - 9));
      events.push_back(std::move(e));
      i = end + 3;
      continue;
    }
    if (xml.substr(i, 2) == "<?" || xml.substr(i, 2) == "<!") {
      const std::size_t end = xml.find('>', i);
      if (end == std::string_view::npos) fail("unterminated declaration");
      i = end + 1;
      continue;
    }
    XmlEvent e;
    std::size_t p = i + 1;
    if (p < xml.size() && xml[p] == '/') {
      e.kind = XmlEvent::kEnd;
      ++p;
    } else {
      e.kind = XmlEvent::kStart;
    }
    const std::size_t name_start = p;
    while (p < xml.size() && IsNameChar(xml[p])) ++p;
    e.name = std::string(xml.substr(name_start, p - name_start));
    if (e.name.empty()) fail("missing tag name");
    while (true) {
      while (p < xml.size() && IsXmlSpace(xml[p])) ++p;
      if (p >= xml.size()) fail("unterminated tag <" + e.name);
      if (xml[p] == '>') {
        ++p;
        break;
      }
      if (xml[p] == '/' && p + 1 < xml.size() && xml[p + 1] == '>' &&
          e.kind == XmlEvent::kStart) {
        e.kind = XmlEvent::kEmpty;
        p += 2;
        break;
      }
      if (e.kind == XmlEvent::kEnd) fail("attributes on end tag </" + e.name);
      const std::size_t a = p;
      while (p < xml.size() && IsNameChar(xml[p])) ++p;
      const std::string attr(xml.substr(a, p - a));
      if (attr.empty()) fail("bad attribute in <" + e.name);
      while (p < xml.size() && IsXmlSpace(xml[p])) ++p;
      if (p >= xml.size() || xml[p] != '=') {
        fail("attribute " + attr + " has no value");
      }
      ++p;
      while (p < xml.size() && IsXmlSpace(xml[p])) ++p;
      std::string value;
      if (p < xml.size() && (xml[p] == '"' || xml[p] == '\'')) {
        const char q = xml[p];
        const std::size_t end = xml.find(q, p + 1);
        if (end == std::string_view::npos) fail("unterminated attribute value");
        value = DecodeEntities(xml.substr(p + 1, end - p - 1));
        p = end + 1;
      } else {
        const std::size_t v = p;
        while (p < xml.size() && !IsXmlSpace(xml[p]) && xml[p] != '>' &&
               !(xml[p] == '/' && p + 1 < xml.size() && xml[p + 1] == '>')) {
          if (xml[p] == '<' || xml[p] == '"' || xml[p] == '\'') {
            fail("bad unquoted attribute value");
          }
          ++p;
        }
        if (p == v) fail("empty unquoted attribute value");
        value = DecodeEntities(xml.substr(v, p - v));
      }
      if (!e.attributes.emplace(attr, value).second) {
        fail("duplicate attribute " + attr);
      }
    }
    events.push_back(std::move(e));
    i = p;
  }
  return events;
}

// Collapses whitespace while tracking element offsets.
class TextBuilder {
 public:
  void Append(std::string_view utf8) {
    for (const char32_t c : text::Decode(utf8)) {
      if (c == U' ' || c == U'\t' || c == U'\n' || c == U'\r') {
        pending_ = !out_.empty();
        continue;
      }
      if (pending_) out_.push_back(U' ');
      pending_ = false;
      out_.push_back(c);
    }
  }
  std::size_t OpenOffset() const { return out_.size() + (pending_ ? 1 : 0); }
  std::size_t CloseOffset() const { return out_.size(); }
  std::string text() const { return text::Encode(out_); }

 private:
  std::u32string out_;
  bool pending_ = false;
};

Span Closed(std::size_t start, std::size_t end) {
  return {std::min(start, end), end};
}

// Builds the annotated text from events [begin, end).
AnnotatedText BuildAnnotatedText(const std::vector<XmlEvent> &events,
                                 std::size_t begin, std::size_t end,
                                 const AnnotationSchema &schema,
                                 const SentenceRef &ref) {
  AnnotatedText result;
  TextBuilder builder;
  struct Open {
    enum Kind { kOpaque, kFrame, kOuter, kInner } kind;
    std::string name;
    std::size_t start;
    std::size_t slot;  // index into opaque, or span index in current frame
  };
  std::vector<Open> stack;
  std::optional<InteractionFrame> frame;
  std::vector<bool> has_inner;
  int opaque_depth = 0;

  auto open_frame = [&](const XmlEvent &e) {
    if (frame) throw AnnotationError("nested " + schema.frame_tag);
    frame.emplace();
    frame->sentence_ref = ref;
    frame->attributes = e.attributes;
    const auto id = frame->attributes.find("id");
    if (id != frame->attributes.end()) {
      frame->id = id->second;
      frame->attributes.erase(id);
    }
    frame->range.start = builder.OpenOffset();
    has_inner.clear();
  };
  auto close_frame = [&]() {
    frame->range = Closed(frame->range.start, builder.CloseOffset());
    for (std::size_t k = 0; k < has_inner.size(); ++k) {
      if (!has_inner[k]) {
        const AnnotationSpan &s = frame->spans[k];
        throw AnnotationError(schema.TagName(s.role, true, s.index) +
                              " has no " +
                              schema.TagName(s.role, false, s.index));
      }
    }
    result.frames.push_back(std::move(*frame));
    frame.reset();
  };

  for (std::size_t k = begin; k < end; ++k) {
    const XmlEvent &e = events[k];
    if (e.kind == XmlEvent::kText) {
      builder.Append(e.text);
      continue;
    }
    if (e.kind == XmlEvent::kEnd) {
      if (stack.empty() || stack.back().name != e.name) {
        throw AnnotationError("malformed XML: unexpected </" + e.name + ">");
      }
      const Open top = stack.back();
      stack.pop_back();
      const std::size_t close = builder.CloseOffset();
      switch (top.kind) {
        case Open::kOpaque:
          result.opaque[top.slot].range = Closed(top.start, close);
          --opaque_depth;
          break;
        case Open::kFrame:
          close_frame();
          break;
        case Open::kOuter:
          frame->spans[top.slot].outer = Closed(top.start, close);
          break;
        case Open::kInner:
          frame->spans[top.slot].inner = Closed(top.start, close);
          break;
      }
      continue;
    }
    const bool empty = e.kind == XmlEvent::kEmpty;
    const std::size_t start = builder.OpenOffset();
    if (e.name == schema.frame_tag) {
      open_frame(e);
      if (empty) {
        frame->range = {builder.CloseOffset(), builder.CloseOffset()};
        close_frame();
      } else {
        stack.push_back({Open::kFrame, e.name, start, 0});
      }
      continue;
    }
    const auto info = schema.Classify(e.name);
    if (!frame) {
      if (info) {
        throw AnnotationError("<" + e.name + "> outside " + schema.frame_tag);
      }
      result.opaque.push_back({e.name, e.attributes, {start, start},
                               opaque_depth});
      if (empty) {
        result.opaque.back().range = Closed(start, builder.CloseOffset());
      } else {
        stack.push_back({Open::kOpaque, e.name, start,
                         result.opaque.size() - 1});
        ++opaque_depth;
      }
      continue;
    }
    if (!info) {
      throw AnnotationError("unknown tag <" + e.name + "> inside " +
                            schema.frame_tag);
    }
    if (info->outer) {
      if (stack.empty() || stack.back().kind != Open::kFrame) {
        throw AnnotationError("<" + e.name + "> must be directly inside " +
                              schema.frame_tag);
      }
      if (!e.attributes.empty()) {
        throw AnnotationError("<" + e.name + "> takes no attributes");
      }
      if (empty) {
        throw AnnotationError(e.name + " has no " +
                              schema.TagName(info->role, false, info->index));
      }
      AnnotationSpan span;
      span.role = info->role;
      span.index = info->index;
      span.outer.start = start;
      frame->spans.push_back(span);
      has_inner.push_back(false);
      stack.push_back({Open::kOuter, e.name, start, frame->spans.size() - 1});
      continue;
    }
    const std::string outer_name =
        schema.TagName(info->role, true, info->index);
    if (stack.empty() || stack.back().kind != Open::kOuter ||
        stack.back().name != outer_name) {
      throw AnnotationError("<" + e.name + "> outside its frame tag <" +
                            outer_name + ">");
    }
    const std::size_t slot = stack.back().slot;
    if (has_inner[slot]) {
      throw AnnotationError(outer_name + " holds more than one <" + e.name +
                            ">");
    }
    has_inner[slot] = true;
    frame->spans[slot].attributes = e.attributes;
    if (empty) {
      frame->spans[slot].inner = {builder.CloseOffset(), builder.CloseOffset()};
    } else {
      frame->spans[slot].inner.start = start;
      stack.push_back({Open::kInner, e.name, start, slot});
    }
  }
  if (!stack.empty()) {
    throw AnnotationError("malformed XML: <" + stack.back().name +
                          "> is not closed");
  }
  result.text = builder.text();
  return result;
}

void ThrowIfInvalid(const std::vector<Violation> &violations) {
  if (violations.empty()) return;
  std::vector<std::string> messages;
  for (const Violation &v : violations) messages.push_back(v.message);
  throw AnnotationError("invalid annotation: " + text::Join(messages, "; "),
                        violations);
}

// ---------------------------------------------------------------------------
// XML writing

std::string EscapeText(std::string_view s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string EscapeAttribute(std::string_view s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string AttributeText(const std::string &name, const std::string &value) {
  return " " + name + "=\"" + EscapeAttribute(value) + "\"";
}

// Attributes in schema order, then any others by name.
std::string OrderedAttributes(const Attributes &attributes,
                              const std::vector<AttributeSpec> &specs) {
  std::string out;
  std::set<std::string> done;
  for (const AttributeSpec &spec : specs) {
    const auto it = attributes.find(spec.name);
    if (it == attributes.end()) continue;
    out += AttributeText(it->first, it->second);
    done.insert(it->first);
  }
  for (const auto &[name, value] : attributes) {
    if (!done.count(name)) out += AttributeText(name, value);
  }
  return out;
}

struct Element {
  Span range;
  int rank = 0;
  std::size_t order = 0;
  std::string name;
  std::string attributes;
};

std::string Emit(std::string_view text_utf8, std::vector<Element> elements) {
  const std::u32string chars = text::Decode(text_utf8);
  for (std::size_t i = 0; i < elements.size(); ++i) elements[i].order = i;
  std::sort(elements.begin(), elements.end(),
            [](const Element &a, const Element &b) {
              if (a.range.start != b.range.start) {
                return a.range.start < b.range.start;
              }
              if (a.range.end != b.range.end) return a.range.end > b.range.end;
              if (a.rank != b.rank) return a.rank < b.rank;
              return a.order < b.order;
            });
  std::string out;
  std::vector<const Element *> stack;
  std::size_t next = 0;
  for (std::size_t pos = 0; pos <= chars.size(); ++pos) {
    while (!stack.empty() && stack.back()->range.end == pos) {
      out += "</" + stack.back()->name + ">";
      stack.pop_back();
    }
    while (next < elements.size() && elements[next].range.start == pos) {
      const Element &e = elements[next++];
      if (e.range.end > chars.size() ||
          (!stack.empty() && stack.back()->range.end < e.range.end)) {
        throw AnnotationError("element <" + e.name + "> " +
                              RangeText(e.range) + " crosses another element");
      }
      if (e.range.empty()) {
        out += "<" + e.name + e.attributes + "/>";
      } else {
        out += "<" + e.name + e.attributes + ">";
        stack.push_back(&e);
      }
    }
    if (pos < chars.size()) {
      std::string c;
      text::AppendUtf8(chars[pos], &c);
      out += EscapeText(c);
    }
  }
  if (next < elements.size()) {
    throw AnnotationError("element <" + elements[next].name +
                          "> lies beyond the text");
  }
  return out;
}

std::string CollapseWhitespace(std::string_view s) {
  TextBuilder b;
  b.Append(s);
  return b.text();
}

}  // namespace

AnnotatedText ParseAnnotationXml(std::string_view xml,
                                 const AnnotationSchema &schema) {
  const auto events = ReadEvents(xml);
  AnnotatedText result =
      BuildAnnotatedText(events, 0, events.size(), schema, {});
  ThrowIfInvalid(ValidateFrames(result.frames, {result.text}, schema));
  return result;
}

std::string SerializeAnnotationXml(const std::vector<InteractionFrame> &frames,
                                   std::string_view text,
                                   const AnnotationSchema &schema,
                                   const std::vector<OpaqueElement> &opaque) {
  std::vector<InteractionFrame> local = frames;
  for (InteractionFrame &f : local) f.sentence_ref.index = 0;
  ThrowIfInvalid(ValidateFrames(local, {std::string(text)}, schema));
  std::vector<Element> elements;
  for (const OpaqueElement &o : opaque) {
    std::string attrs;
    for (const auto &[name, value] : o.attributes) {
      attrs += AttributeText(name, value);
    }
    elements.push_back({o.range, o.depth, 0, o.name, attrs});
  }
  constexpr int kFrameRank = 1 << 20;
  for (const InteractionFrame &f : frames) {
    elements.push_back(
        {f.range, kFrameRank, 0, schema.frame_tag,
         AttributeText("id", f.id) +
             OrderedAttributes(f.attributes, schema.frame_attributes)});
    for (const AnnotationSpan &s : f.spans) {
      elements.push_back(
          {s.outer, kFrameRank + 1, 0, schema.TagName(s.role, true, s.index),
           ""});
      elements.push_back(
          {s.inner, kFrameRank + 2, 0, schema.TagName(s.role, false, s.index),
           OrderedAttributes(s.attributes, schema.role(s.role).attributes)});
    }
  }
  return Emit(text, std::move(elements));
}

// ---------------------------------------------------------------------------
// JSON

namespace {

nlohmann::json SpanToJson(const Span &s) { return {s.start, s.end}; }

Span SpanFromJson(const nlohmann::json &j) {
  if (!j.is_array() || j.size() != 2) {
    throw Error("a range must be a [start, end] pair");
  }
  return {j.at(0).get<std::size_t>(), j.at(1).get<std::size_t>()};
}

}  // namespace

nlohmann::json FrameToJson(const InteractionFrame &frame) {
  nlohmann::json spans = nlohmann::json::array();
  for (const AnnotationSpan &s : frame.spans) {
    spans.push_back({{"role", SpanRoleName(s.role)},
                     {"index", s.index},
                     {"outer", SpanToJson(s.outer)},
                     {"inner", SpanToJson(s.inner)},
                     {"attributes", s.attributes}});
  }
  return {{"id", frame.id},
          {"sentence", frame.sentence_ref.index},
          {"range", SpanToJson(frame.range)},
          {"attributes", frame.attributes},
          {"spans", spans}};
}

InteractionFrame FrameFromJson(const nlohmann::json &json) {
  InteractionFrame f;
  try {
    f.id = json.at("id").get<std::string>();
    f.sentence_ref.index = json.value("sentence", std::size_t{0});
    f.range = SpanFromJson(json.at("range"));
    f.attributes = json.value("attributes", Attributes{});
    for (const auto &s : json.value("spans", nlohmann::json::array())) {
      AnnotationSpan span;
      span.role = ParseSpanRole(s.at("role").get<std::string>());
      span.index = s.value("index", 0);
      span.outer = SpanFromJson(s.at("outer"));
      span.inner = SpanFromJson(s.at("inner"));
      span.attributes = s.value("attributes", Attributes{});
      f.spans.push_back(std::move(span));
    }
  } catch (const nlohmann::json::exception &e) {
    throw Error(std::string("malformed frame: ") + e.what());
  }
  return f;
}

nlohmann::json ViolationToJson(const Violation &v) {
  return {{"code", v.code}, {"frame", v.frame_id}, {"message", v.message}};
}

nlohmann::json DocumentToJson(const AnnotatedDocument &document) {
  nlohmann::json sentences = nlohmann::json::array();
  for (std::size_t i = 0; i < document.sentences.size(); ++i) {
    sentences.push_back({{"index", i}, {"text", document.sentences[i]}});
  }
  nlohmann::json frames = nlohmann::json::array();
  for (const InteractionFrame &f : document.frames) {
    frames.push_back(FrameToJson(f));
  }
  return {{"id", document.id},
          {"title", document.title},
          {"version", document.version},
          {"sentences", sentences},
          {"frames", frames}};
}

// ---------------------------------------------------------------------------
// Documents

std::string SerializeDocumentXml(const AnnotatedDocument &document,
                                 const AnnotationSchema &schema) {
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<DOCUMENT" +
                    AttributeText("id", document.id) +
                    AttributeText("title", document.title) +
                    AttributeText("version", std::to_string(document.version)) +
                    ">\n";
  ThrowIfInvalid(ValidateFrames(document.frames, document.sentences, schema));
  for (std::size_t i = 0; i < document.sentences.size(); ++i) {
    std::vector<InteractionFrame> frames;
    for (const InteractionFrame &f : document.frames) {
      if (f.sentence_ref.index == i) frames.push_back(f);
    }
    out += "<SENTENCE index=\"" + std::to_string(i) + "\">" +
           SerializeAnnotationXml(frames, document.sentences[i], schema) +
           "</SENTENCE>\n";
  }
  out += "</DOCUMENT>\n";
  return out;
}

AnnotatedDocument ParseDocumentXml(std::string_view xml,
                                   const AnnotationSchema &schema) {
  const auto events = ReadEvents(xml);
  std::size_t k = 0;
  auto skip_space = [&]() {
    while (k < events.size() && events[k].kind == XmlEvent::kText &&
           text::Trim(events[k].text).empty()) {
      ++k;
    }
  };
  skip_space();
  if (k >= events.size() || events[k].kind != XmlEvent::kStart ||
      events[k].name != "DOCUMENT") {
    throw AnnotationError("expected <DOCUMENT>");
  }
  AnnotatedDocument doc;
  const Attributes &attrs = events[k].attributes;
  auto attr = [&](const char *name) -> std::string {
    const auto it = attrs.find(name);
    if (it == attrs.end()) {
      throw AnnotationError(std::string("<DOCUMENT> lacks ") + name);
    }
    return it->second;
  };
  doc.id = attr("id");
  doc.title = attrs.count("title") ? attrs.at("title") : "";
  try {
    doc.version = std::stol(attr("version"));
  } catch (const std::invalid_argument &) {
    throw AnnotationError("bad document version");
  }
  ++k;
  while (true) {
    skip_space();
    if (k >= events.size()) throw AnnotationError("<DOCUMENT> is not closed");
    if (events[k].kind == XmlEvent::kEnd && events[k].name == "DOCUMENT") break;
    if (events[k].kind == XmlEvent::kEmpty && events[k].name == "SENTENCE") {
      doc.sentences.emplace_back();
      ++k;
      continue;
    }
    if (events[k].kind != XmlEvent::kStart || events[k].name != "SENTENCE") {
      throw AnnotationError("expected <SENTENCE> inside <DOCUMENT>");
    }
    const std::size_t begin = ++k;
    int depth = 0;
    while (k < events.size() &&
           !(depth == 0 && events[k].kind == XmlEvent::kEnd &&
             events[k].name == "SENTENCE")) {
      if (events[k].kind == XmlEvent::kStart) ++depth;
      if (events[k].kind == XmlEvent::kEnd) --depth;
      ++k;
    }
    if (k >= events.size()) throw AnnotationError("<SENTENCE> is not closed");
    const SentenceRef ref{doc.id, doc.sentences.size()};
    AnnotatedText sentence = BuildAnnotatedText(events, begin, k, schema, ref);
    doc.sentences.push_back(sentence.text);
    for (InteractionFrame &f : sentence.frames) {
      doc.frames.push_back(std::move(f));
    }
    ++k;
  }
  ++k;
  skip_space();
  if (k != events.size()) throw AnnotationError("content after </DOCUMENT>");
  ThrowIfInvalid(ValidateFrames(doc.frames, doc.sentences, schema));
  return doc;
}

// ---------------------------------------------------------------------------
// Store

bool AnnotationStore::IsValidId(std::string_view id) {
  if (id.empty() || id.size() > 200 || id[0] == '.') return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
           (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.';
  });
}

AnnotationStore::AnnotationStore(std::string directory,
                                 AnnotationSchema schema)
    : directory_(std::move(directory)), schema_(std::move(schema)) {
  std::error_code ec;
  fs::create_directories(directory_, ec);
  if (!fs::is_directory(directory_)) {
    throw Error("store directory unavailable: " + directory_);
  }
  std::vector<fs::path> files;
  for (const auto &entry : fs::directory_iterator(directory_)) {
    if (entry.is_regular_file() && entry.path().extension() == ".xml") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  for (const fs::path &path : files) {
    const std::string id = path.stem().string();
    if (!IsValidId(id)) continue;
    AnnotatedDocument doc;
    try {
      doc = ParseDocumentXml(text::ReadFile(path.string(), "document"),
                             schema_);
    } catch (const Error &e) {
      throw Error("corrupt store document " + path.string() + ": " + e.what());
    }
    if (doc.id != id) {
      throw Error("store document " + path.string() + " has id " + doc.id);
    }
    versions_[id] = doc.version;
  }
  std::lock_guard<std::mutex> lock(index_mutex_);
  WriteIndex();
}

std::string AnnotationStore::PathOf(const std::string &id) const {
  return (fs::path(directory_) / (id + ".xml")).string();
}

void AnnotationStore::WriteIndex() const {
  nlohmann::json docs = nlohmann::json::array();
  for (const auto &[id, version] : versions_) {
    docs.push_back({{"id", id}, {"version", version}});
  }
  text::WriteFileAtomic((fs::path(directory_) / "index.json").string(),
                        nlohmann::json{{"documents", docs}}.dump(2) + "\n");
}

std::mutex &AnnotationStore::MutexOf(const std::string &id) {
  std::lock_guard<std::mutex> lock(doc_mutexes_guard_);
  auto &m = doc_mutexes_[id];
  if (!m) m = std::make_unique<std::mutex>();
  return *m;
}

std::vector<AnnotationStore::Entry> AnnotationStore::List() const {
  std::lock_guard<std::mutex> lock(index_mutex_);
  std::vector<Entry> out;
  for (const auto &[id, version] : versions_) out.push_back({id, version});
  return out;
}

std::optional<AnnotatedDocument> AnnotationStore::Get(
    const std::string &id) const {
  {
    std::lock_guard<std::mutex> lock(index_mutex_);
    if (!versions_.count(id)) return std::nullopt;
  }
  return ParseDocumentXml(text::ReadFile(PathOf(id), "document"), schema_);
}

bool AnnotationStore::Add(const Document &document) {
  if (!IsValidId(document.id)) {
    throw Error("document id not usable as a file name: " + document.id);
  }
  std::lock_guard<std::mutex> doc_lock(MutexOf(document.id));
  {
    std::lock_guard<std::mutex> lock(index_mutex_);
    if (versions_.count(document.id)) return false;
  }
  AnnotatedDocument doc;
  doc.id = document.id;
  doc.title = CollapseWhitespace(document.title);
  for (const Sentence &s : document.sentences) {
    doc.sentences.push_back(CollapseWhitespace(s.text));
  }
  text::WriteFileAtomic(PathOf(doc.id), SerializeDocumentXml(doc, schema_));
  std::lock_guard<std::mutex> lock(index_mutex_);
  versions_[doc.id] = 0;
  WriteIndex();
  return true;
}

AnnotationStore::SaveResult AnnotationStore::Save(
    const std::string &id, const std::vector<InteractionFrame> &frames,
    long expected_version) {
  SaveResult result;
  std::lock_guard<std::mutex> doc_lock(MutexOf(id));
  std::optional<AnnotatedDocument> current = Get(id);
  if (!current) {
    result.status = SaveStatus::kNotFound;
    return result;
  }
  if (current->version != expected_version) {
    result.status = SaveStatus::kVersionConflict;
    result.version = current->version;
    return result;
  }
  AnnotatedDocument next = *current;
  next.frames = frames;
  for (InteractionFrame &f : next.frames) f.sentence_ref.doc_id = id;
  result.violations = ValidateFrames(next.frames, next.sentences, schema_);
  if (!result.violations.empty()) {
    result.status = SaveStatus::kInvalid;
    result.version = current->version;
    return result;
  }
  next.version = current->version + 1;
  std::string xml;
  try {
    xml = SerializeDocumentXml(next, schema_);
  } catch (const AnnotationError &e) {
    result.status = SaveStatus::kInvalid;
    result.version = current->version;
    result.violations = e.violations();
    if (result.violations.empty()) {
      result.violations.push_back({"overlap", "", e.what()});
    }
    return result;
  }
  text::WriteFileAtomic(PathOf(id), xml);
  std::lock_guard<std::mutex> lock(index_mutex_);
  versions_[id] = next.version;
  WriteIndex();
  result.version = next.version;
  return result;
}

}  // namespace genic
