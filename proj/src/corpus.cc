#include "genic/corpus.h"

#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <unicode/uchar.h>

namespace genic {

const char *TokenKindName(TokenKind kind) {
  switch (kind) {
    case TokenKind::kWord: return "word";
    case TokenKind::kNumber: return "number";
    case TokenKind::kPunctuation: return "punctuation";
    case TokenKind::kSymbol: return "symbol";
  }
  return "word";
}

AbbreviationLexicon::AbbreviationLexicon(std::set<std::string> entries)
    : entries_(std::move(entries)) {}

AbbreviationLexicon AbbreviationLexicon::Default() {
  return AbbreviationLexicon({
      "e.g.", "i.e.", "et al.", "al.", "etc.", "vs.", "cf.", "fig.",
      "figs.", "ref.", "refs.", "approx.", "ca.", "no.", "nos.", "vol.",
      "pp.", "sp.", "spp.", "subsp.", "var.", "str.", "dr.", "prof.",
      "mr.", "mrs.", "ms.", "st.", "resp.", "min.", "max.", "eq.",
      "pers.", "comm.", "viz.", "incl.", "suppl.", "table.", "mol.",
      "wt.", "conc."});
}

AbbreviationLexicon AbbreviationLexicon::Load(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open abbreviation file: " + path);
  std::set<std::string> entries;
  std::string line;
  while (std::getline(in, line)) {
    const std::string entry = text::Trim(line);
    if (entry.empty() || entry[0] == '#') continue;
    entries.insert(text::ToLower(entry));
  }
  return AbbreviationLexicon(std::move(entries));
}

bool AbbreviationLexicon::Contains(std::string_view word_with_period) const {
  return entries_.count(text::ToLower(word_with_period)) > 0;
}

namespace {

bool IsTerminator(char32_t c) { return c == U'.' || c == U'!' || c == U'?'; }

bool IsClosing(char32_t c) {
  return c == U')' || c == U']' || c == U'"' || c == U'\'' || c == U'”' ||
         c == U'’';
}

bool IsOpening(char32_t c) {
  return c == U'(' || c == U'[' || c == U'"' || c == U'“';
}

// The whitespace-delimited word that ends at `period` (inclusive), with
// leading brackets and quotes removed.
std::u32string WordEndingAt(const std::u32string &chars, std::size_t period) {
  std::size_t begin = period;
  while (begin > 0 && !text::IsSpace(chars[begin - 1])) --begin;
  while (begin < period && IsOpening(chars[begin])) ++begin;
  return chars.substr(begin, period - begin + 1);
}

bool IsProtectedPeriod(const std::u32string &chars, std::size_t period,
                       const AbbreviationLexicon &abbreviations) {
  const std::u32string word = WordEndingAt(chars, period);
  // Single capital + period, as in genus abbreviations ("B. subtilis").
  if (word.size() == 2 && text::IsUpper(word[0])) return true;
  if (abbreviations.Contains(text::Encode(word))) return true;
  // Multiword entries such as "et al."
  std::size_t begin = period - (word.size() - 1);
  if (begin >= 2) {
    std::size_t prev_end = begin - 1;
    while (prev_end > 0 && text::IsSpace(chars[prev_end])) --prev_end;
    std::size_t prev_begin = prev_end;
    while (prev_begin > 0 && !text::IsSpace(chars[prev_begin - 1])) {
      --prev_begin;
    }
    const std::u32string pair =
        chars.substr(prev_begin, prev_end - prev_begin + 1) + U" " + word;
    if (abbreviations.Contains(text::Encode(pair))) return true;
  }
  return false;
}

Span TrimSpan(const std::u32string &chars, Span span) {
  while (span.start < span.end && text::IsSpace(chars[span.start])) {
    ++span.start;
  }
  while (span.end > span.start && text::IsSpace(chars[span.end - 1])) {
    --span.end;
  }
  return span;
}

bool IsPunctuationChar(char32_t c) {
  switch (c) {
    case U'/': case U'%': case U'#': case U'&': case U'*': case U'@':
    case U'\\':
      return false;
    default:
      break;
  }
  return u_ispunct(static_cast<UChar32>(c));
}

bool IsWordChar(char32_t c) { return text::IsAlnum(c); }

}  // namespace

std::vector<Span> SegmentSentences(std::string_view utf8,
                                   const AbbreviationLexicon &abbreviations) {
  const std::u32string chars = text::Decode(utf8);
  std::vector<Span> spans;
  std::size_t start = 0;
  for (std::size_t i = 0; i < chars.size(); ++i) {
    if (!IsTerminator(chars[i])) continue;
    std::size_t end = i + 1;
    while (end < chars.size() && (IsClosing(chars[end]) ||
                                  IsTerminator(chars[end]))) {
      ++end;
    }
    std::size_t next = end;
    while (next < chars.size() && text::IsSpace(chars[next])) ++next;
    if (next == end || next >= chars.size()) continue;
    std::size_t first = next;
    while (first < chars.size() && IsOpening(chars[first])) ++first;
    if (first >= chars.size()) continue;
    if (!text::IsUpper(chars[first]) && !text::IsDigit(chars[first])) {
      continue;
    }
    if (chars[i] == U'.' && IsProtectedPeriod(chars, i, abbreviations)) {
      continue;
    }
    const Span span = TrimSpan(chars, {start, end});
    if (!span.empty()) spans.push_back(span);
    start = end;
    i = end - 1;
  }
  const Span tail = TrimSpan(chars, {start, chars.size()});
  if (!tail.empty()) spans.push_back(tail);
  return spans;
}

std::vector<Token> Tokenize(std::string_view sentence_text) {
  const std::u32string chars = text::Decode(sentence_text);
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < chars.size()) {
    const char32_t c = chars[i];
    if (text::IsSpace(c)) {
      ++i;
      continue;
    }
    const std::size_t begin = i;
    TokenKind kind;
    if (IsWordChar(c)) {
      bool all_digits = true;
      while (i < chars.size()) {
        if (IsWordChar(chars[i])) {
          if (!text::IsDigit(chars[i])) all_digits = false;
          ++i;
          continue;
        }
        // Internal hyphens, apostrophes and decimal points stay inside.
        const bool joiner = chars[i] == U'-' || chars[i] == U'\'' ||
                            (chars[i] == U'.' && all_digits);
        if (joiner && i + 1 < chars.size() && IsWordChar(chars[i + 1]) &&
            (chars[i] != U'.' || text::IsDigit(chars[i + 1]))) {
          ++i;
          continue;
        }
        break;
      }
      kind = all_digits ? TokenKind::kNumber : TokenKind::kWord;
    } else {
      ++i;
      kind = IsPunctuationChar(c) ? TokenKind::kPunctuation
                                  : TokenKind::kSymbol;
    }
    Token token;
    token.text = text::Encode(chars.substr(begin, i - begin));
    token.span = {begin, i};
    token.kind = kind;
    tokens.push_back(std::move(token));
  }
  return tokens;
}

Document BuildDocument(std::string id, std::string title,
                       std::string_view abstract_text,
                       const AbbreviationLexicon &abbreviations) {
  Document doc;
  doc.id = std::move(id);
  doc.title = text::NormalizeNfc(title);
  doc.abstract_text = text::NormalizeNfc(abstract_text);
  std::size_t index = 0;
  for (const Span &span : SegmentSentences(doc.abstract_text, abbreviations)) {
    Sentence sentence;
    sentence.doc_id = doc.id;
    sentence.index = index++;
    sentence.span = span;
    sentence.text = text::Slice(doc.abstract_text, span);
    sentence.tokens = Tokenize(sentence.text);
    doc.sentences.push_back(std::move(sentence));
  }
  return doc;
}

namespace {

struct RawRecord {
  std::size_t first_line = 0;
  std::vector<std::pair<std::size_t, std::string>> lines;
};

std::vector<std::string> SplitLines(std::string_view bytes) {
  std::vector<std::string> lines;
  std::string current;
  for (char c : bytes) {
    if (c == '\n') {
      if (!current.empty() && current.back() == '\r') current.pop_back();
      lines.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) {
    if (current.back() == '\r') current.pop_back();
    lines.push_back(std::move(current));
  }
  return lines;
}

// Recognizes "TAG - value" lines where the tag is padded to four columns.
bool SplitTagLine(const std::string &line, std::string *tag,
                  std::string *value) {
  if (line.size() < 5 || line[4] != '-') return false;
  const std::string raw_tag = line.substr(0, 4);
  const std::string trimmed = text::Trim(raw_tag);
  if (trimmed.empty()) return false;
  for (char c : trimmed) {
    if (!std::isupper(static_cast<unsigned char>(c)) &&
        !std::isdigit(static_cast<unsigned char>(c))) {
      return false;
    }
  }
  *tag = trimmed;
  *value = line.size() > 5 ? text::Trim(line.substr(5)) : std::string();
  return true;
}

void ParseMedline(const std::vector<std::string> &lines,
                  const AbbreviationLexicon &abbreviations,
                  ParseResult *result) {
  std::vector<RawRecord> records;
  RawRecord current;
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (text::Trim(lines[n]).empty()) {
      if (!current.lines.empty()) records.push_back(std::move(current));
      current = RawRecord();
      continue;
    }
    if (current.lines.empty()) current.first_line = n + 1;
    current.lines.emplace_back(n + 1, lines[n]);
  }
  if (!current.lines.empty()) records.push_back(std::move(current));

  std::set<std::string> seen;
  for (const RawRecord &record : records) {
    std::map<std::string, std::string> fields;
    std::string last_tag;
    bool malformed = false;
    for (const auto &[line_no, line] : record.lines) {
      std::string tag, value;
      if (SplitTagLine(line, &tag, &value)) {
        last_tag = tag;
        std::string &field = fields[tag];
        if (!field.empty() && !value.empty()) field.push_back(' ');
        field += value;
      } else if (!line.empty() &&
                 std::isspace(static_cast<unsigned char>(line[0])) &&
                 !last_tag.empty()) {
        std::string &field = fields[last_tag];
        const std::string value = text::Trim(line);
        if (!field.empty() && !value.empty()) field.push_back(' ');
        field += value;
      } else {
        result->errors.push_back(
            {line_no, "malformed line in record: \"" + line + "\""});
        malformed = true;
        break;
      }
    }
    if (malformed) continue;
    const std::string id = fields.count("PMID") ? fields["PMID"] : "";
    if (id.empty()) {
      result->errors.push_back({record.first_line, "record without PMID"});
      continue;
    }
    if (!seen.insert(id).second) {
      result->errors.push_back({record.first_line, "duplicate id " + id});
      continue;
    }
    const std::string abstract = fields.count("AB") ? fields["AB"] : "";
    if (abstract.empty()) {
      ++result->skipped_empty;
      continue;
    }
    result->documents.push_back(
        BuildDocument(id, fields["TI"], abstract, abbreviations));
  }
}

void ParseTsv(const std::vector<std::string> &lines,
              const AbbreviationLexicon &abbreviations, ParseResult *result) {
  std::set<std::string> seen;
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (text::Trim(lines[n]).empty()) continue;
    const std::vector<std::string> fields = text::Split(lines[n], '\t');
    if (fields.size() != 3) {
      result->errors.push_back(
          {n + 1, "expected 3 tab-separated fields, found " +
                      std::to_string(fields.size())});
      continue;
    }
    const std::string id = text::Trim(fields[0]);
    if (id.empty()) {
      result->errors.push_back({n + 1, "empty id"});
      continue;
    }
    if (!seen.insert(id).second) {
      result->errors.push_back({n + 1, "duplicate id " + id});
      continue;
    }
    if (text::Trim(fields[2]).empty()) {
      ++result->skipped_empty;
      continue;
    }
    result->documents.push_back(BuildDocument(id, text::Trim(fields[1]),
                                              text::Trim(fields[2]),
                                              abbreviations));
  }
}

}  // namespace

ParseResult ParseCorpus(std::string_view bytes, CorpusFormat format,
                        const AbbreviationLexicon &abbreviations) {
  if (!text::IsValidUtf8(bytes)) {
    // Report the offset of the first bad byte.
    text::Decode(bytes);
  }
  const std::vector<std::string> lines = SplitLines(bytes);
  ParseResult result;
  switch (format) {
    case CorpusFormat::kMedlineText:
      ParseMedline(lines, abbreviations, &result);
      break;
    case CorpusFormat::kPlainTsv:
      ParseTsv(lines, abbreviations, &result);
      break;
  }
  return result;
}

}  // namespace genic
