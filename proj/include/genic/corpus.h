#ifndef GENIC_CORPUS_H_
#define GENIC_CORPUS_H_

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "genic/text.h"

namespace genic {

enum class TokenKind { kWord, kNumber, kPunctuation, kSymbol };

const char *TokenKindName(TokenKind kind);

struct Token {
  std::string text;
  Span span;  // offsets within the sentence text
  TokenKind kind = TokenKind::kWord;

  friend bool operator==(const Token &, const Token &) = default;
};

// Identifies a sentence within a corpus.
struct SentenceRef {
  std::string doc_id;
  std::size_t index = 0;

  friend bool operator==(const SentenceRef &, const SentenceRef &) = default;
  friend auto operator<=>(const SentenceRef &, const SentenceRef &) = default;
};

struct Sentence {
  std::string doc_id;
  std::size_t index = 0;
  std::string text;
  Span span;  // offsets within the abstract text
  std::vector<Token> tokens;

  SentenceRef ref() const { return {doc_id, index}; }
  friend bool operator==(const Sentence &, const Sentence &) = default;
};

struct Document {
  std::string id;
  std::string title;
  std::string abstract_text;
  std::vector<Sentence> sentences;

  friend bool operator==(const Document &, const Document &) = default;
};

enum class CorpusFormat { kMedlineText, kPlainTsv };

// Abbreviations that never end a sentence ("e.g.", "Fig.", ...).
// Entries are stored lowercased and include the final period.
class AbbreviationLexicon {
 public:
  AbbreviationLexicon() = default;
  explicit AbbreviationLexicon(std::set<std::string> entries);

  // Built-in list used when no data file is supplied.
  static AbbreviationLexicon Default();
  // One abbreviation per line; '#' starts a comment.
  static AbbreviationLexicon Load(const std::string &path);

  bool Contains(std::string_view word_with_period) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::set<std::string> entries_;
};

struct RecordError {
  std::size_t line = 0;
  std::string message;
};

struct ParseResult {
  std::vector<Document> documents;
  std::size_t skipped_empty = 0;
  std::vector<RecordError> errors;
};

// Parses a corpus file. Invalid UTF-8 is fatal (throws Error); malformed
// records are reported in ParseResult::errors and skipped.
ParseResult ParseCorpus(std::string_view bytes, CorpusFormat format,
                        const AbbreviationLexicon &abbreviations =
                            AbbreviationLexicon::Default());

// Sentence boundaries in scalar-value offsets. Spans are trimmed and cover
// every non-whitespace character of the text.
std::vector<Span> SegmentSentences(std::string_view text,
                                   const AbbreviationLexicon &abbreviations =
                                       AbbreviationLexicon::Default());

std::vector<Token> Tokenize(std::string_view sentence_text);

// Normalizes, segments and tokenizes a single abstract.
Document BuildDocument(std::string id, std::string title,
                       std::string_view abstract_text,
                       const AbbreviationLexicon &abbreviations =
                           AbbreviationLexicon::Default());

}  // namespace genic

#endif  // GENIC_CORPUS_H_
