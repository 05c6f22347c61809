#ifndef GENIC_TEXT_H_
#define GENIC_TEXT_H_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace genic {

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Half-open range [start, end) measured in Unicode scalar values.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const { return end - start; }
  bool empty() const { return end <= start; }
  bool contains(const Span &other) const {
    return start <= other.start && other.end <= end;
  }
  bool overlaps(const Span &other) const {
    return start < other.end && other.start < end;
  }
  friend bool operator==(const Span &, const Span &) = default;
  friend auto operator<=>(const Span &, const Span &) = default;
};

namespace text {

// True if the bytes form well-formed UTF-8.
bool IsValidUtf8(std::string_view bytes);

// Decodes UTF-8 into scalar values. Throws Error on malformed input.
std::u32string Decode(std::string_view bytes);
std::string Encode(std::u32string_view chars);
void AppendUtf8(char32_t c, std::string *out);

// Canonical composition (NFC).
std::string NormalizeNfc(std::string_view utf8);

// Number of scalar values in a UTF-8 string.
std::size_t Length(std::string_view utf8);

// Substring by scalar-value offsets.
std::string Slice(std::string_view utf8, Span span);

bool IsSpace(char32_t c);
bool IsDigit(char32_t c);
bool IsUpper(char32_t c);
bool IsLower(char32_t c);
bool IsAlpha(char32_t c);
bool IsAlnum(char32_t c);

std::string ToLower(std::string_view utf8);
std::string Trim(std::string_view s);

// Splits on a single delimiter character; keeps empty fields.
std::vector<std::string> Split(std::string_view s, char delim);

std::string Join(const std::vector<std::string> &parts, std::string_view sep);

// Whole file as bytes. `what` names the file in the error message.
std::string ReadFile(const std::string &path, std::string_view what = "file");

// Writes to a sibling temporary file, then renames it over `path`.
void WriteFileAtomic(const std::string &path, std::string_view content);

}  // namespace text
}  // namespace genic

#endif  // GENIC_TEXT_H_
