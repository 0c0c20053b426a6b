#ifndef MWCORPUS_UTF8_H_
#define MWCORPUS_UTF8_H_

#include <cstddef>
#include <string>
#include <string_view>

namespace mwcorpus::utf8 {

inline constexpr char32_t kReplacement = 0xFFFD;

// Decodes one code point starting at text[pos] and advances pos. Invalid or
// truncated sequences decode to U+FFFD and consume a single byte.
char32_t Next(std::string_view text, size_t &pos);

void Append(std::string &out, char32_t cp);

std::u32string Decode(std::string_view text);
std::string Encode(std::u32string_view text);

// Replaces every invalid byte sequence with U+FFFD.
std::string Sanitize(std::string_view bytes);
bool IsValid(std::string_view bytes);

// Number of Unicode scalar values in well-formed UTF-8 text.
size_t Length(std::string_view text);

// Byte offset of the code point with the given index; clamps to text.size().
size_t ByteOffset(std::string_view text, size_t index);

// Prefix of at most max_chars code points.
std::string_view Truncate(std::string_view text, size_t max_chars);

bool IsSpace(char32_t cp);
bool IsLetter(char32_t cp);
bool IsLower(char32_t cp);
bool IsDigit(char32_t cp);

// Simple case folding for Latin, Greek and Cyrillic; other scripts unchanged.
char32_t FoldCase(char32_t cp);
std::string FoldCase(std::string_view text);

// Case-insensitive prefix test using FoldCase.
bool StartsWithFolded(std::string_view text, std::string_view prefix);

std::string Reverse(std::string_view text);

}  // namespace mwcorpus::utf8

#endif  // MWCORPUS_UTF8_H_
