#ifndef MWCORPUS_HTML_TEXT_H_
#define MWCORPUS_HTML_TEXT_H_

#include <optional>
#include <string>
#include <string_view>

namespace mwcorpus {

// Readable text of an HTML document. Scripts, styles, comments, navigation,
// headers, footers, asides and forms are removed; when the page has <main>
// or <article> regions only those are kept. Block elements become lines,
// headings get '#' markers, list items "- ", table cells " | " separators,
// and http(s) hyperlinks are kept as [text](url).
std::string HtmlToText(std::string_view html);

// Trims lines, collapses runs of spaces and tabs, and squeezes blank lines.
std::string NormalizePlainText(std::string_view text);

struct ExtractResult {
  std::optional<std::string> text;
  std::optional<std::string> error;  // "Exception: ..."
};

// Dispatches on the media type of content_type (parameters ignored).
ExtractResult ExtractText(std::string_view content, std::string_view content_type);

// Whitespace-separated token count.
size_t CountTokens(std::string_view text);

// "Text is too short (N words)" when text has fewer than min_tokens tokens.
std::optional<std::string> TokenFilter(std::string_view text, int min_tokens);

}  // namespace mwcorpus

#endif  // MWCORPUS_HTML_TEXT_H_
