#ifndef MWCORPUS_SCHEMA_H_
#define MWCORPUS_SCHEMA_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace mwcorpus {

// Corpus record types. Field names mirror the JSON keys one-to-one; every
// std::optional member serializes as JSON null when absent.

struct Citation {
  std::string content;
  int64_t char_index = 0;
  std::optional<std::string> name;
  std::optional<std::string> url;
  std::optional<std::string> source_text;
  std::optional<std::string> source_code_content_type;
  std::optional<int64_t> source_code_num_bytes;  // never populated
  std::optional<int64_t> source_code_num_chars;
  std::optional<std::string> source_download_date;
  std::optional<std::string> source_download_error;
  std::optional<std::string> source_extract_error;
  std::optional<std::string> source_snippet;
  std::optional<int> source_quality_label;
  std::optional<double> source_quality_raw_score;

  bool operator==(const Citation &) const = default;
};

struct CitationNeeded {
  std::string content;
  int64_t char_index = 0;

  bool operator==(const CitationNeeded &) const = default;
};

struct Sentence {
  std::string text;
  std::optional<std::string> translated_text;
  std::string trailing_whitespace;  // "" or " "
  std::vector<Citation> citations;
  std::vector<CitationNeeded> citations_needed;

  bool operator==(const Sentence &) const = default;
};

struct Heading {
  std::string text;
  std::optional<std::string> translated_text;
  int level = 2;
  std::vector<Citation> citations;
  std::vector<CitationNeeded> citations_needed;

  bool operator==(const Heading &) const = default;
};

struct Paragraph {
  std::vector<Sentence> sentences;

  // Cleaned paragraph text: sentences joined with their trailing whitespace.
  std::string Text() const;

  bool operator==(const Paragraph &) const = default;
};

struct Table {
  std::string content;
  bool operator==(const Table &) const = default;
};

struct Infobox {
  std::string content;
  bool operator==(const Infobox &) const = default;
};

struct Math {
  std::string content;
  bool operator==(const Math &) const = default;
};

struct Code {
  std::optional<std::string> language;
  std::string content;
  bool operator==(const Code &) const = default;
};

struct Preformatted {
  std::string content;
  bool operator==(const Preformatted &) const = default;
};

using Element = std::variant<Heading, Paragraph, Table, Infobox, Math, Code, Preformatted>;

// The "type" discriminator written for each element variant.
std::string_view ElementType(const Element &element);

struct ExcerptWithCitations {
  std::string text;
  std::optional<std::string> translated_text;
  std::vector<Citation> citations;

  bool operator==(const ExcerptWithCitations &) const = default;
};

struct Article {
  std::string title;
  std::string wikicode;
  std::string hash;
  std::string last_revision;
  std::optional<std::string> first_revision;
  std::optional<std::string> first_revision_access_date;
  std::optional<std::map<std::string, std::string>> cross_lingual_links;
  std::optional<std::string> cross_lingual_links_access_date;
  std::string text;
  std::vector<Element> elements;
  std::vector<ExcerptWithCitations> excerpts_with_citations;

  bool operator==(const Article &) const = default;
};

// SHA-256 (lowercase hex) of title, one '\n' byte, then wikicode.
std::string ComputeHash(std::string_view title, std::string_view wikicode);

// Lowercase hex SHA-256 of arbitrary bytes.
std::string Sha256Hex(std::string_view bytes);

// One JSON line, no trailing newline. Output is deterministic: the same
// article always produces the same bytes.
std::string SerializeArticle(const Article &article);

// Strict inverse of SerializeArticle. Throws SchemaError naming the field
// path on unknown keys, missing keys, wrong types or out-of-range values.
Article DeserializeArticle(std::string_view line);

// Checks the cross-field invariants that per-field decoding cannot see:
// offsets within text bounds, exclusive source fields, excerpt citations
// present in elements. Throws SchemaError.
void ValidateArticle(const Article &article);

// Heading and paragraph texts joined by '\n' in element order.
std::string ArticleText(const std::vector<Element> &elements);

// Visits every citation held by headings and sentences (not excerpts).
template <typename Fn>
void ForEachElementCitation(std::vector<Element> &elements, Fn &&fn) {
  for (auto &element : elements) {
    if (auto *heading = std::get_if<Heading>(&element)) {
      for (auto &c : heading->citations) fn(c);
    } else if (auto *paragraph = std::get_if<Paragraph>(&element)) {
      for (auto &sentence : paragraph->sentences) {
        for (auto &c : sentence.citations) fn(c);
      }
    }
  }
}

template <typename Fn>
void ForEachElementCitation(const std::vector<Element> &elements, Fn &&fn) {
  for (const auto &element : elements) {
    if (const auto *heading = std::get_if<Heading>(&element)) {
      for (const auto &c : heading->citations) fn(c);
    } else if (const auto *paragraph = std::get_if<Paragraph>(&element)) {
      for (const auto &sentence : paragraph->sentences) {
        for (const auto &c : sentence.citations) fn(c);
      }
    }
  }
}

}  // namespace mwcorpus

#endif  // MWCORPUS_SCHEMA_H_
