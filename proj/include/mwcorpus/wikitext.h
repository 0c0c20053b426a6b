#ifndef MWCORPUS_WIKITEXT_H_
#define MWCORPUS_WIKITEXT_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mwcorpus/language_config.h"
#include "mwcorpus/schema.h"
#include "mwcorpus/segmenter.h"

namespace mwcorpus {

struct FragmentCitation {
  std::string content;
  std::optional<std::string> name;
  int64_t char_index = 0;

  bool operator==(const FragmentCitation &) const = default;
};

struct FragmentCitationNeeded {
  std::string content;
  int64_t char_index = 0;

  bool operator==(const FragmentCitationNeeded &) const = default;
};

// Prose with its markup removed. Marker offsets count code points of
// clean_text at the point where the marker stood and never decrease.
struct ParsedFragment {
  std::string clean_text;
  std::vector<FragmentCitation> citations;
  std::vector<FragmentCitationNeeded> citations_needed;
  int warnings = 0;  // unbalanced ref tags and similar recoverable damage
};

// Ref name -> full text of the defining <ref name=...>...</ref>.
using NamedRefs = std::unordered_map<std::string, std::string>;

// Collects every named ref definition in the article. The first definition
// of a name wins.
NamedRefs CollectNamedRefs(std::string_view wikicode);

// Renders one prose fragment (a paragraph or heading body) to clean text,
// recording <ref> tags, whitelisted citation templates and citation-needed
// templates as markers. Self-closing named refs resolve through named_refs;
// unresolved ones keep an empty content and their name.
ParsedFragment ExtractCitations(std::string_view fragment, const LanguageConfig &config,
                                const NamedRefs *named_refs = nullptr);
ParsedFragment ExtractCitations(std::string_view fragment);

// url= parameter of a template inside the citation, else the first bare
// http(s) URL in it.
std::optional<std::string> ExtractUrl(std::string_view citation_content);

// Trimmed quote= parameter of a template inside the citation, when non-empty.
std::optional<std::string> ExtractSnippet(std::string_view citation_content);

// Removes file/media and category links entirely, reduces interwiki links to
// their display text and ordinary links to display text (or target).
// Everything else, including unbalanced brackets, passes through unchanged.
std::string StripWikilinks(std::string_view text, const LanguageConfig &config);

struct ParseStats {
  int warnings = 0;
  int degraded_blocks = 0;
};

// Splits wikicode into elements. Never throws: a block that cannot be
// handled is kept verbatim as a Preformatted element.
std::vector<Element> ParseArticle(std::string_view wikicode, const LanguageConfig &config,
                                  ParseStats *stats = nullptr);
std::vector<Element> ParseArticle(std::string_view wikicode, const LanguageConfig &config,
                                  const Segmenter &segmenter, ParseStats *stats = nullptr);

// Template helpers, exposed for reuse by the enrichment and test code.
struct TemplateCall {
  std::string name;  // as written, trimmed
  // Named parameters keep their key; positional ones get "1", "2", ...
  std::vector<std::pair<std::string, std::string>> params;
};

// raw must span exactly "{{...}}".
TemplateCall ParseTemplateCall(std::string_view raw);

// Template title with subst:, namespace prefixes and underscores removed.
std::string NormalizeTemplateName(std::string_view name, const LanguageConfig &config);

// Byte offset just past the "}}" closing the "{{" at pos, or npos.
size_t FindTemplateEnd(std::string_view text, size_t pos);

}  // namespace mwcorpus

#endif  // MWCORPUS_WIKITEXT_H_
