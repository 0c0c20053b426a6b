#ifndef MWCORPUS_LANGUAGE_CONFIG_H_
#define MWCORPUS_LANGUAGE_CONFIG_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace mwcorpus {

struct SegmenterRules {
  // Characters that can end a sentence.
  std::u32string terminal_punctuation = U".!?…。！？।";
  // Tokens (including their final period, e.g. "Dr.", "z.B.") after which a
  // terminal does not end the sentence. Compared case-insensitively.
  std::vector<std::string> abbreviation_exceptions;
  // Words that mark a preceding "<digits>." as an ordinal rather than a
  // sentence end, as in German "14. März". Compared case-insensitively.
  std::vector<std::string> ordinal_followers;

  bool operator==(const SegmenterRules &) const = default;
};

// Per-project parsing configuration. Prefix lists include the trailing colon
// ("File:", "Fichier:"); matching is case-insensitive on the prefix.
// Title lists accept a trailing '*' as a prefix wildcard ("Infobox*").
struct LanguageConfig {
  std::string language;
  std::vector<std::string> file_media_prefixes;
  std::vector<std::string> template_prefixes;
  std::vector<std::string> infobox_template_titles;
  std::vector<std::string> interwiki_prefixes;

  // Optional keys; missing keys fall back to the built-in defaults.
  std::vector<std::string> category_prefixes;
  std::vector<std::string> citation_templates;
  std::vector<std::string> citation_needed_templates;
  SegmenterRules segmenter;

  bool operator==(const LanguageConfig &) const = default;
};

// Built-in configuration. en, fr, de, es, ja and ru have curated lists; any other
// code gets the language-neutral lists (English and interwiki prefixes).
LanguageConfig DefaultLanguageConfig(std::string_view language);

std::vector<std::string> BuiltinLanguages();

LanguageConfig LanguageConfigFromJson(std::string_view json_text);
LanguageConfig LoadLanguageConfig(const std::filesystem::path &path);
std::string LanguageConfigToJson(const LanguageConfig &config);

// Throws ConfigError on empty prefixes or an empty terminal set.
void ValidateLanguageConfig(const LanguageConfig &config);

// True when title matches one of the patterns, case-insensitively, with a
// trailing '*' in a pattern matching any suffix.
bool MatchesTitle(std::string_view title, const std::vector<std::string> &patterns);

}  // namespace mwcorpus

#endif  // MWCORPUS_LANGUAGE_CONFIG_H_
