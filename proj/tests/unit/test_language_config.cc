#include "doctest.h"
#include "json.hpp"
#include "mwcorpus/errors.h"
#include "mwcorpus/language_config.h"
#include "test_support.h"

using namespace mwcorpus;

TEST_CASE("shipped config files equal the built-in configs") {
  const auto builtins = BuiltinLanguages();
  CHECK(builtins == std::vector<std::string>{"de", "en", "es", "fr", "ja", "ru"});
  for (const auto &lang : builtins) {
    CAPTURE(lang);
    const auto path = std::filesystem::path(MWCORPUS_SOURCE_DIR) / "config" / "lang" / (lang + ".json");
    REQUIRE(std::filesystem::exists(path));
    const LanguageConfig loaded = LoadLanguageConfig(path);
    CHECK(loaded == DefaultLanguageConfig(lang));
    CHECK_NOTHROW(ValidateLanguageConfig(loaded));
  }
}

TEST_CASE("configs round-trip through JSON") {
  for (const auto &lang : {"en", "fr", "de", "es", "ja", "ru", "sw"}) {
    const LanguageConfig c = DefaultLanguageConfig(lang);
    CHECK(LanguageConfigFromJson(LanguageConfigToJson(c)) == c);
  }
}

TEST_CASE("curated lists carry in-language prefixes") {
  const auto fr = DefaultLanguageConfig("fr");
  CHECK(MatchesTitle("Fichier:", fr.file_media_prefixes));
  CHECK(MatchesTitle("Modèle:", fr.template_prefixes));
  CHECK(MatchesTitle("Infobox Livre", fr.infobox_template_titles));
  const auto de = DefaultLanguageConfig("de");
  CHECK(MatchesTitle("Datei:", de.file_media_prefixes));
  CHECK(MatchesTitle("Vorlage:", de.template_prefixes));
  const auto ru = DefaultLanguageConfig("ru");
  CHECK(MatchesTitle("Файл:", ru.file_media_prefixes));
  CHECK(MatchesTitle("Шаблон:", ru.template_prefixes));
  const auto es = DefaultLanguageConfig("es");
  CHECK(MatchesTitle("Archivo:", es.file_media_prefixes));
  const auto other = DefaultLanguageConfig("sw");
  CHECK(other.language == "sw");
  CHECK(MatchesTitle("File:", other.file_media_prefixes));
}

TEST_CASE("MatchesTitle is case-insensitive with a prefix wildcard") {
  const std::vector<std::string> patterns = {"Infobox*", "Taxobox"};
  CHECK(MatchesTitle("Infobox Livre", patterns));
  CHECK(MatchesTitle("infobox settlement", patterns));
  CHECK(MatchesTitle("TAXOBOX", patterns));
  CHECK_FALSE(MatchesTitle("Taxobox2", patterns));
  CHECK_FALSE(MatchesTitle("Cite web", patterns));
}

TEST_CASE("JSON with only the five required keys fills the rest from defaults") {
  const std::string text = R"({"language": "fr",
    "file_media_prefixes": ["Fichier:"],
    "template_prefixes": ["Modèle:"],
    "infobox_template_titles": ["Infobox Livre"],
    "interwiki_prefixes": ["en:"]})";
  const LanguageConfig c = LanguageConfigFromJson(text);
  CHECK(c.file_media_prefixes == std::vector<std::string>{"Fichier:"});
  CHECK(c.citation_templates == DefaultLanguageConfig("fr").citation_templates);
  CHECK(c.segmenter == DefaultLanguageConfig("fr").segmenter);
}

TEST_CASE("invalid configs are rejected") {
  CHECK_THROWS_AS(LanguageConfigFromJson("{\"language\": \"en\"}"), ConfigError);
  CHECK_THROWS_AS(LanguageConfigFromJson("not json"), ConfigError);
  LanguageConfig c = DefaultLanguageConfig("en");
  c.file_media_prefixes.push_back("");
  CHECK_THROWS_AS(ValidateLanguageConfig(c), ConfigError);
  c = DefaultLanguageConfig("en");
  c.segmenter.terminal_punctuation.clear();
  CHECK_THROWS_AS(ValidateLanguageConfig(c), ConfigError);
}
