#include "mwcorpus/language_config.h"

#include <algorithm>

#include "json.hpp"
#include "mwcorpus/chunk_io.h"
#include "mwcorpus/errors.h"
#include "mwcorpus/utf8.h"

namespace mwcorpus {

namespace {

using Strings = std::vector<std::string>;

// Language codes commonly used as interwiki/interlanguage prefixes, plus the
// sister-project shortcuts.
const Strings &CommonInterwiki() {
  static const Strings kPrefixes = [] {
    Strings out;
    for (const char *code :
         {"af", "ar", "az", "be", "bg", "bn", "bs", "ca", "cs", "cy", "da", "de", "el", "en", "eo",
          "es", "et", "eu", "fa", "fi", "fr", "ga", "gl", "he", "hi", "hr", "hu", "hy", "id", "is",
          "it", "ja", "ka", "kk", "km", "ko", "la", "lt", "lv", "mk", "ml", "mn", "mr", "ms", "my",
          "ne", "nl", "nn", "no", "pl", "ps", "pt", "ro", "ru", "si", "sk", "sl", "sq", "sr", "sv",
          "sw", "ta", "te", "th", "tl", "tr", "uk", "ur", "uz", "vi", "xh", "zh", "simple",
          "wikt", "wiktionary", "commons", "s", "q", "n", "b", "v", "voy", "d", "m", "meta",
          "mw", "species", "w", "wikipedia"}) {
      out.push_back(std::string(code) + ":");
    }
    return out;
  }();
  return kPrefixes;
}

Strings Concat(std::initializer_list<Strings> lists) {
  Strings out;
  for (const auto &l : lists) {
    for (const auto &v : l) {
      if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    }
  }
  return out;
}

const Strings kEnglishFile = {"File:", "Image:", "Media:"};
const Strings kEnglishTemplate = {"Template:"};
const Strings kEnglishCategory = {"Category:"};

const Strings kCitationTemplates = {"cite*", "citation", "rp", "vcite*", "cita*", "lien web",
                                    "article", "ouvrage", "chapitre", "internetquelle", "literatur",
                                    "статья", "книга"};

const Strings kCitationNeeded = {"citation needed", "cn", "fact", "citation required",
                                 "citation-needed", "cb", "verify source",
                                 "référence nécessaire", "refnec", "réf nécessaire",
                                 "référence souhaitée", "refsou", "cita requerida", "cr",
                                 "citarequerida", "sin referencias en línea", "belege fehlen",
                                 "quelle fehlt", "нет аи", "нет аи 2", "источник?", "要出典",
                                 "要出典範囲"};

SegmenterRules Rules(Strings abbreviations) {
  SegmenterRules rules;
  rules.abbreviation_exceptions = std::move(abbreviations);
  return rules;
}

const Strings kEnglishAbbrev = {"Mr.", "Mrs.", "Ms.", "Dr.", "Prof.", "Sr.", "Jr.", "St.", "Mt.",
                                "vs.", "etc.", "e.g.", "i.e.", "cf.", "Inc.", "Ltd.", "Co.",
                                "Corp.", "No.", "Vol.", "pp.", "p.", "ed.", "eds.", "approx.",
                                "Gen.", "Col.", "Lt.", "Capt.", "Rev.", "Jan.", "Feb.", "Mar.",
                                "Apr.", "Aug.", "Sept.", "Sep.", "Oct.", "Nov.", "Dec.", "U.S.",
                                "U.K.", "a.m.", "p.m.", "ca.", "c."};

}  // namespace

LanguageConfig DefaultLanguageConfig(std::string_view language) {
  LanguageConfig c;
  c.language = std::string(language);
  c.interwiki_prefixes = CommonInterwiki();
  c.citation_templates = kCitationTemplates;
  c.citation_needed_templates = kCitationNeeded;

  if (language == "fr") {
    c.file_media_prefixes = Concat({{"Fichier:", "Image:", "Média:", "Media:"}, kEnglishFile});
    c.template_prefixes = Concat({{"Modèle:"}, kEnglishTemplate});
    c.category_prefixes = Concat({{"Catégorie:"}, kEnglishCategory});
    c.infobox_template_titles = {"Infobox*", "Taxobox*", "Chembox", "Géobox"};
    // {{citation}} is a quotation template on this project.
    std::erase(c.citation_templates, "citation");
    c.segmenter = Rules({"M.", "MM.", "Mme.", "Mlle.", "Dr.", "Pr.", "St.", "Ste.", "etc.",
                         "cf.", "p.", "pp.", "vol.", "éd.", "env.", "av.", "apr.", "J.-C.",
                         "n°.", "chap.", "fig.", "c.-à-d."});
  } else if (language == "de") {
    c.file_media_prefixes = Concat({{"Datei:", "Bild:", "Medium:"}, kEnglishFile});
    c.template_prefixes = Concat({{"Vorlage:"}, kEnglishTemplate});
    c.category_prefixes = Concat({{"Kategorie:"}, kEnglishCategory});
    c.infobox_template_titles = {"Infobox*", "Personendaten", "Taxobox*"};
    c.segmenter = Rules({"z.B.", "z. B.", "d.h.", "u.a.", "bzw.", "ca.", "Dr.", "Prof.", "Nr.",
                         "Str.", "St.", "vgl.", "usw.", "etc.", "Jh.", "Chr.", "v.", "n.",
                         "geb.", "gest.", "S.", "Bd.", "Hrsg.", "evtl.", "sog.", "u.", "z.",
                         "Jan.", "Feb.", "Aug.", "Sept.", "Okt.", "Nov.", "Dez."});
    c.segmenter.ordinal_followers = {"Januar", "Jänner", "Februar", "März", "April", "Mai", "Juni",
                                     "Juli", "August", "September", "Oktober", "November",
                                     "Dezember", "Jahrhundert", "Jahrhunderts", "Jahrtausend"};
  } else if (language == "es") {
    c.file_media_prefixes = Concat({{"Archivo:", "Imagen:", "Medio:"}, kEnglishFile});
    c.template_prefixes = Concat({{"Plantilla:"}, kEnglishTemplate});
    c.category_prefixes = Concat({{"Categoría:"}, kEnglishCategory});
    c.infobox_template_titles = {"Ficha*", "Infobox*", "Taxobox*"};
    c.segmenter = Rules({"Sr.", "Sra.", "Srta.", "Dr.", "Dra.", "D.", "Dña.", "Ud.", "Uds.",
                         "etc.", "p.", "pp.", "pág.", "núm.", "vol.", "ed.", "aprox.", "a.C.",
                         "d.C.", "EE.", "UU.", "cap.", "fig.", "St.", "Sto.", "Sta."});
  } else if (language == "ru") {
    c.file_media_prefixes =
        Concat({{"Файл:", "Изображение:", "Медиа:"}, kEnglishFile});
    c.template_prefixes = Concat({{"Шаблон:"}, kEnglishTemplate});
    c.category_prefixes = Concat({{"Категория:"}, kEnglishCategory});
    c.infobox_template_titles = {"Карточка*", "Infobox*", "Таксон", "Персона", "Писатель",
                                 "Литературное произведение", "Государство", "Город",
                                 "Музыкант", "Учёный", "Фильм", "Река", "Озеро", "Химический элемент"};
    c.segmenter = Rules({"г.", "гг.", "т.", "д.", "т.е.", "т. е.", "т.д.", "т. д.", "т.п.",
                         "т. п.", "др.", "пр.", "см.", "ср.", "им.", "ул.", "с.", "стр.",
                         "вв.", "в.", "н.", "э.", "тыс.", "млн.", "млрд.", "руб.", "проф.",
                         "акад.", "англ.", "фр.", "нем.", "лат.", "греч."});
  } else if (language == "ja") {
    c.file_media_prefixes = Concat({{"ファイル:", "画像:"}, kEnglishFile});
    c.template_prefixes = Concat({{"Template:", "テンプレート:"}, kEnglishTemplate});
    c.category_prefixes = Concat({{"Category:", "カテゴリ:"}, kEnglishCategory});
    c.infobox_template_titles = {"Infobox*", "基礎情報*", "Taxobox*"};
    c.segmenter = Rules({});
  } else {
    c.file_media_prefixes = kEnglishFile;
    c.template_prefixes = kEnglishTemplate;
    c.category_prefixes = kEnglishCategory;
    c.infobox_template_titles = {"Infobox*", "Taxobox*", "Speciesbox", "Automatic taxobox",
                                 "Chembox", "Drugbox", "Geobox"};
    c.segmenter = Rules(kEnglishAbbrev);
  }
  return c;
}

std::vector<std::string> BuiltinLanguages() { return {"de", "en", "es", "fr", "ja", "ru"}; }

bool MatchesTitle(std::string_view title, const std::vector<std::string> &patterns) {
  const std::string folded = utf8::FoldCase(title);
  for (const auto &pattern : patterns) {
    if (!pattern.empty() && pattern.back() == '*') {
      const std::string prefix = utf8::FoldCase(std::string_view(pattern).substr(0, pattern.size() - 1));
      if (folded.compare(0, prefix.size(), prefix) == 0) return true;
    } else if (folded == utf8::FoldCase(pattern)) {
      return true;
    }
  }
  return false;
}

void ValidateLanguageConfig(const LanguageConfig &c) {
  auto check = [&](const Strings &list, const char *key) {
    for (const auto &p : list) {
      if (p.empty()) throw ConfigError(std::string("empty entry in ") + key);
    }
  };
  check(c.file_media_prefixes, "file_media_prefixes");
  check(c.template_prefixes, "template_prefixes");
  check(c.infobox_template_titles, "infobox_template_titles");
  check(c.interwiki_prefixes, "interwiki_prefixes");
  check(c.category_prefixes, "category_prefixes");
  check(c.citation_templates, "citation_templates");
  check(c.citation_needed_templates, "citation_needed_templates");
  if (c.segmenter.terminal_punctuation.empty()) {
    throw ConfigError("segmenter.terminal_punctuation must not be empty");
  }
}

LanguageConfig LanguageConfigFromJson(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error &e) {
    throw ConfigError(std::string("language config is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("language") || !j["language"].is_string()) {
    throw ConfigError("language config needs a string \"language\" key");
  }
  LanguageConfig c = DefaultLanguageConfig(j["language"].get<std::string>());
  auto read_list = [&](const char *key, Strings &target, bool required) {
    if (!j.contains(key)) {
      if (required) throw ConfigError(std::string("language config is missing \"") + key + "\"");
      return;
    }
    if (!j[key].is_array()) throw ConfigError(std::string("\"") + key + "\" must be a list");
    target.clear();
    for (const auto &v : j[key]) {
      if (!v.is_string()) throw ConfigError(std::string("\"") + key + "\" must hold strings");
      target.push_back(v.get<std::string>());
    }
  };
  read_list("file_media_prefixes", c.file_media_prefixes, true);
  read_list("template_prefixes", c.template_prefixes, true);
  read_list("infobox_template_titles", c.infobox_template_titles, true);
  read_list("interwiki_prefixes", c.interwiki_prefixes, true);
  read_list("category_prefixes", c.category_prefixes, false);
  read_list("citation_templates", c.citation_templates, false);
  read_list("citation_needed_templates", c.citation_needed_templates, false);
  if (j.contains("segmenter")) {
    const auto &s = j["segmenter"];
    if (!s.is_object()) throw ConfigError("\"segmenter\" must be an object");
    if (s.contains("terminal_punctuation")) {
      if (!s["terminal_punctuation"].is_string()) {
        throw ConfigError("segmenter.terminal_punctuation must be a string of characters");
      }
      c.segmenter.terminal_punctuation = utf8::Decode(s["terminal_punctuation"].get<std::string>());
    }
    if (s.contains("ordinal_followers")) {
      c.segmenter.ordinal_followers.clear();
      for (const auto &v : s["ordinal_followers"]) c.segmenter.ordinal_followers.push_back(v.get<std::string>());
    }
    if (s.contains("abbreviation_exceptions")) {
      c.segmenter.abbreviation_exceptions.clear();
      for (const auto &v : s["abbreviation_exceptions"]) {
        c.segmenter.abbreviation_exceptions.push_back(v.get<std::string>());
      }
    }
  }
  ValidateLanguageConfig(c);
  return c;
}

LanguageConfig LoadLanguageConfig(const std::filesystem::path &path) {
  return LanguageConfigFromJson(ReadFile(path));
}

std::string LanguageConfigToJson(const LanguageConfig &c) {
  nlohmann::ordered_json j;
  j["language"] = c.language;
  j["file_media_prefixes"] = c.file_media_prefixes;
  j["template_prefixes"] = c.template_prefixes;
  j["infobox_template_titles"] = c.infobox_template_titles;
  j["interwiki_prefixes"] = c.interwiki_prefixes;
  j["category_prefixes"] = c.category_prefixes;
  j["citation_templates"] = c.citation_templates;
  j["citation_needed_templates"] = c.citation_needed_templates;
  j["segmenter"]["terminal_punctuation"] = utf8::Encode(c.segmenter.terminal_punctuation);
  j["segmenter"]["abbreviation_exceptions"] = c.segmenter.abbreviation_exceptions;
  j["segmenter"]["ordinal_followers"] = c.segmenter.ordinal_followers;
  return j.dump(2) + "\n";
}

}  // namespace mwcorpus
