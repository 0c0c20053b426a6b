#include "mwcorpus/schema.h"

#include <openssl/evp.h>

#include <array>
#include <set>

#include "json.hpp"
#include "mwcorpus/errors.h"
#include "mwcorpus/utf8.h"

namespace mwcorpus {

using ojson = nlohmann::ordered_json;
using json = nlohmann::json;

std::string Paragraph::Text() const {
  std::string out;
  for (const auto &s : sentences) {
    out += s.text;
    out += s.trailing_whitespace;
  }
  return out;
}

std::string_view ElementType(const Element &element) {
  static constexpr std::array<std::string_view, 7> kNames = {
      "heading", "paragraph", "table", "infobox", "math", "code", "preformatted"};
  return kNames[element.index()];
}

std::string Sha256Hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

std::string ComputeHash(std::string_view title, std::string_view wikicode) {
  std::string buffer;
  buffer.reserve(title.size() + 1 + wikicode.size());
  buffer.append(title);
  buffer.push_back('\n');
  buffer.append(wikicode);
  return Sha256Hex(buffer);
}

std::string ArticleText(const std::vector<Element> &elements) {
  std::string out;
  bool first = true;
  for (const auto &element : elements) {
    const std::string *piece = nullptr;
    std::string paragraph_text;
    if (const auto *h = std::get_if<Heading>(&element)) {
      piece = &h->text;
    } else if (const auto *p = std::get_if<Paragraph>(&element)) {
      paragraph_text = p->Text();
      piece = &paragraph_text;
    }
    if (piece == nullptr) continue;
    if (!first) out.push_back('\n');
    out += *piece;
    first = false;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

template <typename T>
ojson Nullable(const std::optional<T> &value) {
  return value ? ojson(*value) : ojson(nullptr);
}

ojson ToJson(const Citation &c) {
  ojson j = ojson::object();
  j["content"] = c.content;
  j["char_index"] = c.char_index;
  j["name"] = Nullable(c.name);
  j["url"] = Nullable(c.url);
  j["source_text"] = Nullable(c.source_text);
  j["source_code_content_type"] = Nullable(c.source_code_content_type);
  j["source_code_num_bytes"] = Nullable(c.source_code_num_bytes);
  j["source_code_num_chars"] = Nullable(c.source_code_num_chars);
  j["source_download_date"] = Nullable(c.source_download_date);
  j["source_download_error"] = Nullable(c.source_download_error);
  j["source_extract_error"] = Nullable(c.source_extract_error);
  j["source_snippet"] = Nullable(c.source_snippet);
  j["source_quality_label"] = Nullable(c.source_quality_label);
  j["source_quality_raw_score"] = Nullable(c.source_quality_raw_score);
  return j;
}

ojson ToJson(const CitationNeeded &c) {
  ojson j = ojson::object();
  j["type"] = "citation-needed";
  j["content"] = c.content;
  j["char_index"] = c.char_index;
  return j;
}

ojson ToJson(const Sentence &s);
ojson ToJson(const Element &e);
ojson ToJson(const ExcerptWithCitations &e);

template <typename T>
ojson ToJsonArray(const std::vector<T> &items) {
  ojson arr = ojson::array();
  for (const auto &item : items) arr.push_back(ToJson(item));
  return arr;
}

ojson ToJson(const Sentence &s) {
  ojson j = ojson::object();
  j["text"] = s.text;
  j["translated_text"] = Nullable(s.translated_text);
  j["trailing_whitespace"] = s.trailing_whitespace;
  j["citations"] = ToJsonArray(s.citations);
  j["citations_needed"] = ToJsonArray(s.citations_needed);
  return j;
}

struct ElementToJson {
  ojson operator()(const Heading &h) const {
    ojson j = ojson::object();
    j["type"] = "heading";
    j["text"] = h.text;
    j["translated_text"] = Nullable(h.translated_text);
    j["level"] = h.level;
    j["citations"] = ToJsonArray(h.citations);
    j["citations_needed"] = ToJsonArray(h.citations_needed);
    return j;
  }
  ojson operator()(const Paragraph &p) const {
    ojson j = ojson::object();
    j["type"] = "paragraph";
    j["sentences"] = ToJsonArray(p.sentences);
    return j;
  }
  ojson operator()(const Table &t) const { return Raw("table", t.content); }
  ojson operator()(const Infobox &t) const { return Raw("infobox", t.content); }
  ojson operator()(const Math &t) const { return Raw("math", t.content); }
  ojson operator()(const Code &c) const {
    ojson j = ojson::object();
    j["type"] = "code";
    j["language"] = Nullable(c.language);
    j["content"] = c.content;
    return j;
  }
  ojson operator()(const Preformatted &t) const { return Raw("preformatted", t.content); }

  static ojson Raw(const char *type, const std::string &content) {
    ojson j = ojson::object();
    j["type"] = type;
    j["content"] = content;
    return j;
  }
};

ojson ToJson(const Element &e) { return std::visit(ElementToJson{}, e); }

ojson ToJson(const ExcerptWithCitations &e) {
  ojson j = ojson::object();
  j["text"] = e.text;
  j["translated_text"] = Nullable(e.translated_text);
  j["citations"] = ToJsonArray(e.citations);
  return j;
}

}  // namespace

std::string SerializeArticle(const Article &a) {
  ojson j = ojson::object();
  j["title"] = a.title;
  j["wikicode"] = a.wikicode;
  j["hash"] = a.hash;
  j["last_revision"] = a.last_revision;
  j["first_revision"] = Nullable(a.first_revision);
  j["first_revision_access_date"] = Nullable(a.first_revision_access_date);
  if (a.cross_lingual_links) {
    ojson links = ojson::object();
    for (const auto &[lang, title] : *a.cross_lingual_links) links[lang] = title;
    j["cross_lingual_links"] = std::move(links);
  } else {
    j["cross_lingual_links"] = nullptr;
  }
  j["cross_lingual_links_access_date"] = Nullable(a.cross_lingual_links_access_date);
  j["text"] = a.text;
  j["elements"] = ToJsonArray(a.elements);
  j["excerpts_with_citations"] = ToJsonArray(a.excerpts_with_citations);
  return j.dump(-1, ' ', false, ojson::error_handler_t::replace);
}

// ---------------------------------------------------------------------------
// Deserialization

namespace {

std::string Join(const std::string &path, const std::string &key) {
  return path.empty() ? key : path + "." + key;
}

std::string Index(const std::string &path, size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

// Reads fields out of one JSON object, remembering which keys were consumed
// so that leftovers can be reported as unknown fields.
class ObjectReader {
 public:
  ObjectReader(const json &value, std::string path) : value_(value), path_(std::move(path)) {
    if (!value_.is_object()) throw SchemaError(path_, "expected an object");
  }

  const json &Get(const std::string &key) {
    auto it = value_.find(key);
    if (it == value_.end()) throw SchemaError(Join(path_, key), "missing field");
    seen_.insert(key);
    return *it;
  }

  std::string Path(const std::string &key) const { return Join(path_, key); }

  std::string String(const std::string &key) {
    const json &v = Get(key);
    if (!v.is_string()) throw SchemaError(Path(key), "expected a string");
    return v.get<std::string>();
  }

  std::optional<std::string> OptString(const std::string &key) {
    const json &v = Get(key);
    if (v.is_null()) return std::nullopt;
    if (!v.is_string()) throw SchemaError(Path(key), "expected a string or null");
    return v.get<std::string>();
  }

  int64_t Int(const std::string &key) {
    const json &v = Get(key);
    if (!v.is_number_integer()) throw SchemaError(Path(key), "expected an integer");
    return v.get<int64_t>();
  }

  std::optional<int64_t> OptInt(const std::string &key) {
    const json &v = Get(key);
    if (v.is_null()) return std::nullopt;
    if (!v.is_number_integer()) throw SchemaError(Path(key), "expected an integer or null");
    return v.get<int64_t>();
  }

  std::optional<double> OptNumber(const std::string &key) {
    const json &v = Get(key);
    if (v.is_null()) return std::nullopt;
    if (!v.is_number()) throw SchemaError(Path(key), "expected a number or null");
    return v.get<double>();
  }

  const json &Array(const std::string &key) {
    const json &v = Get(key);
    if (!v.is_array()) throw SchemaError(Path(key), "expected an array");
    return v;
  }

  void Constant(const std::string &key, std::string_view expected) {
    const std::string got = String(key);
    if (got != expected) {
      throw SchemaError(Path(key), "expected \"" + std::string(expected) + "\", got \"" + got + "\"");
    }
  }

  void Finish() const {
    for (auto it = value_.begin(); it != value_.end(); ++it) {
      if (!seen_.count(it.key())) throw SchemaError(Path(it.key()), "unknown field");
    }
  }

 private:
  const json &value_;
  std::string path_;
  std::set<std::string> seen_;
};

void CheckIndex(int64_t index, size_t length, const std::string &path) {
  if (index < 0 || static_cast<uint64_t>(index) > length) {
    throw SchemaError(path, "char_index " + std::to_string(index) +
                                " outside enclosing text of length " + std::to_string(length));
  }
}

Citation ReadCitation(const json &value, const std::string &path, size_t text_length) {
  ObjectReader r(value, path);
  Citation c;
  c.content = r.String("content");
  c.char_index = r.Int("char_index");
  CheckIndex(c.char_index, text_length, r.Path("char_index"));
  c.name = r.OptString("name");
  c.url = r.OptString("url");
  c.source_text = r.OptString("source_text");
  c.source_code_content_type = r.OptString("source_code_content_type");
  c.source_code_num_bytes = r.OptInt("source_code_num_bytes");
  c.source_code_num_chars = r.OptInt("source_code_num_chars");
  c.source_download_date = r.OptString("source_download_date");
  c.source_download_error = r.OptString("source_download_error");
  c.source_extract_error = r.OptString("source_extract_error");
  c.source_snippet = r.OptString("source_snippet");
  if (auto label = r.OptInt("source_quality_label")) {
    if (*label < 1 || *label > 5) {
      throw SchemaError(r.Path("source_quality_label"),
                        "label " + std::to_string(*label) + " outside 1..5");
    }
    c.source_quality_label = static_cast<int>(*label);
  }
  c.source_quality_raw_score = r.OptNumber("source_quality_raw_score");
  r.Finish();
  return c;
}

CitationNeeded ReadCitationNeeded(const json &value, const std::string &path, size_t text_length) {
  ObjectReader r(value, path);
  r.Constant("type", "citation-needed");
  CitationNeeded c;
  c.content = r.String("content");
  c.char_index = r.Int("char_index");
  CheckIndex(c.char_index, text_length, r.Path("char_index"));
  r.Finish();
  return c;
}

std::vector<Citation> ReadCitations(ObjectReader &r, size_t text_length) {
  std::vector<Citation> out;
  const json &arr = r.Array("citations");
  for (size_t i = 0; i < arr.size(); ++i) {
    out.push_back(ReadCitation(arr[i], Index(r.Path("citations"), i), text_length));
  }
  return out;
}

std::vector<CitationNeeded> ReadCitationsNeeded(ObjectReader &r, size_t text_length) {
  std::vector<CitationNeeded> out;
  const json &arr = r.Array("citations_needed");
  for (size_t i = 0; i < arr.size(); ++i) {
    out.push_back(ReadCitationNeeded(arr[i], Index(r.Path("citations_needed"), i), text_length));
  }
  return out;
}

Sentence ReadSentence(const json &value, const std::string &path) {
  ObjectReader r(value, path);
  Sentence s;
  s.text = r.String("text");
  s.translated_text = r.OptString("translated_text");
  s.trailing_whitespace = r.String("trailing_whitespace");
  if (s.trailing_whitespace != "" && s.trailing_whitespace != " ") {
    throw SchemaError(r.Path("trailing_whitespace"), "must be \"\" or \" \"");
  }
  const size_t length = utf8::Length(s.text);
  s.citations = ReadCitations(r, length);
  s.citations_needed = ReadCitationsNeeded(r, length);
  r.Finish();
  return s;
}

Element ReadElement(const json &value, const std::string &path) {
  ObjectReader r(value, path);
  const std::string type = r.String("type");
  if (type == "heading") {
    Heading h;
    h.text = r.String("text");
    h.translated_text = r.OptString("translated_text");
    const int64_t level = r.Int("level");
    if (level < 1 || level > 6) {
      throw SchemaError(r.Path("level"), "heading level " + std::to_string(level) + " outside 1..6");
    }
    h.level = static_cast<int>(level);
    const size_t length = utf8::Length(h.text);
    h.citations = ReadCitations(r, length);
    h.citations_needed = ReadCitationsNeeded(r, length);
    r.Finish();
    return h;
  }
  if (type == "paragraph") {
    Paragraph p;
    const json &arr = r.Array("sentences");
    for (size_t i = 0; i < arr.size(); ++i) {
      p.sentences.push_back(ReadSentence(arr[i], Index(r.Path("sentences"), i)));
    }
    r.Finish();
    return p;
  }
  if (type == "code") {
    Code c;
    c.language = r.OptString("language");
    c.content = r.String("content");
    r.Finish();
    return c;
  }
  auto raw = [&]() {
    std::string content = r.String("content");
    r.Finish();
    return content;
  };
  if (type == "table") return Table{raw()};
  if (type == "infobox") return Infobox{raw()};
  if (type == "math") return Math{raw()};
  if (type == "preformatted") return Preformatted{raw()};
  throw SchemaError(r.Path("type"), "unknown element type \"" + type + "\"");
}

ExcerptWithCitations ReadExcerpt(const json &value, const std::string &path) {
  ObjectReader r(value, path);
  ExcerptWithCitations e;
  e.text = r.String("text");
  e.translated_text = r.OptString("translated_text");
  e.citations = ReadCitations(r, utf8::Length(e.text));
  r.Finish();
  return e;
}

}  // namespace

Article DeserializeArticle(std::string_view line) {
  json root;
  try {
    root = json::parse(line);
  } catch (const json::parse_error &e) {
    throw SchemaError("", std::string("invalid JSON: ") + e.what());
  }
  ObjectReader r(root, "");
  Article a;
  a.title = r.String("title");
  a.wikicode = r.String("wikicode");
  a.hash = r.String("hash");
  a.last_revision = r.String("last_revision");
  a.first_revision = r.OptString("first_revision");
  a.first_revision_access_date = r.OptString("first_revision_access_date");
  const json &links = r.Get("cross_lingual_links");
  if (!links.is_null()) {
    if (!links.is_object()) throw SchemaError("cross_lingual_links", "expected an object or null");
    std::map<std::string, std::string> map;
    for (auto it = links.begin(); it != links.end(); ++it) {
      if (!it.value().is_string()) {
        throw SchemaError("cross_lingual_links." + it.key(), "expected a string");
      }
      map[it.key()] = it.value().get<std::string>();
    }
    a.cross_lingual_links = std::move(map);
  }
  a.cross_lingual_links_access_date = r.OptString("cross_lingual_links_access_date");
  a.text = r.String("text");
  const json &elements = r.Array("elements");
  for (size_t i = 0; i < elements.size(); ++i) {
    a.elements.push_back(ReadElement(elements[i], Index("elements", i)));
  }
  const json &excerpts = r.Array("excerpts_with_citations");
  for (size_t i = 0; i < excerpts.size(); ++i) {
    a.excerpts_with_citations.push_back(ReadExcerpt(excerpts[i], Index("excerpts_with_citations", i)));
  }
  r.Finish();
  return a;
}

// ---------------------------------------------------------------------------
// Cross-field validation

namespace {

void ValidateCitation(const Citation &c, const std::string &path, size_t text_length) {
  CheckIndex(c.char_index, text_length, path + ".char_index");
  if (c.source_text && (c.source_download_error || c.source_extract_error)) {
    throw SchemaError(path, "source_text present together with an error field");
  }
  if (c.source_quality_label) {
    if (!c.source_text) throw SchemaError(path, "source_quality_label without source_text");
    if (*c.source_quality_label < 1 || *c.source_quality_label > 5) {
      throw SchemaError(path + ".source_quality_label", "label outside 1..5");
    }
  }
  if (!c.url && (c.source_text || c.source_code_content_type || c.source_code_num_chars ||
                 c.source_download_date || c.source_download_error || c.source_extract_error ||
                 c.source_quality_label || c.source_quality_raw_score)) {
    throw SchemaError(path, "source fields set on a citation without url");
  }
}

template <typename Owner>
void ValidateMarkers(const Owner &owner, const std::string &path) {
  const size_t length = utf8::Length(owner.text);
  for (size_t i = 0; i < owner.citations.size(); ++i) {
    ValidateCitation(owner.citations[i], Index(path + ".citations", i), length);
  }
  for (size_t i = 0; i < owner.citations_needed.size(); ++i) {
    CheckIndex(owner.citations_needed[i].char_index, length,
               Index(path + ".citations_needed", i) + ".char_index");
  }
}

}  // namespace

void ValidateArticle(const Article &a) {
  if (a.hash != ComputeHash(a.title, a.wikicode)) {
    throw SchemaError("hash", "does not match title and wikicode");
  }
  std::set<std::pair<std::string, std::optional<std::string>>> known;
  for (size_t i = 0; i < a.elements.size(); ++i) {
    const std::string path = Index("elements", i);
    if (const auto *h = std::get_if<Heading>(&a.elements[i])) {
      if (h->level < 1 || h->level > 6) throw SchemaError(path + ".level", "outside 1..6");
      ValidateMarkers(*h, path);
      for (const auto &c : h->citations) known.emplace(c.content, c.url);
    } else if (const auto *p = std::get_if<Paragraph>(&a.elements[i])) {
      for (size_t j = 0; j < p->sentences.size(); ++j) {
        const Sentence &s = p->sentences[j];
        const std::string spath = Index(path + ".sentences", j);
        if (s.trailing_whitespace != "" && s.trailing_whitespace != " ") {
          throw SchemaError(spath + ".trailing_whitespace", "must be \"\" or \" \"");
        }
        ValidateMarkers(s, spath);
        for (const auto &c : s.citations) known.emplace(c.content, c.url);
      }
    }
  }
  if (a.text != ArticleText(a.elements)) {
    throw SchemaError("text", "does not equal the joined heading and paragraph texts");
  }
  for (size_t i = 0; i < a.excerpts_with_citations.size(); ++i) {
    const auto &e = a.excerpts_with_citations[i];
    const std::string path = Index("excerpts_with_citations", i);
    if (e.citations.empty()) throw SchemaError(path + ".citations", "empty");
    const size_t length = utf8::Length(e.text);
    for (size_t j = 0; j < e.citations.size(); ++j) {
      ValidateCitation(e.citations[j], Index(path + ".citations", j), length);
      if (!known.count({e.citations[j].content, e.citations[j].url})) {
        throw SchemaError(Index(path + ".citations", j), "citation not present in elements");
      }
    }
  }
}

}  // namespace mwcorpus
