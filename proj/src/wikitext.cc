#include "mwcorpus/wikitext.h"

#include <algorithm>
#include <array>
#include <cstring>
#include <unordered_set>

#include "mwcorpus/entities.h"
#include "mwcorpus/utf8.h"

namespace mwcorpus {

namespace {

constexpr size_t npos = std::string_view::npos;

bool IsAsciiSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && IsAsciiSpace(s.front())) s.remove_prefix(1);
  while (!s.empty() && IsAsciiSpace(s.back())) s.remove_suffix(1);
  return s;
}

char AsciiLower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

bool StartsWithCi(std::string_view text, size_t pos, std::string_view prefix) {
  if (pos > text.size() || text.size() - pos < prefix.size()) return false;
  for (size_t k = 0; k < prefix.size(); ++k) {
    if (AsciiLower(text[pos + k]) != AsciiLower(prefix[k])) return false;
  }
  return true;
}

bool StartsWith(std::string_view text, size_t pos, std::string_view prefix) {
  return pos <= text.size() && text.substr(pos, prefix.size()) == prefix;
}

// ---------------------------------------------------------------------------
// HTML-ish tags

struct Tag {
  std::string name;  // lowercase
  std::string_view attrs;
  bool closing = false;
  bool self_closing = false;
  size_t end = 0;  // just past '>'
};

const std::unordered_set<std::string> &KnownTags() {
  static const std::unordered_set<std::string> kTags = {
      "ref", "references", "nowiki", "math", "chem", "ce", "code", "syntaxhighlight", "source",
      "pre", "gallery", "imagemap", "timeline", "score", "graph", "templatestyles", "mapframe",
      "maplink", "categorytree", "inputbox", "poem", "br", "hr", "span", "div", "small", "big",
      "sup", "sub", "b", "i", "u", "s", "strike", "del", "ins", "em", "strong", "tt", "kbd",
      "samp", "var", "abbr", "cite", "q", "font", "center", "blockquote", "p", "ol", "ul", "li",
      "dl", "dt", "dd", "table", "tr", "td", "th", "caption", "tbody", "thead", "wbr", "section",
      "onlyinclude", "includeonly", "noinclude", "bdi", "bdo", "mark", "time", "data", "rb", "rp",
      "rt", "ruby", "hiero", "indicator", "charinsert", "dfn"};
  return kTags;
}

bool DropsContent(const std::string &name) {
  static const std::unordered_set<std::string> kDrop = {
      "references", "gallery", "imagemap", "timeline", "score", "graph", "templatestyles",
      "mapframe", "maplink", "categorytree", "inputbox", "indicator", "hiero", "includeonly"};
  return kDrop.count(name) > 0;
}

bool LiteralContent(const std::string &name) {
  static const std::unordered_set<std::string> kLiteral = {"nowiki", "math", "chem", "ce",
                                                           "syntaxhighlight", "source", "pre"};
  return kLiteral.count(name) > 0;
}

// Parses a tag starting at text[pos] == '<'. Unknown tag names are not tags.
std::optional<Tag> ParseTag(std::string_view text, size_t pos) {
  size_t i = pos + 1;
  Tag tag;
  if (i < text.size() && text[i] == '/') {
    tag.closing = true;
    ++i;
  }
  const size_t name_start = i;
  while (i < text.size() && (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '-')) {
    tag.name.push_back(AsciiLower(text[i]));
    ++i;
  }
  if (i == name_start || !std::isalpha(static_cast<unsigned char>(text[name_start]))) return std::nullopt;
  if (!KnownTags().count(tag.name)) return std::nullopt;
  if (i < text.size() && !(IsAsciiSpace(text[i]) || text[i] == '>' || text[i] == '/')) {
    return std::nullopt;
  }
  const size_t attrs_start = i;
  char quote = 0;
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (quote) {
      if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      // Only treat quotes as delimiters when they open an attribute value.
      if (i > attrs_start && text[i - 1] == '=') quote = c;
    } else if (c == '>') {
      break;
    } else if (c == '<') {
      return std::nullopt;
    }
  }
  if (i >= text.size()) return std::nullopt;
  size_t attrs_end = i;
  if (attrs_end > attrs_start && text[attrs_end - 1] == '/') {
    tag.self_closing = true;
    --attrs_end;
  }
  tag.attrs = text.substr(attrs_start, attrs_end - attrs_start);
  tag.end = i + 1;
  return tag;
}

std::optional<std::string> TagAttribute(std::string_view attrs, std::string_view key) {
  size_t i = 0;
  while (i < attrs.size()) {
    while (i < attrs.size() && IsAsciiSpace(attrs[i])) ++i;
    const size_t key_start = i;
    while (i < attrs.size() && !IsAsciiSpace(attrs[i]) && attrs[i] != '=') ++i;
    const std::string_view k = attrs.substr(key_start, i - key_start);
    while (i < attrs.size() && IsAsciiSpace(attrs[i])) ++i;
    std::string value;
    if (i < attrs.size() && attrs[i] == '=') {
      ++i;
      while (i < attrs.size() && IsAsciiSpace(attrs[i])) ++i;
      if (i < attrs.size() && (attrs[i] == '"' || attrs[i] == '\'')) {
        const char q = attrs[i++];
        const size_t v_start = i;
        while (i < attrs.size() && attrs[i] != q) ++i;
        value = std::string(attrs.substr(v_start, i - v_start));
        if (i < attrs.size()) ++i;
      } else {
        const size_t v_start = i;
        while (i < attrs.size() && !IsAsciiSpace(attrs[i])) ++i;
        value = std::string(attrs.substr(v_start, i - v_start));
      }
    }
    if (k.empty()) {
      ++i;
      continue;
    }
    if (k.size() == key.size() && StartsWithCi(k, 0, key)) {
      const std::string_view trimmed = Trim(value);
      if (trimmed.empty()) return std::nullopt;
      return std::string(trimmed);
    }
  }
  return std::nullopt;
}

// Finds "</name ...>" at or after from. Returns (start, end) or npos pair.
std::pair<size_t, size_t> FindClosingTag(std::string_view text, size_t from, std::string_view name) {
  size_t i = from;
  while ((i = text.find("</", i)) != npos) {
    if (StartsWithCi(text, i + 2, name)) {
      size_t j = i + 2 + name.size();
      while (j < text.size() && IsAsciiSpace(text[j])) ++j;
      if (j < text.size() && text[j] == '>') return {i, j + 1};
    }
    i += 2;
  }
  return {npos, npos};
}

// ---------------------------------------------------------------------------
// Mojibake: UTF-8 bytes that were decoded as cp1252 or latin-1.

std::optional<uint8_t> Cp1252Byte(char32_t cp) {
  if (cp >= 0x80 && cp <= 0xFF) return static_cast<uint8_t>(cp);
  static const std::array<char32_t, 32> kHigh = {
      U'€', 0,     U'‚', U'ƒ', U'„', U'…', U'†', U'‡', U'ˆ', U'‰', U'Š', U'‹', U'Œ', 0,     U'Ž', 0,
      0,     U'‘', U'’', U'“', U'”', U'•', U'–', U'—', U'˜', U'™', U'š', U'›', U'œ', 0,     U'ž', U'Ÿ'};
  for (size_t k = 0; k < kHigh.size(); ++k) {
    if (kHigh[k] != 0 && kHigh[k] == cp) return static_cast<uint8_t>(0x80 + k);
  }
  return std::nullopt;
}

// If cps[i..] spells a UTF-8 sequence through cp1252, returns the repaired
// code point and the number of code points it replaces.
std::optional<std::pair<char32_t, size_t>> RepairAt(const std::u32string &cps, size_t i) {
  const char32_t lead = cps[i];
  size_t len;
  if (lead >= 0xC2 && lead <= 0xDF) len = 2;
  else if (lead >= 0xE0 && lead <= 0xEF) len = 3;
  else if (lead >= 0xF0 && lead <= 0xF4) len = 4;
  else return std::nullopt;
  if (i + len > cps.size()) return std::nullopt;
  std::string bytes(1, static_cast<char>(lead));
  for (size_t k = 1; k < len; ++k) {
    const auto b = Cp1252Byte(cps[i + k]);
    if (!b || *b < 0x80 || *b > 0xBF) return std::nullopt;
    bytes.push_back(static_cast<char>(*b));
  }
  if (!utf8::IsValid(bytes)) return std::nullopt;
  size_t p = 0;
  const char32_t cp = utf8::Next(bytes, p);
  return std::make_pair(cp, len);
}

// ---------------------------------------------------------------------------
// Bracket matching

size_t SkipComment(std::string_view text, size_t pos) {
  const size_t end = text.find("-->", pos + 4);
  return end == npos ? text.size() : end + 3;
}

size_t FindLinkEnd(std::string_view text, size_t pos) {
  int depth = 0;
  size_t i = pos;
  while (i < text.size()) {
    if (StartsWith(text, i, "[[")) {
      ++depth;
      i += 2;
    } else if (StartsWith(text, i, "]]")) {
      --depth;
      i += 2;
      if (depth == 0) return i;
    } else if (StartsWith(text, i, "{{")) {
      const size_t end = FindTemplateEnd(text, i);
      i = end == npos ? i + 2 : end;
    } else if (text[i] == '\n' && i + 1 < text.size() && text[i + 1] == '\n') {
      return npos;
    } else {
      ++i;
    }
  }
  return npos;
}

// Splits on '|' at nesting depth zero with respect to templates and links.
std::vector<std::string_view> SplitTopLevel(std::string_view text) {
  std::vector<std::string_view> parts;
  int braces = 0;
  int brackets = 0;
  size_t start = 0;
  size_t i = 0;
  while (i < text.size()) {
    if (StartsWith(text, i, "{{")) {
      ++braces;
      i += 2;
    } else if (StartsWith(text, i, "}}") && braces > 0) {
      --braces;
      i += 2;
    } else if (StartsWith(text, i, "[[")) {
      ++brackets;
      i += 2;
    } else if (StartsWith(text, i, "]]") && brackets > 0) {
      --brackets;
      i += 2;
    } else if (StartsWith(text, i, "<!--")) {
      i = SkipComment(text, i);
    } else if (StartsWithCi(text, i, "<nowiki>")) {
      const auto [s, e] = FindClosingTag(text, i + 8, "nowiki");
      i = e == npos ? i + 8 : e;
    } else if (text[i] == '|' && braces == 0 && brackets == 0) {
      parts.push_back(text.substr(start, i - start));
      start = ++i;
    } else {
      ++i;
    }
  }
  parts.push_back(text.substr(start));
  return parts;
}

std::string ReplaceUnderscores(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool space = false;
  for (char c : s) {
    if (c == '_' || IsAsciiSpace(c)) {
      space = true;
      continue;
    }
    if (space && !out.empty()) out.push_back(' ');
    space = false;
    out.push_back(c);
  }
  return out;
}

bool HasPrefix(std::string_view title, const std::vector<std::string> &prefixes) {
  for (const auto &p : prefixes) {
    if (p.empty()) continue;
    // Allow "File :" style spacing by comparing against the squeezed title.
    if (utf8::StartsWithFolded(title, p)) return true;
    const std::string_view bare = std::string_view(p).substr(0, p.size() - 1);
    if (utf8::StartsWithFolded(title, bare)) {
      std::string_view rest = title.substr(bare.size());
      while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
      if (!rest.empty() && rest.front() == ':') return true;
    }
  }
  return false;
}

enum class LinkKind { kDrop, kDisplay, kInterwiki };

struct LinkParts {
  LinkKind kind = LinkKind::kDisplay;
  std::string_view target;
  std::optional<std::string_view> display;
};

// inner is the text between "[[" and "]]".
LinkParts ClassifyLink(std::string_view inner, const LanguageConfig &config) {
  LinkParts parts;
  const size_t bar = [&] {
    // First '|' outside nested templates.
    int depth = 0;
    for (size_t i = 0; i < inner.size(); ++i) {
      if (StartsWith(inner, i, "{{")) { ++depth; ++i; }
      else if (StartsWith(inner, i, "}}") && depth > 0) { --depth; ++i; }
      else if (inner[i] == '|' && depth == 0) return i;
    }
    return npos;
  }();
  std::string_view target = Trim(bar == npos ? inner : inner.substr(0, bar));
  if (bar != npos) parts.display = inner.substr(bar + 1);
  const bool colon_lead = !target.empty() && target.front() == ':';
  if (colon_lead) target = Trim(target.substr(1));
  parts.target = target;
  if (HasPrefix(target, config.file_media_prefixes)) {
    parts.kind = LinkKind::kDrop;
  } else if (HasPrefix(target, config.category_prefixes)) {
    parts.kind = colon_lead ? LinkKind::kDisplay : LinkKind::kDrop;
  } else if (HasPrefix(target, config.interwiki_prefixes)) {
    parts.kind = LinkKind::kInterwiki;
  }
  return parts;
}

// ---------------------------------------------------------------------------
// Templates

bool IsCitationNeeded(const std::string &normalized, const LanguageConfig &config) {
  return MatchesTitle(normalized, config.citation_needed_templates);
}

bool IsCitationTemplate(const std::string &normalized, const LanguageConfig &config) {
  return MatchesTitle(normalized, config.citation_templates);
}

// Every template call that appears anywhere in text, outermost first.
void CollectTemplates(std::string_view text, std::vector<std::string_view> &out, int depth = 0) {
  if (depth > 20) return;
  size_t i = 0;
  while ((i = text.find("{{", i)) != npos) {
    const size_t end = FindTemplateEnd(text, i);
    if (end == npos) {
      i += 2;
      continue;
    }
    const std::string_view raw = text.substr(i, end - i);
    out.push_back(raw);
    CollectTemplates(raw.substr(2, raw.size() - 4), out, depth + 1);
    i = end;
  }
}

std::optional<std::string> TemplateParam(std::string_view content, std::string_view key) {
  std::vector<std::string_view> templates;
  CollectTemplates(content, templates);
  for (const auto raw : templates) {
    const TemplateCall call = ParseTemplateCall(raw);
    for (const auto &[k, v] : call.params) {
      if (k.size() == key.size() && StartsWithCi(k, 0, key) && !Trim(v).empty()) {
        return std::string(Trim(v));
      }
    }
  }
  return std::nullopt;
}

// First http(s) URL in text, with brackets and trailing punctuation removed.
std::optional<std::string> FirstBareUrl(std::string_view text) {
  size_t best = npos;
  for (std::string_view scheme : {"http://", "https://"}) {
    for (size_t i = 0; i + scheme.size() <= text.size(); ++i) {
      if (StartsWithCi(text, i, scheme)) {
        best = std::min(best, i);
        break;
      }
    }
  }
  if (best == npos) return std::nullopt;
  size_t end = best;
  while (end < text.size()) {
    const char c = text[end];
    if (IsAsciiSpace(c) || c == '[' || c == ']' || c == '<' || c == '>' || c == '"' || c == '|' ||
        c == '{' || c == '}') {
      break;
    }
    ++end;
  }
  std::string url(text.substr(best, end - best));
  while (!url.empty()) {
    const char c = url.back();
    if (c == '.' || c == ',' || c == ';' || c == ':' || c == '!' || c == '?' || c == '\'') {
      url.pop_back();
    } else if (c == ')' && std::count(url.begin(), url.end(), '(') < std::count(url.begin(), url.end(), ')')) {
      url.pop_back();
    } else {
      break;
    }
  }
  const size_t scheme_end = url.find("://");
  if (scheme_end == npos || url.size() <= scheme_end + 3) return std::nullopt;
  return url;
}

// ---------------------------------------------------------------------------
// Inline rendering

class InlineRenderer {
 public:
  InlineRenderer(const LanguageConfig &config, const NamedRefs *named_refs)
      : config_(config), named_refs_(named_refs) {}

  void Render(std::string_view text, int depth = 0) {
    if (depth > 30) {
      raw_.append(text);
      return;
    }
    size_t i = 0;
    const size_t n = text.size();
    while (i < n) {
      const char c = text[i];
      const char next = i + 1 < n ? text[i + 1] : '\0';
      bool consumed = false;
      if (c == '<') {
        consumed = HandleAngle(text, i);
      } else if (c == '{' && next == '{') {
        consumed = HandleTemplate(text, i);
      } else if (c == '[' && next == '[') {
        consumed = HandleLink(text, i, depth);
      } else if (c == '[') {
        consumed = HandleExternal(text, i, depth);
      } else if (c == '\'' && next == '\'') {
        HandleQuotes(text, i);
        consumed = true;
      } else if (c == '&') {
        if (auto decoded = DecodeEntity(text, i)) {
          utf8::Append(raw_, decoded->first);
          i += decoded->second;
          consumed = true;
        }
      } else if (c == '_' && next == '_') {
        consumed = HandleMagicWord(text, i);
      }
      if (!consumed) raw_.push_back(text[i++]);
    }
  }

  ParsedFragment Finish() {
    ParsedFragment out;
    out.warnings = warnings_;
    const std::string sane = utf8::Sanitize(raw_);
    // Code points with their byte positions in raw_.
    std::u32string cps;
    std::vector<size_t> positions;
    {
      size_t p = 0;
      while (p < sane.size()) {
        positions.push_back(p);
        cps.push_back(utf8::Next(sane, p));
      }
      positions.push_back(sane.size());
    }
    size_t marker = 0;
    int64_t out_len = 0;
    bool pending_space = false;
    auto emit_markers = [&](size_t upto) {
      while (marker < markers_.size() && markers_[marker].pos <= upto) {
        Place(out, markers_[marker], out_len);
        ++marker;
      }
    };
    size_t k = 0;
    while (k < cps.size()) {
      emit_markers(positions[k]);
      const char32_t cp = cps[k];
      if (cp < 0x80 && IsAsciiSpace(static_cast<char>(cp))) {
        if (out_len > 0) pending_space = true;
        ++k;
        continue;
      }
      char32_t emit = cp;
      size_t width = 1;
      if (auto repaired = RepairAt(cps, k)) {
        const size_t span_end = positions[k + repaired->second];
        const bool marker_inside = marker < markers_.size() && markers_[marker].pos < span_end;
        if (!marker_inside) {
          emit = repaired->first;
          width = repaired->second;
        }
      }
      if (pending_space) {
        out.clean_text.push_back(' ');
        ++out_len;
        pending_space = false;
      }
      utf8::Append(out.clean_text, emit);
      ++out_len;
      k += width;
    }
    while (marker < markers_.size()) Place(out, markers_[marker++], out_len);
    return out;
  }

 private:
  struct Marker {
    size_t pos;
    bool needed;
    std::string content;
    std::optional<std::string> name;
  };

  static void Place(ParsedFragment &out, const Marker &m, int64_t offset) {
    if (m.needed) {
      out.citations_needed.push_back({m.content, offset});
    } else {
      out.citations.push_back({m.content, m.name, offset});
    }
  }

  void AddCitation(std::string content, std::optional<std::string> name) {
    markers_.push_back({raw_.size(), false, std::move(content), std::move(name)});
  }

  bool HandleAngle(std::string_view text, size_t &i) {
    if (StartsWith(text, i, "<!--")) {
      i = SkipComment(text, i);
      return true;
    }
    const auto tag = ParseTag(text, i);
    if (!tag) return false;
    if (tag->closing) {
      i = tag->end;
      return true;
    }
    if (tag->name == "ref") {
      auto name = TagAttribute(tag->attrs, "name");
      if (tag->self_closing) {
        AddCitation(Resolve(name), name);
        i = tag->end;
        return true;
      }
      const auto [close_start, close_end] = FindClosingTag(text, tag->end, "ref");
      if (close_start == npos) {
        ++warnings_;
        AddCitation(std::string(text.substr(i)), name);
        i = text.size();
        return true;
      }
      const std::string_view body = text.substr(tag->end, close_start - tag->end);
      if (Trim(body).empty() && name) {
        AddCitation(Resolve(name), name);
      } else {
        AddCitation(std::string(text.substr(i, close_end - i)), name);
      }
      i = close_end;
      return true;
    }
    if (tag->name == "br" || tag->name == "hr") {
      raw_.push_back(' ');
      i = tag->end;
      return true;
    }
    if (tag->self_closing) {
      i = tag->end;
      return true;
    }
    if (DropsContent(tag->name) || LiteralContent(tag->name)) {
      const auto [close_start, close_end] = FindClosingTag(text, tag->end, tag->name);
      if (close_start == npos) {
        i = tag->end;
        return true;
      }
      if (LiteralContent(tag->name)) {
        raw_.append(DecodeEntities(text.substr(tag->end, close_start - tag->end)));
      }
      i = close_end;
      return true;
    }
    i = tag->end;
    return true;
  }

  std::string Resolve(const std::optional<std::string> &name) const {
    if (!name || !named_refs_) return "";
    const auto it = named_refs_->find(*name);
    return it == named_refs_->end() ? "" : it->second;
  }

  bool HandleTemplate(std::string_view text, size_t &i) {
    const size_t end = FindTemplateEnd(text, i);
    if (end == npos) return false;
    const std::string_view raw = text.substr(i, end - i);
    const TemplateCall call = ParseTemplateCall(raw);
    const std::string name = NormalizeTemplateName(call.name, config_);
    if (IsCitationNeeded(name, config_)) {
      markers_.push_back({raw_.size(), true, std::string(raw), std::nullopt});
    } else if (IsCitationTemplate(name, config_)) {
      AddCitation(std::string(raw), std::nullopt);
    }
    i = end;
    return true;
  }

  bool HandleLink(std::string_view text, size_t &i, int depth) {
    const size_t end = FindLinkEnd(text, i);
    if (end == npos) return false;
    const std::string_view inner = text.substr(i + 2, end - i - 4);
    const LinkParts parts = ClassifyLink(inner, config_);
    switch (parts.kind) {
      case LinkKind::kDrop:
        break;
      case LinkKind::kInterwiki:
        if (parts.display) Render(*parts.display, depth + 1);
        break;
      case LinkKind::kDisplay:
        if (parts.display && !Trim(*parts.display).empty()) {
          Render(*parts.display, depth + 1);
        } else {
          raw_.append(DecodeEntities(parts.target));
        }
        break;
    }
    i = end;
    return true;
  }

  bool HandleExternal(std::string_view text, size_t &i, int depth) {
    static constexpr std::string_view kSchemes[] = {"http://", "https://", "ftp://", "//",
                                                    "mailto:", "news:", "irc://"};
    bool is_url = false;
    for (auto scheme : kSchemes) is_url = is_url || StartsWithCi(text, i + 1, scheme);
    if (!is_url) return false;
    size_t close = i + 1;
    while (close < text.size() && text[close] != ']' && text[close] != '\n') ++close;
    if (close >= text.size() || text[close] != ']') return false;
    const std::string_view inner = text.substr(i + 1, close - i - 1);
    const size_t space = inner.find_first_of(" \t");
    if (space != npos) Render(Trim(inner.substr(space + 1)), depth + 1);
    i = close + 1;
    return true;
  }

  void HandleQuotes(std::string_view text, size_t &i) {
    size_t run = 0;
    while (i + run < text.size() && text[i + run] == '\'') ++run;
    if (run == 4) {
      raw_.push_back('\'');
    } else if (run > 5) {
      raw_.append(run - 5, '\'');
    }
    i += run;
  }

  bool HandleMagicWord(std::string_view text, size_t &i) {
    size_t j = i + 2;
    while (j < text.size() && std::isupper(static_cast<unsigned char>(text[j]))) ++j;
    if (j == i + 2 || !StartsWith(text, j, "__")) return false;
    i = j + 2;
    return true;
  }

  const LanguageConfig &config_;
  const NamedRefs *named_refs_;
  std::string raw_;
  std::vector<Marker> markers_;
  int warnings_ = 0;
};

// ---------------------------------------------------------------------------
// Block parsing

std::string StripComments(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  size_t i = 0;
  while (i < text.size()) {
    const size_t start = text.find("<!--", i);
    if (start == npos) {
      out.append(text.substr(i));
      break;
    }
    out.append(text.substr(i, start - i));
    i = SkipComment(text, start);
  }
  return out;
}

size_t LineEnd(std::string_view text, size_t pos) {
  const size_t nl = text.find('\n', pos);
  return nl == npos ? text.size() : nl;
}

size_t NextLine(std::string_view text, size_t pos) {
  const size_t nl = text.find('\n', pos);
  return nl == npos ? text.size() : nl + 1;
}

// End of the logical line starting at pos: a physical line extended over
// any template, link or tag pair that spans newlines.
size_t LogicalLineEnd(std::string_view text, size_t pos) {
  size_t i = pos;
  while (i < text.size() && text[i] != '\n') {
    if (StartsWith(text, i, "{{")) {
      const size_t end = FindTemplateEnd(text, i);
      i = end == npos ? i + 2 : end;
    } else if (StartsWithCi(text, i, "<ref")) {
      const auto tag = ParseTag(text, i);
      if (tag && tag->name == "ref" && !tag->closing && !tag->self_closing) {
        const auto [s, e] = FindClosingTag(text, tag->end, "ref");
        i = e == npos ? tag->end : e;
      } else {
        i = tag ? tag->end : i + 1;
      }
    } else if (text[i] == '<') {
      const auto tag = ParseTag(text, i);
      if (tag && !tag->closing && !tag->self_closing && LiteralContent(tag->name)) {
        const auto [s, e] = FindClosingTag(text, tag->end, tag->name);
        i = e == npos ? tag->end : e;
      } else {
        ++i;
      }
    } else {
      ++i;
    }
  }
  return i;
}

size_t FindTableEnd(std::string_view text, size_t pos) {
  int depth = 0;
  size_t line = pos;
  while (line < text.size()) {
    const size_t end = LineEnd(text, line);
    std::string_view l = text.substr(line, end - line);
    while (!l.empty() && (l.front() == ' ' || l.front() == ':' || l.front() == '\t')) l.remove_prefix(1);
    if (StartsWith(l, 0, "{|")) ++depth;
    if (StartsWith(l, 0, "|}")) {
      --depth;
      if (depth == 0) return end;
    }
    line = end + 1;
  }
  return npos;
}

std::optional<std::pair<int, std::string_view>> MatchHeading(std::string_view line) {
  const std::string_view t = Trim(line);
  if (t.size() < 3 || t.front() != '=' || t.back() != '=') return std::nullopt;
  size_t lead = 0;
  while (lead < t.size() && t[lead] == '=') ++lead;
  size_t trail = 0;
  while (trail < t.size() && t[t.size() - 1 - trail] == '=') ++trail;
  if (lead >= t.size()) return std::nullopt;
  const size_t level = std::min<size_t>({lead, trail, 6});
  if (level * 2 >= t.size()) return std::nullopt;
  const std::string_view inner = t.substr(level, t.size() - 2 * level);
  if (Trim(inner).empty()) return std::nullopt;
  return std::make_pair(static_cast<int>(level), inner);
}

Citation ToCitation(const FragmentCitation &fc) {
  Citation c;
  c.content = fc.content;
  c.char_index = fc.char_index;
  c.name = fc.name;
  c.url = ExtractUrl(fc.content);
  c.source_snippet = ExtractSnippet(fc.content);
  return c;
}

class BlockParser {
 public:
  BlockParser(std::string_view wikicode, const LanguageConfig &config, const Segmenter &segmenter)
      : text_(StripComments(wikicode)), config_(config), segmenter_(segmenter) {
    named_refs_ = CollectNamedRefs(text_);
  }

  std::vector<Element> Run(ParseStats &stats) {
    const std::string_view text = text_;
    size_t pos = 0;
    while (pos < text.size()) {
      const size_t before = pos;
      try {
        pos = Step(text, pos);
      } catch (...) {
        groups_.clear();
        const size_t end = NextLine(text, before);
        elements_.push_back(Preformatted{std::string(text.substr(before, end - before))});
        ++stats.degraded_blocks;
        pos = end;
      }
      if (pos <= before) pos = NextLine(text, before);
    }
    try {
      Flush();
    } catch (...) {
      ++stats.degraded_blocks;
      groups_.clear();
    }
    stats.warnings += warnings_;
    return std::move(elements_);
  }

 private:
  struct Group {
    std::string raw;
    bool list_item = false;
  };

  size_t Step(std::string_view text, size_t pos) {
    const size_t line_end = LineEnd(text, pos);
    const std::string_view line = text.substr(pos, line_end - pos);
    const std::string_view trimmed = Trim(line);
    if (trimmed.empty()) {
      Flush();
      return line_end + 1;
    }
    if (line.front() == '=') {
      if (auto heading = MatchHeading(line)) {
        Flush();
        EmitHeading(heading->first, heading->second);
        return line_end + 1;
      }
    }
    size_t lead = 0;
    while (lead < line.size() && (line[lead] == ' ' || line[lead] == ':' || line[lead] == '\t')) ++lead;
    const size_t content_pos = pos + lead;

    if (StartsWith(text, content_pos, "{|")) {
      const size_t end = FindTableEnd(text, content_pos);
      Flush();
      if (end == npos) {
        ++warnings_;
        elements_.push_back(Preformatted{std::string(text.substr(pos))});
        return text.size();
      }
      elements_.push_back(Table{std::string(text.substr(content_pos, end - content_pos))});
      return end + 1;
    }

    if (StartsWith(text, content_pos, "{{")) {
      const size_t end = FindTemplateEnd(text, content_pos);
      if (end != npos) {
        const std::string_view raw = text.substr(content_pos, end - content_pos);
        const std::string name = NormalizeTemplateName(ParseTemplateCall(raw).name, config_);
        const size_t after_line = LineEnd(text, end);
        const bool alone = Trim(text.substr(end, after_line - end)).empty();
        if (MatchesTitle(name, config_.infobox_template_titles)) {
          Flush();
          elements_.push_back(Infobox{std::string(raw)});
          return alone ? after_line + 1 : end;
        }
        if (alone && !IsCitationTemplate(name, config_) && !IsCitationNeeded(name, config_)) {
          Flush();
          return after_line + 1;
        }
      }
    }

    if (auto next = BlockTag(text, pos, content_pos)) return *next;

    if (StartsWith(trimmed, 0, "----")) {
      Flush();
      return line_end + 1;
    }

    if (line.front() == ' ' || line.front() == '\t') {
      Flush();
      std::string content;
      size_t p = pos;
      while (p < text.size() && (text[p] == ' ' || text[p] == '\t')) {
        const size_t e = LineEnd(text, p);
        const std::string_view l = text.substr(p, e - p);
        if (Trim(l).empty()) break;
        content.append(l.substr(1));
        content.push_back('\n');
        p = e + 1;
      }
      elements_.push_back(Preformatted{std::move(content)});
      return p;
    }

    const size_t logical_end = LogicalLineEnd(text, pos);
    std::string_view body = text.substr(pos, logical_end - pos);
    const char first = line.front();
    if (first == '*' || first == '#' || first == ';' || first == ':') {
      size_t k = 0;
      while (k < body.size() && std::strchr("*#;:", body[k]) != nullptr) ++k;
      groups_.push_back({std::string(body.substr(k)), true});
    } else if (!groups_.empty() && !groups_.back().list_item) {
      groups_.back().raw.push_back('\n');
      groups_.back().raw.append(body);
    } else {
      groups_.push_back({std::string(body), false});
    }
    return logical_end + 1;
  }

  // Math, code, preformatted and skipped tag blocks at the start of a line.
  std::optional<size_t> BlockTag(std::string_view text, size_t pos, size_t content_pos) {
    if (content_pos >= text.size() || text[content_pos] != '<') return std::nullopt;
    const auto tag = ParseTag(text, content_pos);
    if (!tag || tag->closing || tag->self_closing) return std::nullopt;
    const std::string &name = tag->name;
    const bool math = name == "math" || name == "chem" || name == "ce";
    const bool code = name == "syntaxhighlight" || name == "source" || name == "code";
    const bool pre = name == "pre";
    const bool skip = DropsContent(name) && name != "includeonly";
    if (!(math || code || pre || skip)) return std::nullopt;
    const auto [close_start, close_end] = FindClosingTag(text, tag->end, name);
    if (close_start == npos) return std::nullopt;
    const size_t after_line = LineEnd(text, close_end);
    const std::string_view rest = Trim(text.substr(close_end, after_line - close_end));
    const bool rest_trivial = rest.find_first_not_of(".,;:") == npos;
    if (!rest_trivial && !skip) return std::nullopt;
    if (content_pos != pos && !math && !skip) {
      // Indented code or pre stays with the surrounding prose.
      const std::string_view indent = text.substr(pos, content_pos - pos);
      if (indent.find(':') == npos) return std::nullopt;
    }
    const std::string_view body = text.substr(tag->end, close_start - tag->end);
    Flush();
    if (math) {
      elements_.push_back(Math{std::string(body)});
    } else if (code) {
      Code c;
      c.content = std::string(body);
      if (name != "code") c.language = TagAttribute(tag->attrs, "lang");
      elements_.push_back(std::move(c));
    } else if (pre) {
      elements_.push_back(Preformatted{DecodeEntities(body)});
    }
    if (skip && !rest_trivial) return close_end;
    return after_line + 1;
  }

  void EmitHeading(int level, std::string_view inner) {
    const ParsedFragment f = ExtractCitations(inner, config_, &named_refs_);
    warnings_ += f.warnings;
    Heading h;
    h.level = level;
    h.text = f.clean_text;
    const int64_t len = static_cast<int64_t>(utf8::Length(h.text));
    for (const auto &fc : f.citations) {
      Citation c = ToCitation(fc);
      c.char_index = std::min(c.char_index, len);
      h.citations.push_back(std::move(c));
    }
    for (const auto &fc : f.citations_needed) {
      h.citations_needed.push_back({fc.content, std::min(fc.char_index, len)});
    }
    elements_.push_back(std::move(h));
  }

  void Flush() {
    if (groups_.empty()) return;
    std::vector<Group> groups;
    groups.swap(groups_);
    std::vector<std::vector<Sentence>> rendered;
    for (const auto &g : groups) {
      const ParsedFragment f = ExtractCitations(g.raw, config_, &named_refs_);
      warnings_ += f.warnings;
      if (f.clean_text.empty()) {
        warnings_ += static_cast<int>(f.citations.size() + f.citations_needed.size());
        continue;
      }
      std::vector<Citation> citations;
      for (const auto &fc : f.citations) citations.push_back(ToCitation(fc));
      std::vector<CitationNeeded> needed;
      for (const auto &fc : f.citations_needed) needed.push_back({fc.content, fc.char_index});
      auto sentences = AssignOffsets(segmenter_.Segment(f.clean_text), citations, needed, &warnings_);
      if (!sentences.empty()) rendered.push_back(std::move(sentences));
    }
    if (rendered.empty()) return;
    Paragraph p;
    for (size_t k = 0; k < rendered.size(); ++k) {
      if (k + 1 < rendered.size()) rendered[k].back().trailing_whitespace = " ";
      for (auto &s : rendered[k]) p.sentences.push_back(std::move(s));
    }
    elements_.push_back(std::move(p));
  }

  std::string text_;
  const LanguageConfig &config_;
  const Segmenter &segmenter_;
  NamedRefs named_refs_;
  std::vector<Element> elements_;
  std::vector<Group> groups_;
  int warnings_ = 0;
};

}  // namespace

size_t FindTemplateEnd(std::string_view text, size_t pos) {
  int depth = 0;
  size_t i = pos;
  while (i < text.size()) {
    if (StartsWith(text, i, "{{")) {
      ++depth;
      i += 2;
    } else if (StartsWith(text, i, "}}")) {
      --depth;
      i += 2;
      if (depth <= 0) return i;
    } else if (StartsWith(text, i, "<!--")) {
      i = SkipComment(text, i);
    } else if (StartsWithCi(text, i, "<nowiki>")) {
      const auto [s, e] = FindClosingTag(text, i + 8, "nowiki");
      i = e == npos ? i + 8 : e;
    } else {
      ++i;
    }
  }
  return npos;
}

TemplateCall ParseTemplateCall(std::string_view raw) {
  TemplateCall call;
  if (raw.size() < 4) return call;
  const auto parts = SplitTopLevel(raw.substr(2, raw.size() - 4));
  call.name = std::string(Trim(parts[0]));
  int positional = 0;
  for (size_t k = 1; k < parts.size(); ++k) {
    const std::string_view part = parts[k];
    // '=' at depth zero separates a named parameter.
    size_t eq = npos;
    int depth = 0;
    for (size_t i = 0; i < part.size(); ++i) {
      if (StartsWith(part, i, "{{") || StartsWith(part, i, "[[")) { ++depth; ++i; }
      else if ((StartsWith(part, i, "}}") || StartsWith(part, i, "]]")) && depth > 0) { --depth; ++i; }
      else if (part[i] == '<' || part[i] == '\n') break;
      else if (part[i] == '=' && depth == 0) { eq = i; break; }
    }
    if (eq != npos) {
      call.params.emplace_back(std::string(Trim(part.substr(0, eq))), std::string(Trim(part.substr(eq + 1))));
    } else {
      call.params.emplace_back(std::to_string(++positional), std::string(part));
    }
  }
  return call;
}

std::string NormalizeTemplateName(std::string_view name, const LanguageConfig &config) {
  std::string n = ReplaceUnderscores(Trim(name));
  for (std::string_view magic : {"safesubst:", "subst:", "msgnw:", "msg:"}) {
    if (StartsWithCi(n, 0, magic)) n = std::string(Trim(std::string_view(n).substr(magic.size())));
  }
  if (!n.empty() && n.front() == ':') n = std::string(Trim(std::string_view(n).substr(1)));
  for (const auto &prefix : config.template_prefixes) {
    if (utf8::StartsWithFolded(n, prefix)) {
      const size_t bytes = utf8::ByteOffset(n, utf8::Length(prefix));
      n = std::string(Trim(std::string_view(n).substr(bytes)));
      break;
    }
  }
  return n;
}

NamedRefs CollectNamedRefs(std::string_view wikicode) {
  NamedRefs refs;
  size_t i = 0;
  while ((i = wikicode.find('<', i)) != npos) {
    if (StartsWith(wikicode, i, "<!--")) {
      i = SkipComment(wikicode, i);
      continue;
    }
    if (!StartsWithCi(wikicode, i, "<ref")) {
      ++i;
      continue;
    }
    const auto tag = ParseTag(wikicode, i);
    if (!tag || tag->name != "ref" || tag->closing || tag->self_closing) {
      ++i;
      continue;
    }
    const auto [close_start, close_end] = FindClosingTag(wikicode, tag->end, "ref");
    if (close_start == npos) {
      i = tag->end;
      continue;
    }
    const auto name = TagAttribute(tag->attrs, "name");
    const std::string_view body = wikicode.substr(tag->end, close_start - tag->end);
    if (name && !Trim(body).empty()) {
      refs.emplace(*name, std::string(wikicode.substr(i, close_end - i)));
    }
    i = close_end;
  }
  return refs;
}

ParsedFragment ExtractCitations(std::string_view fragment, const LanguageConfig &config,
                                const NamedRefs *named_refs) {
  InlineRenderer renderer(config, named_refs);
  renderer.Render(fragment);
  return renderer.Finish();
}

ParsedFragment ExtractCitations(std::string_view fragment) {
  static const LanguageConfig kEnglish = DefaultLanguageConfig("en");
  return ExtractCitations(fragment, kEnglish);
}

std::optional<std::string> ExtractUrl(std::string_view citation_content) {
  if (auto value = TemplateParam(citation_content, "url")) {
    if (auto url = FirstBareUrl(*value)) return url;
    std::string v = *value;
    while (!v.empty() && (v.front() == '[' || v.front() == '<')) v.erase(v.begin());
    while (!v.empty() && (v.back() == ']' || v.back() == '>')) v.pop_back();
    if (v.find('.') != std::string::npos && v.find(' ') == std::string::npos) return v;
  }
  return FirstBareUrl(citation_content);
}

std::optional<std::string> ExtractSnippet(std::string_view citation_content) {
  return TemplateParam(citation_content, "quote");
}

std::string StripWikilinks(std::string_view text, const LanguageConfig &config) {
  std::string out;
  out.reserve(text.size());
  size_t i = 0;
  while (i < text.size()) {
    if (StartsWith(text, i, "[[")) {
      const size_t end = FindLinkEnd(text, i);
      if (end != npos) {
        const LinkParts parts = ClassifyLink(text.substr(i + 2, end - i - 4), config);
        if (parts.kind == LinkKind::kInterwiki) {
          if (parts.display) out.append(*parts.display);
        } else if (parts.kind == LinkKind::kDisplay) {
          if (parts.display && !Trim(*parts.display).empty()) {
            out.append(StripWikilinks(*parts.display, config));
          } else {
            out.append(parts.target);
          }
        }
        i = end;
        continue;
      }
    }
    out.push_back(text[i++]);
  }
  return out;
}

std::vector<Element> ParseArticle(std::string_view wikicode, const LanguageConfig &config,
                                  const Segmenter &segmenter, ParseStats *stats) {
  ParseStats local;
  std::vector<Element> elements;
  try {
    BlockParser parser(wikicode, config, segmenter);
    elements = parser.Run(local);
  } catch (...) {
    elements.clear();
    elements.push_back(Preformatted{utf8::Sanitize(wikicode)});
    ++local.degraded_blocks;
  }
  if (stats) {
    stats->warnings += local.warnings;
    stats->degraded_blocks += local.degraded_blocks;
  }
  return elements;
}

std::vector<Element> ParseArticle(std::string_view wikicode, const LanguageConfig &config,
                                  ParseStats *stats) {
  const RuleSegmenter segmenter(config.segmenter);
  return ParseArticle(wikicode, config, segmenter, stats);
}

}  // namespace mwcorpus
