#include "mwcorpus/html_text.h"

#include <cctype>
#include <unordered_set>
#include <vector>

#include "mwcorpus/entities.h"
#include "mwcorpus/utf8.h"

namespace mwcorpus {

namespace {

constexpr size_t npos = std::string_view::npos;

bool IsAsciiSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::string Lower(std::string_view s) {
  std::string out(s);
  for (auto &c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool StartsWithCi(std::string_view text, size_t pos, std::string_view prefix) {
  if (pos > text.size() || text.size() - pos < prefix.size()) return false;
  for (size_t k = 0; k < prefix.size(); ++k) {
    if (std::tolower(static_cast<unsigned char>(text[pos + k])) != prefix[k]) return false;
  }
  return true;
}

struct HtmlTag {
  std::string name;
  bool closing = false;
  bool self_closing = false;
  std::string href;
  std::string class_id;  // class and id values, lowercased
  std::string role;
  bool hidden = false;
  size_t end = 0;
};

// Parses the tag at html[pos] == '<'; returns nothing for stray '<'.
std::optional<HtmlTag> ParseHtmlTag(std::string_view html, size_t pos) {
  HtmlTag tag;
  size_t i = pos + 1;
  if (i < html.size() && html[i] == '/') {
    tag.closing = true;
    ++i;
  }
  if (i >= html.size() || !std::isalpha(static_cast<unsigned char>(html[i]))) return std::nullopt;
  while (i < html.size() && (std::isalnum(static_cast<unsigned char>(html[i])) || html[i] == '-' || html[i] == ':')) {
    tag.name.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(html[i]))));
    ++i;
  }
  while (i < html.size() && html[i] != '>') {
    if (IsAsciiSpace(html[i])) {
      ++i;
      continue;
    }
    if (html[i] == '/') {
      tag.self_closing = true;
      ++i;
      continue;
    }
    const size_t key_start = i;
    while (i < html.size() && !IsAsciiSpace(html[i]) && html[i] != '=' && html[i] != '>' && html[i] != '/') ++i;
    const std::string key = Lower(html.substr(key_start, i - key_start));
    std::string value;
    bool has_value = false;
    while (i < html.size() && IsAsciiSpace(html[i])) ++i;
    if (i < html.size() && html[i] == '=') {
      has_value = true;
      ++i;
      while (i < html.size() && IsAsciiSpace(html[i])) ++i;
      if (i < html.size() && (html[i] == '"' || html[i] == '\'')) {
        const char q = html[i++];
        const size_t v = i;
        while (i < html.size() && html[i] != q) ++i;
        value = std::string(html.substr(v, i - v));
        if (i < html.size()) ++i;
      } else {
        const size_t v = i;
        while (i < html.size() && !IsAsciiSpace(html[i]) && html[i] != '>') ++i;
        value = std::string(html.substr(v, i - v));
      }
    }
    if (key.empty()) {
      ++i;
      continue;
    }
    tag.self_closing = false;
    if (key == "href") tag.href = DecodeEntities(value);
    if (key == "class" || key == "id") tag.class_id += " " + Lower(value);
    if (key == "role") tag.role = Lower(value);
    if (key == "hidden") tag.hidden = true;
    if (key == "aria-hidden" && has_value && Lower(value) == "true") tag.hidden = true;
  }
  if (i >= html.size()) return std::nullopt;
  tag.end = i + 1;
  return tag;
}

const std::unordered_set<std::string> kRawText = {"script", "style", "textarea", "title", "xmp"};
const std::unordered_set<std::string> kSkipped = {
    "head", "nav", "header", "footer", "aside", "form", "noscript", "template", "svg", "iframe",
    "object", "canvas", "button", "select", "menu", "dialog", "audio", "video", "map"};
const std::unordered_set<std::string> kVoid = {"area", "base", "br", "col", "embed", "hr", "img",
                                               "input", "link", "meta", "param", "source", "track",
                                               "wbr"};
const std::unordered_set<std::string> kBlock = {
    "p", "div", "section", "article", "main", "blockquote", "pre", "ul", "ol", "dl", "dt", "dd",
    "table", "thead", "tbody", "tfoot", "caption", "figure", "figcaption", "address", "center",
    "body", "html", "hr", "details", "summary", "fieldset", "legend"};

bool BoilerplateAttributes(const HtmlTag &tag) {
  if (tag.hidden) return true;
  if (tag.role == "navigation" || tag.role == "banner" || tag.role == "contentinfo" ||
      tag.role == "complementary" || tag.role == "search") {
    return true;
  }
  if (tag.class_id.empty()) return false;
  static const char *kWords[] = {"navbar", "navigation", "menu", "footer", "sidebar", "cookie",
                                 "breadcrumb", "share", "social", "advert", "related", "banner",
                                 "popup", "modal", "newsletter"};
  // Match whole hyphen/underscore/space separated words or prefixes of them.
  for (const char *word : kWords) {
    const std::string_view w(word);
    size_t at = 0;
    while ((at = tag.class_id.find(w, at)) != std::string::npos) {
      const bool left_ok = at == 0 || !std::isalnum(static_cast<unsigned char>(tag.class_id[at - 1]));
      if (left_ok) return true;
      at += w.size();
    }
  }
  return false;
}

class TextBuilder {
 public:
  void Text(std::string_view raw, bool preformatted) {
    std::string decoded = DecodeEntities(raw);
    size_t nbsp;
    while ((nbsp = decoded.find("\xC2\xA0")) != std::string::npos) decoded.replace(nbsp, 2, " ");
    for (char c : decoded) {
      if (preformatted && c == '\n') {
        Break();
        continue;
      }
      if (IsAsciiSpace(c)) {
        if (!line_.empty() && line_.back() != ' ') line_.push_back(' ');
        continue;
      }
      line_.push_back(c);
    }
  }

  void Break() {
    while (!line_.empty() && line_.back() == ' ') line_.pop_back();
    size_t start = 0;
    while (start < line_.size() && line_[start] == ' ') ++start;
    std::string line = line_.substr(start);
    line_.clear();
    if (line.find_first_not_of("#-| ") == std::string::npos) return;
    lines_.push_back(std::move(line));
  }

  void Append(std::string_view s) { line_.append(s); }
  bool LineEmpty() const { return line_.find_first_not_of(' ') == std::string::npos; }

  size_t LineCount() const { return lines_.size(); }
  size_t LineSize() const { return line_.size(); }
  std::string &Line() { return line_; }

  std::string Finish() {
    Break();
    std::string out;
    for (const auto &l : lines_) {
      if (!out.empty()) out.push_back('\n');
      out += l;
    }
    return out;
  }

 private:
  std::string line_;
  std::vector<std::string> lines_;
};

std::string Extract(std::string_view html, bool regions_only) {
  TextBuilder out;
  std::vector<std::string> skip_stack;  // open boilerplate element names
  int region_depth = 0;
  int pre_depth = 0;
  struct Link {
    std::string href;
    size_t line_count;
    size_t offset;
  };
  std::optional<Link> link;
  size_t i = 0;
  while (i < html.size()) {
    if (html[i] != '<') {
      const size_t next = html.find('<', i);
      const size_t end = next == npos ? html.size() : next;
      if (skip_stack.empty() && (!regions_only || region_depth > 0)) {
        out.Text(html.substr(i, end - i), pre_depth > 0);
      }
      i = end;
      continue;
    }
    if (html.compare(i, 4, "<!--") == 0) {
      const size_t end = html.find("-->", i + 4);
      i = end == npos ? html.size() : end + 3;
      continue;
    }
    if (i + 1 < html.size() && (html[i + 1] == '!' || html[i + 1] == '?')) {
      const size_t end = html.find('>', i);
      i = end == npos ? html.size() : end + 1;
      continue;
    }
    const auto tag = ParseHtmlTag(html, i);
    if (!tag) {
      if (skip_stack.empty() && (!regions_only || region_depth > 0)) out.Text("<", pre_depth > 0);
      ++i;
      continue;
    }
    i = tag->end;
    const std::string &name = tag->name;

    if (!tag->closing && kRawText.count(name)) {
      size_t close = i;
      while ((close = html.find("</", close)) != npos && !StartsWithCi(html, close + 2, name)) close += 2;
      if (close == npos) {
        i = html.size();
      } else {
        const size_t gt = html.find('>', close);
        i = gt == npos ? html.size() : gt + 1;
      }
      continue;
    }

    if (!skip_stack.empty()) {
      if (kVoid.count(name) || tag->self_closing) continue;
      if (!tag->closing) {
        skip_stack.push_back(name);
      } else {
        for (size_t k = skip_stack.size(); k-- > 0;) {
          if (skip_stack[k] == name) {
            skip_stack.resize(k);
            break;
          }
        }
      }
      continue;
    }

    if (!tag->closing && !kVoid.count(name) && !tag->self_closing &&
        (kSkipped.count(name) || BoilerplateAttributes(*tag))) {
      skip_stack.push_back(name);
      continue;
    }

    const bool region = name == "main" || name == "article";
    if (region && !tag->self_closing) {
      region_depth += tag->closing ? -1 : 1;
      if (region_depth < 0) region_depth = 0;
    }
    if (name == "pre" && !tag->self_closing) {
      pre_depth += tag->closing ? -1 : 1;
      if (pre_depth < 0) pre_depth = 0;
    }

    const bool emitting = !regions_only || region_depth > 0 || (region && tag->closing);
    if (!emitting) continue;

    if (name.size() == 2 && name[0] == 'h' && name[1] >= '1' && name[1] <= '6') {
      out.Break();
      if (!tag->closing) {
        out.Append(std::string(static_cast<size_t>(name[1] - '0'), '#'));
        out.Append(" ");
      }
    } else if (name == "li") {
      out.Break();
      if (!tag->closing) out.Append("- ");
    } else if (name == "td" || name == "th") {
      if (!tag->closing && !out.LineEmpty()) out.Append(" | ");
    } else if (name == "tr" || name == "br" || kBlock.count(name)) {
      out.Break();
    } else if (name == "a") {
      if (!tag->closing) {
        link = Link{tag->href, out.LineCount(), out.LineSize()};
      } else if (link) {
        const bool http = StartsWithCi(link->href, 0, "http://") || StartsWithCi(link->href, 0, "https://");
        if (http && link->line_count == out.LineCount() && link->offset <= out.LineSize()) {
          std::string &line = out.Line();
          std::string anchor = line.substr(link->offset);
          const size_t a = anchor.find_first_not_of(' ');
          if (a != std::string::npos) {
            const size_t b = anchor.find_last_not_of(' ');
            const std::string lead = anchor.substr(0, a);
            const std::string trail = anchor.substr(b + 1);
            line.resize(link->offset);
            line += lead + "[" + anchor.substr(a, b - a + 1) + "](" + link->href + ")" + trail;
          }
        }
        link.reset();
      }
    }
  }
  return out.Finish();
}

bool HasRegion(std::string_view html) {
  for (size_t k = html.find('<'); k != npos; k = html.find('<', k + 1)) {
    for (std::string_view needle : {"<main", "<article"}) {
      if (StartsWithCi(html, k, needle) && k + needle.size() < html.size()) {
        const char next = html[k + needle.size()];
        if (next == '>' || IsAsciiSpace(next)) return true;
      }
    }
  }
  return false;
}

}  // namespace

std::string HtmlToText(std::string_view html) {
  if (HasRegion(html)) {
    std::string text = Extract(html, true);
    if (!text.empty()) return text;
  }
  return Extract(html, false);
}

std::string NormalizePlainText(std::string_view text) {
  std::string out;
  bool pending_break = false;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    if (nl == npos) nl = text.size();
    std::string line;
    for (size_t k = pos; k < nl; ++k) {
      const char c = text[k];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v') {
        if (!line.empty() && line.back() != ' ') line.push_back(' ');
      } else {
        line.push_back(c);
      }
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    if (line.empty()) {
      pending_break = !out.empty();
    } else {
      if (!out.empty()) out += pending_break ? "\n\n" : "\n";
      out += line;
      pending_break = false;
    }
    pos = nl + 1;
  }
  return out;
}

ExtractResult ExtractText(std::string_view content, std::string_view content_type) {
  ExtractResult result;
  std::string media = Lower(content_type.substr(0, content_type.find(';')));
  while (!media.empty() && IsAsciiSpace(media.back())) media.pop_back();
  while (!media.empty() && IsAsciiSpace(media.front())) media.erase(media.begin());
  if (media.empty()) {
    const size_t first = content.find_first_not_of(" \t\r\n");
    media = first != npos && content[first] == '<' ? "text/html" : "text/plain";
  }
  if (media == "text/html" || media == "application/xhtml+xml") {
    std::string text = HtmlToText(content);
    if (text.empty()) {
      result.error = "Exception: no text extracted (HTML skeleton only)";
    } else {
      result.text = std::move(text);
    }
  } else if (media == "text/plain" || media == "text/markdown") {
    std::string text = NormalizePlainText(content);
    if (text.empty()) {
      result.error = "Exception: empty document";
    } else {
      result.text = std::move(text);
    }
  } else {
    result.error = "Exception: unsupported content type (" + media + ")";
  }
  return result;
}

size_t CountTokens(std::string_view text) {
  size_t count = 0;
  bool in_token = false;
  size_t pos = 0;
  while (pos < text.size()) {
    const char32_t cp = utf8::Next(text, pos);
    if (utf8::IsSpace(cp)) {
      in_token = false;
    } else if (!in_token) {
      in_token = true;
      ++count;
    }
  }
  return count;
}

std::optional<std::string> TokenFilter(std::string_view text, int min_tokens) {
  const size_t n = CountTokens(text);
  if (n < static_cast<size_t>(min_tokens)) return "Text is too short (" + std::to_string(n) + " words)";
  return std::nullopt;
}

}  // namespace mwcorpus
