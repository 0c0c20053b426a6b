#include "mwcorpus/entities.h"

#include <cctype>
#include <unordered_map>

#include "mwcorpus/utf8.h"

namespace mwcorpus {

namespace {

constexpr size_t npos = std::string_view::npos;

std::optional<char32_t> NamedEntity(std::string_view name) {
  static const std::unordered_map<std::string_view, char32_t> kEntities = {
      {"amp", U'&'},      {"lt", U'<'},        {"gt", U'>'},        {"quot", U'"'},
      {"apos", U'\''},    {"nbsp", 0xA0},      {"ndash", U'–'},     {"mdash", U'—'},
      {"hellip", U'…'},   {"laquo", U'«'},     {"raquo", U'»'},     {"lsquo", U'‘'},
      {"rsquo", U'’'},    {"ldquo", U'“'},     {"rdquo", U'”'},     {"bdquo", U'„'},
      {"sbquo", U'‚'},    {"thinsp", 0x2009},  {"ensp", 0x2002},    {"emsp", 0x2003},
      {"minus", U'−'},    {"times", U'×'},     {"divide", U'÷'},    {"deg", U'°'},
      {"middot", U'·'},   {"bull", U'•'},      {"copy", U'©'},      {"reg", U'®'},
      {"trade", U'™'},    {"euro", U'€'},      {"pound", U'£'},     {"yen", U'¥'},
      {"cent", U'¢'},     {"sect", U'§'},      {"para", U'¶'},      {"shy", 0xAD},
      {"zwj", 0x200D},    {"zwnj", 0x200C},    {"lrm", 0x200E},     {"rlm", 0x200F},
      {"prime", U'′'},    {"Prime", U'″'},     {"frac12", U'½'},    {"frac14", U'¼'},
      {"frac34", U'¾'},   {"sup1", U'¹'},      {"sup2", U'²'},      {"sup3", U'³'},
      {"plusmn", U'±'},   {"micro", U'µ'},     {"larr", U'←'},      {"rarr", U'→'},
      {"harr", U'↔'},     {"uarr", U'↑'},      {"darr", U'↓'},      {"le", U'≤'},
      {"ge", U'≥'},       {"ne", U'≠'},        {"asymp", U'≈'},     {"infin", U'∞'},
      {"alpha", U'α'},    {"beta", U'β'},      {"gamma", U'γ'},     {"delta", U'δ'},
      {"epsilon", U'ε'},  {"lambda", U'λ'},    {"mu", U'μ'},        {"pi", U'π'},
      {"sigma", U'σ'},    {"omega", U'ω'},     {"Omega", U'Ω'},     {"Delta", U'Δ'},
      {"eacute", U'é'},   {"egrave", U'è'},    {"ecirc", U'ê'},     {"agrave", U'à'},
      {"aacute", U'á'},   {"acirc", U'â'},     {"auml", U'ä'},      {"ouml", U'ö'},
      {"uuml", U'ü'},     {"Auml", U'Ä'},      {"Ouml", U'Ö'},      {"Uuml", U'Ü'},
      {"szlig", U'ß'},    {"ccedil", U'ç'},    {"ntilde", U'ñ'},    {"iacute", U'í'},
      {"oacute", U'ó'},   {"uacute", U'ú'},    {"Eacute", U'É'},    {"iquest", U'¿'},
      {"iexcl", U'¡'},    {"ordm", U'º'},      {"ordf", U'ª'},      {"dagger", U'†'},
      {"Dagger", U'‡'},   {"permil", U'‰'},    {"lsaquo", U'‹'},    {"rsaquo", U'›'},
      {"oelig", U'œ'},    {"aelig", U'æ'},     {"oslash", U'ø'},    {"aring", U'å'},
  };
  const auto it = kEntities.find(name);
  if (it == kEntities.end()) return std::nullopt;
  return it->second;
}

}  // namespace

std::optional<std::pair<char32_t, size_t>> DecodeEntity(std::string_view text, size_t pos) {
  const size_t semi = text.find(';', pos + 1);
  if (semi == npos || semi - pos > 12 || semi == pos + 1) return std::nullopt;
  const std::string_view body = text.substr(pos + 1, semi - pos - 1);
  const size_t len = semi - pos + 1;
  if (body[0] == '#') {
    const bool hex = body.size() > 1 && (body[1] == 'x' || body[1] == 'X');
    const std::string_view digits = body.substr(hex ? 2 : 1);
    if (digits.empty()) return std::nullopt;
    uint32_t value = 0;
    for (char c : digits) {
      int d;
      if (c >= '0' && c <= '9') d = c - '0';
      else if (hex && c >= 'a' && c <= 'f') d = c - 'a' + 10;
      else if (hex && c >= 'A' && c <= 'F') d = c - 'A' + 10;
      else return std::nullopt;
      value = value * (hex ? 16 : 10) + static_cast<uint32_t>(d);
      if (value > 0x10FFFF) return std::nullopt;
    }
    if (value == 0 || (value >= 0xD800 && value <= 0xDFFF)) return std::make_pair(utf8::kReplacement, len);
    return std::make_pair(static_cast<char32_t>(value), len);
  }
  for (char c : body) {
    if (!std::isalnum(static_cast<unsigned char>(c))) return std::nullopt;
  }
  if (auto cp = NamedEntity(body)) return std::make_pair(*cp, len);
  return std::nullopt;
}

std::string DecodeEntities(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '&') {
      if (auto decoded = DecodeEntity(text, i)) {
        utf8::Append(out, decoded->first);
        i += decoded->second;
        continue;
      }
    }
    out.push_back(text[i++]);
  }
  return out;
}

}  // namespace mwcorpus
