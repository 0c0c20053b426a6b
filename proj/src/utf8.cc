#include "mwcorpus/utf8.h"

#include <algorithm>

namespace mwcorpus::utf8 {

char32_t Next(std::string_view text, size_t &pos) {
  const auto byte = [&](size_t i) { return static_cast<unsigned char>(text[i]); };
  const unsigned char lead = byte(pos);
  if (lead < 0x80) {
    ++pos;
    return lead;
  }
  int extra = 0;
  char32_t cp = 0;
  char32_t min = 0;
  if ((lead & 0xE0) == 0xC0) {
    extra = 1;
    cp = lead & 0x1F;
    min = 0x80;
  } else if ((lead & 0xF0) == 0xE0) {
    extra = 2;
    cp = lead & 0x0F;
    min = 0x800;
  } else if ((lead & 0xF8) == 0xF0) {
    extra = 3;
    cp = lead & 0x07;
    min = 0x10000;
  } else {
    ++pos;
    return kReplacement;
  }
  if (pos + extra >= text.size()) {
    ++pos;
    return kReplacement;
  }
  for (int i = 1; i <= extra; ++i) {
    const unsigned char c = byte(pos + i);
    if ((c & 0xC0) != 0x80) {
      ++pos;
      return kReplacement;
    }
    cp = (cp << 6) | (c & 0x3F);
  }
  if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
    ++pos;
    return kReplacement;
  }
  pos += extra + 1;
  return cp;
}

void Append(std::string &out, char32_t cp) {
  if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = kReplacement;
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::u32string Decode(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  size_t pos = 0;
  while (pos < text.size()) out.push_back(Next(text, pos));
  return out;
}

std::string Encode(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t cp : text) Append(out, cp);
  return out;
}

std::string Sanitize(std::string_view bytes) {
  if (IsValid(bytes)) return std::string(bytes);
  std::string out;
  out.reserve(bytes.size());
  size_t pos = 0;
  while (pos < bytes.size()) Append(out, Next(bytes, pos));
  return out;
}

bool IsValid(std::string_view bytes) {
  size_t pos = 0;
  while (pos < bytes.size()) {
    const size_t before = pos;
    const char32_t cp = Next(bytes, pos);
    if (cp == kReplacement) {
      // A literal U+FFFD is three bytes long; anything else was an error.
      if (pos - before != 3) return false;
    }
  }
  return true;
}

size_t Length(std::string_view text) {
  size_t n = 0;
  for (char c : text) {
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
  }
  return n;
}

size_t ByteOffset(std::string_view text, size_t index) {
  size_t pos = 0;
  for (size_t i = 0; i < index && pos < text.size(); ++i) Next(text, pos);
  return std::min(pos, text.size());
}

std::string_view Truncate(std::string_view text, size_t max_chars) {
  return text.substr(0, ByteOffset(text, max_chars));
}

bool IsSpace(char32_t cp) {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

bool IsDigit(char32_t cp) {
  return (cp >= '0' && cp <= '9') || (cp >= 0x0660 && cp <= 0x0669) ||
         (cp >= 0x06F0 && cp <= 0x06F9) || (cp >= 0x0966 && cp <= 0x096F) ||
         (cp >= 0xFF10 && cp <= 0xFF19);
}

bool IsLower(char32_t cp) {
  if (cp >= 'a' && cp <= 'z') return true;
  if (cp < 0x80) return false;
  if (cp >= 0xDF && cp <= 0xFF && cp != 0xF7) return true;
  if (cp >= 0x100 && cp <= 0x17F) return FoldCase(cp) == cp && cp != 0x130 && cp != 0x138;
  if (cp >= 0x3B1 && cp <= 0x3C9) return true;
  if (cp >= 0x430 && cp <= 0x45F) return true;
  return false;
}

bool IsLetter(char32_t cp) {
  if ((cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z')) return true;
  if (cp < 0xC0) return cp == 0xAA || cp == 0xB5 || cp == 0xBA;
  if (cp == 0xD7 || cp == 0xF7) return false;
  if (cp <= 0x24F) return true;                     // Latin-1 + Extended A/B
  if (cp >= 0x370 && cp <= 0x3FF) return cp != 0x37E && cp != 0x387;  // Greek
  if (cp >= 0x400 && cp <= 0x52F) return cp < 0x482 || cp > 0x489;   // Cyrillic
  if (cp >= 0x531 && cp <= 0x587) return true;      // Armenian
  if (cp >= 0x5D0 && cp <= 0x5EA) return true;      // Hebrew
  if (cp >= 0x620 && cp <= 0x64A) return true;      // Arabic
  if (cp >= 0x671 && cp <= 0x6D3) return true;
  if (cp >= 0x904 && cp <= 0x939) return true;      // Devanagari
  if (cp >= 0xE01 && cp <= 0xE30) return true;      // Thai
  if (cp >= 0x10A0 && cp <= 0x10FF) return true;    // Georgian
  if (cp >= 0x1E00 && cp <= 0x1FFF) return true;    // Latin/Greek extended
  if (cp >= 0x3041 && cp <= 0x30FF) return cp != 0x30FB;  // kana
  if (cp >= 0x3400 && cp <= 0x9FFF) return true;    // CJK
  if (cp >= 0xAC00 && cp <= 0xD7A3) return true;    // Hangul
  return false;
}

char32_t FoldCase(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 32;
  if (cp < 0xC0) return cp;
  if (cp <= 0xDE) return cp == 0xD7 ? cp : cp + 32;
  if (cp >= 0x100 && cp <= 0x137) return cp | 1u;
  if (cp >= 0x139 && cp <= 0x148) return (cp & 1u) ? cp + 1 : cp;
  if (cp >= 0x14A && cp <= 0x177) return cp | 1u;
  if (cp == 0x178) return 0xFF;
  if (cp >= 0x179 && cp <= 0x17E) return (cp & 1u) ? cp + 1 : cp;
  if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 32;
  if (cp >= 0x410 && cp <= 0x42F) return cp + 32;
  if (cp >= 0x400 && cp <= 0x40F) return cp + 80;
  return cp;
}

std::string FoldCase(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  size_t pos = 0;
  while (pos < text.size()) Append(out, FoldCase(Next(text, pos)));
  return out;
}

bool StartsWithFolded(std::string_view text, std::string_view prefix) {
  size_t tp = 0;
  size_t pp = 0;
  while (pp < prefix.size()) {
    if (tp >= text.size()) return false;
    if (FoldCase(Next(text, tp)) != FoldCase(Next(prefix, pp))) return false;
  }
  return true;
}

std::string Reverse(std::string_view text) {
  std::u32string cps = Decode(text);
  std::reverse(cps.begin(), cps.end());
  return Encode(cps);
}

}  // namespace mwcorpus::utf8
