#include "mwcorpus/segmenter.h"

#include <algorithm>

#include "mwcorpus/utf8.h"

namespace mwcorpus {

namespace {

bool IsClosing(char32_t cp) {
  switch (cp) {
    case '"': case '\'': case ')': case ']': case '}':
    case U'’': case U'”': case U'»': case U'›': case U'」': case U'』':
    case U'）': case U'】': case U'〕': case U'〉': case U'》':
      return true;
    default:
      return false;
  }
}

bool IsOpening(char32_t cp) {
  switch (cp) {
    case '"': case '\'': case '(': case '[': case '{':
    case U'‘': case U'“': case U'«': case U'‹': case U'„': case U'¿': case U'¡':
      return true;
    default:
      return false;
  }
}

// Terminals that end a sentence without needing a following space.
bool IsFullWidthTerminal(char32_t cp) {
  return cp == U'。' || cp == U'！' || cp == U'？' || cp == U'｡';
}

class Splitter {
 public:
  Splitter(std::u32string_view text, const SegmenterRules &rules)
      : text_(text), rules_(rules) {
    for (const auto &abbr : rules.abbreviation_exceptions) {
      std::u32string folded;
      for (char32_t cp : utf8::Decode(abbr)) folded.push_back(utf8::FoldCase(cp));
      if (!folded.empty()) abbreviations_.push_back(std::move(folded));
    }
    for (const auto &word : rules.ordinal_followers) {
      std::u32string folded;
      for (char32_t cp : utf8::Decode(word)) folded.push_back(utf8::FoldCase(cp));
      if (!folded.empty()) ordinal_followers_.push_back(std::move(folded));
    }
  }

  bool IsTerminal(char32_t cp) const {
    return rules_.terminal_punctuation.find(cp) != std::u32string::npos || IsFullWidthTerminal(cp);
  }

  // True if the terminal run [first, end) should not end a sentence.
  bool Suppressed(size_t first, size_t end) const {
    // Lowercase continuation is taken as mid-sentence, as in
    // "« Quel accueil ! » pense-t-il".
    size_t next = end;
    while (next < text_.size() && text_[next] == ' ') ++next;
    while (next < text_.size() && IsOpening(text_[next])) ++next;
    if (next < text_.size() && utf8::IsLower(text_[next])) return true;
    if (text_[first] != '.') return false;
    // Token before the period, ignoring opening punctuation.
    size_t token_start = first;
    while (token_start > 0 && !utf8::IsSpace(text_[token_start - 1])) --token_start;
    while (token_start < first && IsOpening(text_[token_start])) ++token_start;
    const size_t token_len = first - token_start;
    if (token_len == 1 && utf8::IsLetter(text_[token_start]) && !utf8::IsLower(text_[token_start])) {
      return true;  // initial, as in "J. R. Smith"
    }
    for (const auto &abbr : abbreviations_) {
      const size_t period_end = first + 1;
      if (abbr.size() > period_end) continue;
      const size_t start = period_end - abbr.size();
      bool match = true;
      for (size_t k = 0; k < abbr.size() && match; ++k) {
        match = utf8::FoldCase(text_[start + k]) == abbr[k];
      }
      if (!match) continue;
      if (start == 0 || utf8::IsSpace(text_[start - 1]) || IsOpening(text_[start - 1])) return true;
    }
    return end == first + 1 && token_len > 0 && AllDigits(token_start, first) && OrdinalFollows(next);
  }

  bool AllDigits(size_t begin, size_t end) const {
    for (size_t k = begin; k < end; ++k) {
      if (!utf8::IsDigit(text_[k])) return false;
    }
    return true;
  }

  bool OrdinalFollows(size_t pos) const {
    size_t word_end = pos;
    while (word_end < text_.size() && utf8::IsLetter(text_[word_end])) ++word_end;
    for (const auto &word : ordinal_followers_) {
      if (word.size() != word_end - pos) continue;
      bool match = true;
      for (size_t k = 0; k < word.size() && match; ++k) match = utf8::FoldCase(text_[pos + k]) == word[k];
      if (match) return true;
    }
    return false;
  }

  // Returns the sentence boundaries as end offsets (exclusive of the
  // consumed space).
  std::vector<std::pair<size_t, bool>> Breaks() const {
    std::vector<std::pair<size_t, bool>> breaks;  // (end, consumed_space)
    const size_t n = text_.size();
    size_t i = 0;
    while (i < n) {
      if (!IsTerminal(text_[i])) {
        ++i;
        continue;
      }
      const size_t first = i;
      bool full_width = false;
      size_t j = i;
      while (j < n && (IsTerminal(text_[j]) || (j > first && IsClosing(text_[j])))) {
        full_width = full_width || IsFullWidthTerminal(text_[j]);
        ++j;
      }
      // French spacing: "Oui. »" and "Oui.\u00A0»" keep the guillemet.
      if (j + 1 < n && (text_[j] == ' ' || text_[j] == 0xA0 || text_[j] == 0x202F) &&
          (text_[j + 1] == U'»' || text_[j + 1] == U'›')) {
        j += 2;
        while (j < n && IsClosing(text_[j])) ++j;
      }
      if (j >= n) break;
      if (text_[j] == ' ') {
        if (!Suppressed(first, j) && j + 1 < n) breaks.emplace_back(j, true);
      } else if (full_width) {
        breaks.emplace_back(j, false);
      }
      i = j;
    }
    return breaks;
  }

 private:
  std::u32string_view text_;
  const SegmenterRules &rules_;
  std::vector<std::u32string> abbreviations_;
  std::vector<std::u32string> ordinal_followers_;
};

}  // namespace

std::vector<SentenceSpan> SegmentParagraph(std::string_view clean_text, const SegmenterRules &rules) {
  std::vector<SentenceSpan> out;
  if (clean_text.empty()) return out;
  const std::u32string text = utf8::Decode(clean_text);
  Splitter splitter(text, rules);
  size_t start = 0;
  for (const auto &[end, consumed_space] : splitter.Breaks()) {
    SentenceSpan span;
    span.text = utf8::Encode(std::u32string_view(text).substr(start, end - start));
    span.trailing_whitespace = consumed_space ? " " : "";
    out.push_back(std::move(span));
    start = end + (consumed_space ? 1 : 0);
  }
  if (start < text.size()) out.push_back({utf8::Encode(std::u32string_view(text).substr(start)), ""});
  return out;
}

std::vector<Sentence> AssignOffsets(const std::vector<SentenceSpan> &spans,
                                    const std::vector<Citation> &citations,
                                    const std::vector<CitationNeeded> &citations_needed,
                                    int *warnings) {
  std::vector<Sentence> sentences;
  std::vector<int64_t> starts;
  std::vector<int64_t> ends;
  int64_t cursor = 0;
  for (const auto &span : spans) {
    Sentence s;
    s.text = span.text;
    s.trailing_whitespace = span.trailing_whitespace;
    sentences.push_back(std::move(s));
    const auto len = static_cast<int64_t>(utf8::Length(span.text));
    starts.push_back(cursor);
    ends.push_back(cursor + len);
    cursor += len + static_cast<int64_t>(span.trailing_whitespace.size());
  }
  const int64_t total = cursor;
  int local_warnings = 0;

  auto place = [&](int64_t offset, auto &&attach) {
    if (sentences.empty()) {
      ++local_warnings;
      return;
    }
    if (offset < 0 || offset > total) {
      ++local_warnings;
      attach(sentences.size() - 1, ends.back() - starts.back());
      return;
    }
    const auto it = std::lower_bound(ends.begin(), ends.end(), offset);
    if (it == ends.end()) {
      // Inside the trailing space of the final sentence.
      attach(sentences.size() - 1, ends.back() - starts.back());
      return;
    }
    const size_t idx = static_cast<size_t>(it - ends.begin());
    attach(idx, std::max<int64_t>(0, offset - starts[idx]));
  };

  for (const auto &c : citations) {
    place(c.char_index, [&](size_t idx, int64_t local) {
      Citation moved = c;
      moved.char_index = local;
      sentences[idx].citations.push_back(std::move(moved));
    });
  }
  for (const auto &c : citations_needed) {
    place(c.char_index, [&](size_t idx, int64_t local) {
      CitationNeeded moved = c;
      moved.char_index = local;
      sentences[idx].citations_needed.push_back(std::move(moved));
    });
  }
  if (warnings) *warnings += local_warnings;
  return sentences;
}

}  // namespace mwcorpus
