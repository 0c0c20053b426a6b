#ifndef MWCORPUS_SEGMENTER_H_
#define MWCORPUS_SEGMENTER_H_

#include <string>
#include <string_view>
#include <vector>

#include "mwcorpus/language_config.h"
#include "mwcorpus/schema.h"

namespace mwcorpus {

struct SentenceSpan {
  std::string text;
  std::string trailing_whitespace;  // "" or " "

  bool operator==(const SentenceSpan &) const = default;
};

// Rule-based sentence splitting. Concatenating text + trailing_whitespace
// over the result reproduces clean_text exactly, for any input.
//
// A sentence ends after a run of terminal punctuation plus any closing
// quotes or brackets when the next character is a space, unless the token
// before the terminal is a listed abbreviation, a single-letter initial or a
// number followed by a listed ordinal word, or the next word starts with a
// lowercase letter. The space is consumed as trailing whitespace. CJK full-width terminals end a sentence with no
// following space required.
std::vector<SentenceSpan> SegmentParagraph(std::string_view clean_text, const SegmenterRules &rules);

// Pluggable segmentation so a model-based splitter can replace the rules.
class Segmenter {
 public:
  virtual ~Segmenter() = default;
  virtual std::vector<SentenceSpan> Segment(std::string_view clean_text) const = 0;
};

class RuleSegmenter : public Segmenter {
 public:
  explicit RuleSegmenter(SegmenterRules rules) : rules_(std::move(rules)) {}
  std::vector<SentenceSpan> Segment(std::string_view clean_text) const override {
    return SegmentParagraph(clean_text, rules_);
  }

 private:
  SegmenterRules rules_;
};

// Moves paragraph-scope markers onto sentences. A marker at offset o goes to
// the first sentence whose [start, end] span contains o, so an offset exactly
// at a sentence end stays with the earlier sentence; its index becomes
// o - start. Offsets past the paragraph end attach to the end of the last
// sentence and increment *warnings. With no sentences, markers are dropped
// and counted as warnings.
std::vector<Sentence> AssignOffsets(const std::vector<SentenceSpan> &spans,
                                    const std::vector<Citation> &citations,
                                    const std::vector<CitationNeeded> &citations_needed,
                                    int *warnings = nullptr);

}  // namespace mwcorpus

#endif  // MWCORPUS_SEGMENTER_H_
