#include "mwcorpus/excerpts.h"

#include <algorithm>

namespace mwcorpus {

std::vector<ExcerptWithCitations> BuildExcerpts(const std::vector<Element> &elements) {
  std::vector<ExcerptWithCitations> out;
  for (const auto &element : elements) {
    const auto *paragraph = std::get_if<Paragraph>(&element);
    if (!paragraph) continue;
    const auto &sentences = paragraph->sentences;
    for (size_t i = 0; i < sentences.size(); ++i) {
      if (sentences[i].citations.empty()) continue;
      ExcerptWithCitations excerpt;
      std::string translated;
      bool all_translated = true;
      for (size_t k = i - std::min<size_t>(i, 2); k <= i; ++k) {
        const Sentence &s = sentences[k];
        excerpt.text += s.text;
        if (s.translated_text) {
          translated += *s.translated_text;
        } else {
          all_translated = false;
        }
        if (k < i) {
          excerpt.text += s.trailing_whitespace;
          translated += s.trailing_whitespace;
        }
      }
      if (all_translated) excerpt.translated_text = std::move(translated);
      excerpt.citations = sentences[i].citations;
      out.push_back(std::move(excerpt));
    }
  }
  return out;
}

void RefreshDerived(Article &article) {
  article.text = ArticleText(article.elements);
  article.excerpts_with_citations = BuildExcerpts(article.elements);
}

}  // namespace mwcorpus
