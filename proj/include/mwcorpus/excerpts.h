#ifndef MWCORPUS_EXCERPTS_H_
#define MWCORPUS_EXCERPTS_H_

#include <vector>

#include "mwcorpus/schema.h"

namespace mwcorpus {

// One excerpt per cited paragraph sentence: the sentence plus up to two
// preceding sentences of the same paragraph, joined with each predecessor's
// trailing whitespace. Citations are copied from the final sentence.
std::vector<ExcerptWithCitations> BuildExcerpts(const std::vector<Element> &elements);

// Recomputes text and excerpts after elements changed.
void RefreshDerived(Article &article);

}  // namespace mwcorpus

#endif  // MWCORPUS_EXCERPTS_H_
