#ifndef MWCORPUS_ENTITIES_H_
#define MWCORPUS_ENTITIES_H_

#include <optional>
#include <string>
#include <string_view>
#include <utility>

namespace mwcorpus {

// Decodes the character reference starting at text[pos] == '&'. Returns the
// code point and the byte length of the reference, or nothing when the text
// there is not a known reference.
std::optional<std::pair<char32_t, size_t>> DecodeEntity(std::string_view text, size_t pos);

// Replaces every known character reference in text.
std::string DecodeEntities(std::string_view text);

}  // namespace mwcorpus

#endif  // MWCORPUS_ENTITIES_H_
