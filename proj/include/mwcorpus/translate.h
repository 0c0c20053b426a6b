#ifndef MWCORPUS_TRANSLATE_H_
#define MWCORPUS_TRANSLATE_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mwcorpus/schema.h"

namespace mwcorpus {

struct TranslatableRecord {
  std::string chunk_id;
  int64_t article_index = 0;
  // Element index, then sentence index for paragraph sentences.
  std::vector<int64_t> element_path;
  std::string kind;  // "heading" | "sentence"
  std::string text;
  std::optional<std::string> translated_text;

  bool operator==(const TranslatableRecord &) const = default;
};

std::string TranslatableToJson(const TranslatableRecord &record);
TranslatableRecord TranslatableFromJson(std::string_view line);
std::vector<TranslatableRecord> ReadTranslatables(const std::filesystem::path &path);
void WriteTranslatables(const std::filesystem::path &path, const std::vector<TranslatableRecord> &records);

// Chunk id of a chunk file: its file name up to the first '.'.
std::string ChunkId(const std::filesystem::path &chunk);

// One record per heading and per sentence, in document order.
std::vector<TranslatableRecord> ExtractTranslatables(const std::vector<Article> &articles,
                                                     const std::string &chunk_id);
std::vector<TranslatableRecord> ExtractTranslatables(const std::filesystem::path &chunk);

// Writes translated_text into each addressed heading or sentence and
// rebuilds the excerpts. Records without translated_text are skipped.
// Throws Error naming the record when its chunk id, path, kind or text does
// not match.
void InsertTranslations(std::vector<Article> &articles, const std::string &chunk_id,
                        const std::vector<TranslatableRecord> &records);
void InsertTranslations(const std::filesystem::path &chunk, const std::vector<TranslatableRecord> &records,
                        const std::filesystem::path &out);

// translate(batch, source_lang) -> batch of the same length.
using Translator =
    std::function<std::vector<std::string>(const std::vector<std::string> &batch, const std::string &source_lang)>;

Translator IdentityTranslator();
// Reverses each text by code point.
Translator ReverseTranslator();
// "identity" or "reverse"; throws ConfigError otherwise.
Translator TranslatorByName(std::string_view name);

// Fills translated_text of every record, batch_size texts per call.
void TranslateRecords(std::vector<TranslatableRecord> &records, const Translator &translator,
                      const std::string &source_lang, size_t batch_size = 64);

}  // namespace mwcorpus

#endif  // MWCORPUS_TRANSLATE_H_
