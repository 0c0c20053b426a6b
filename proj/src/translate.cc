#include "mwcorpus/translate.h"

#include "json.hpp"
#include "mwcorpus/chunk_io.h"
#include "mwcorpus/errors.h"
#include "mwcorpus/excerpts.h"
#include "mwcorpus/utf8.h"

namespace mwcorpus {

namespace {

using ojson = nlohmann::ordered_json;

std::string Describe(const TranslatableRecord &r) {
  std::string path;
  for (auto i : r.element_path) path += (path.empty() ? "" : ",") + std::to_string(i);
  return "record " + r.chunk_id + " article " + std::to_string(r.article_index) + " path [" + path + "]";
}

}  // namespace

std::string TranslatableToJson(const TranslatableRecord &record) {
  ojson j;
  j["chunk_id"] = record.chunk_id;
  j["article_index"] = record.article_index;
  j["element_path"] = record.element_path;
  j["kind"] = record.kind;
  j["text"] = record.text;
  j["translated_text"] = record.translated_text ? ojson(*record.translated_text) : ojson(nullptr);
  return j.dump();
}

TranslatableRecord TranslatableFromJson(std::string_view line) {
  TranslatableRecord r;
  try {
    const auto j = nlohmann::json::parse(line);
    r.chunk_id = j.at("chunk_id").get<std::string>();
    r.article_index = j.at("article_index").get<int64_t>();
    r.element_path = j.at("element_path").get<std::vector<int64_t>>();
    r.kind = j.at("kind").get<std::string>();
    r.text = j.at("text").get<std::string>();
    if (j.contains("translated_text") && !j["translated_text"].is_null()) {
      r.translated_text = j["translated_text"].get<std::string>();
    }
  } catch (const nlohmann::json::exception &e) {
    throw SchemaError("translatable record", e.what());
  }
  if (r.kind != "heading" && r.kind != "sentence") throw SchemaError("kind", "unknown kind '" + r.kind + "'");
  return r;
}

std::vector<TranslatableRecord> ReadTranslatables(const std::filesystem::path &path) {
  std::vector<TranslatableRecord> out;
  for (const auto &line : ReadLines(path)) out.push_back(TranslatableFromJson(line));
  return out;
}

void WriteTranslatables(const std::filesystem::path &path, const std::vector<TranslatableRecord> &records) {
  std::vector<std::string> lines;
  lines.reserve(records.size());
  for (const auto &r : records) lines.push_back(TranslatableToJson(r));
  WriteLinesAtomic(path, lines);
}

std::string ChunkId(const std::filesystem::path &chunk) {
  const std::string name = chunk.filename().string();
  return name.substr(0, name.find('.'));
}

std::vector<TranslatableRecord> ExtractTranslatables(const std::vector<Article> &articles,
                                                     const std::string &chunk_id) {
  std::vector<TranslatableRecord> out;
  for (size_t a = 0; a < articles.size(); ++a) {
    const auto &elements = articles[a].elements;
    for (size_t e = 0; e < elements.size(); ++e) {
      if (const auto *heading = std::get_if<Heading>(&elements[e])) {
        out.push_back({chunk_id, static_cast<int64_t>(a), {static_cast<int64_t>(e)}, "heading", heading->text,
                       std::nullopt});
      } else if (const auto *paragraph = std::get_if<Paragraph>(&elements[e])) {
        for (size_t s = 0; s < paragraph->sentences.size(); ++s) {
          out.push_back({chunk_id,
                         static_cast<int64_t>(a),
                         {static_cast<int64_t>(e), static_cast<int64_t>(s)},
                         "sentence",
                         paragraph->sentences[s].text,
                         std::nullopt});
        }
      }
    }
  }
  return out;
}

std::vector<TranslatableRecord> ExtractTranslatables(const std::filesystem::path &chunk) {
  return ExtractTranslatables(ReadChunk(chunk), ChunkId(chunk));
}

void InsertTranslations(std::vector<Article> &articles, const std::string &chunk_id,
                        const std::vector<TranslatableRecord> &records) {
  std::vector<bool> touched(articles.size(), false);
  for (const auto &r : records) {
    if (!r.translated_text) continue;
    if (r.chunk_id != chunk_id) throw Error(Describe(r) + ": belongs to another chunk than " + chunk_id);
    if (r.article_index < 0 || static_cast<size_t>(r.article_index) >= articles.size()) {
      throw Error(Describe(r) + ": no such article");
    }
    auto &elements = articles[static_cast<size_t>(r.article_index)].elements;
    const auto &path = r.element_path;
    if (path.empty() || path[0] < 0 || static_cast<size_t>(path[0]) >= elements.size()) {
      throw Error(Describe(r) + ": no such element");
    }
    Element &element = elements[static_cast<size_t>(path[0])];
    std::optional<std::string> *target = nullptr;
    const std::string *source = nullptr;
    if (r.kind == "heading") {
      auto *heading = std::get_if<Heading>(&element);
      if (!heading || path.size() != 1) throw Error(Describe(r) + ": does not address a heading");
      target = &heading->translated_text;
      source = &heading->text;
    } else {
      auto *paragraph = std::get_if<Paragraph>(&element);
      if (!paragraph || path.size() != 2 || path[1] < 0 ||
          static_cast<size_t>(path[1]) >= paragraph->sentences.size()) {
        throw Error(Describe(r) + ": does not address a sentence");
      }
      auto &sentence = paragraph->sentences[static_cast<size_t>(path[1])];
      target = &sentence.translated_text;
      source = &sentence.text;
    }
    if (*source != r.text) throw Error(Describe(r) + ": text does not match the chunk");
    *target = *r.translated_text;
    touched[static_cast<size_t>(r.article_index)] = true;
  }
  for (size_t a = 0; a < articles.size(); ++a) {
    if (touched[a]) articles[a].excerpts_with_citations = BuildExcerpts(articles[a].elements);
  }
}

void InsertTranslations(const std::filesystem::path &chunk, const std::vector<TranslatableRecord> &records,
                        const std::filesystem::path &out) {
  auto articles = ReadChunk(chunk);
  InsertTranslations(articles, ChunkId(chunk), records);
  WriteChunkAtomic(out, articles);
}

Translator IdentityTranslator() {
  return [](const std::vector<std::string> &batch, const std::string &) { return batch; };
}

Translator ReverseTranslator() {
  return [](const std::vector<std::string> &batch, const std::string &) {
    std::vector<std::string> out;
    out.reserve(batch.size());
    for (const auto &text : batch) out.push_back(utf8::Reverse(text));
    return out;
  };
}

Translator TranslatorByName(std::string_view name) {
  if (name == "identity") return IdentityTranslator();
  if (name == "reverse") return ReverseTranslator();
  throw ConfigError("unknown translator '" + std::string(name) + "'");
}

void TranslateRecords(std::vector<TranslatableRecord> &records, const Translator &translator,
                      const std::string &source_lang, size_t batch_size) {
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  for (size_t start = 0; start < records.size(); start += batch_size) {
    const size_t end = std::min(records.size(), start + batch_size);
    std::vector<std::string> batch;
    for (size_t i = start; i < end; ++i) batch.push_back(records[i].text);
    auto translated = translator(batch, source_lang);
    if (translated.size() != batch.size()) throw Error("translator returned a batch of the wrong size");
    for (size_t i = start; i < end; ++i) records[i].translated_text = std::move(translated[i - start]);
  }
}

}  // namespace mwcorpus
