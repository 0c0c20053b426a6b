#include <random>

#include "doctest.h"
#include "mwcorpus/chunk_io.h"
#include "mwcorpus/errors.h"
#include "mwcorpus/excerpts.h"
#include "mwcorpus/language_config.h"
#include "mwcorpus/translate.h"
#include "mwcorpus/utf8.h"
#include "mwcorpus/wikitext.h"
#include "test_support.h"

using namespace mwcorpus;

namespace {

Article Parsed(const std::string &title, const std::string &wikicode) {
  Article a;
  a.title = title;
  a.wikicode = wikicode;
  a.hash = ComputeHash(title, wikicode);
  a.last_revision = "2024-01-01T00:00:00Z";
  a.elements = ParseArticle(wikicode, DefaultLanguageConfig("en"));
  RefreshDerived(a);
  return a;
}

void ClearTranslations(Article &a) {
  for (auto &e : a.elements) {
    if (auto *h = std::get_if<Heading>(&e)) h->translated_text.reset();
    if (auto *p = std::get_if<Paragraph>(&e)) {
      for (auto &s : p->sentences) s.translated_text.reset();
    }
  }
  RefreshDerived(a);
}

const std::string &Resolve(const Article &a, const TranslatableRecord &r) {
  const auto &e = a.elements.at(static_cast<size_t>(r.element_path.at(0)));
  if (r.kind == "heading") return std::get<Heading>(e).text;
  return std::get<Paragraph>(e).sentences.at(static_cast<size_t>(r.element_path.at(1))).text;
}

std::string Reversed(const std::string &text) {
  auto cps = utf8::Decode(text);
  std::reverse(cps.begin(), cps.end());
  return utf8::Encode(cps);
}

}  // namespace

TEST_CASE("one heading and two sentences give three records") {
  const Article a = Parsed("T", "== Origins ==\nTea came from China.<ref>https://a.example/x</ref> It spread west.");
  const auto records = ExtractTranslatables({a}, "chunk_00000");
  REQUIRE(records.size() == 3);
  CHECK(records[0].kind == "heading");
  CHECK(records[0].text == "Origins");
  CHECK(records[0].element_path == std::vector<int64_t>{0});
  CHECK(records[1].kind == "sentence");
  CHECK(records[1].text == "Tea came from China.");
  CHECK(records[1].element_path == std::vector<int64_t>{1, 0});
  CHECK(records[2].element_path == std::vector<int64_t>{1, 1});
  for (const auto &r : records) {
    CHECK(r.chunk_id == "chunk_00000");
    CHECK(r.article_index == 0);
    CHECK_FALSE(r.translated_text.has_value());
  }
  CHECK(ExtractTranslatables({Parsed("Empty", "")}, "c").empty());
}

TEST_CASE("record JSON round-trips") {
  TranslatableRecord r{"chunk_00002", 7, {3, 1}, "sentence", "Grüße, \"world\".", std::nullopt};
  CHECK(TranslatableFromJson(TranslatableToJson(r)) == r);
  r.translated_text = "Greetings";
  CHECK(TranslatableFromJson(TranslatableToJson(r)) == r);
  CHECK(TranslatableToJson(r).find('\n') == std::string::npos);
  CHECK_THROWS_AS(TranslatableFromJson("{\"chunk_id\": 1}"), Error);
}

TEST_CASE("identity and reverse translators") {
  std::vector<Article> articles = {
      Parsed("A", "== Überblick ==\nEins zwei.<ref>x</ref> Drei vier.\n\nNeuer Absatz hier."),
      Parsed("B", "Ни слова.<ref>y</ref> Ещё одно предложение.")};
  auto records = ExtractTranslatables(articles, "chunk_00001");
  TranslateRecords(records, IdentityTranslator(), "de", 2);
  std::vector<Article> identity = articles;
  InsertTranslations(identity, "chunk_00001", records);
  for (const auto &r : records) CHECK(r.translated_text == std::optional<std::string>(r.text));
  CHECK(std::get<Heading>(identity[0].elements[0]).translated_text == std::optional<std::string>("Überblick"));
  CHECK(identity[0].excerpts_with_citations.at(0).translated_text ==
        std::optional<std::string>(identity[0].excerpts_with_citations.at(0).text));

  auto reversed = ExtractTranslatables(articles, "chunk_00001");
  TranslateRecords(reversed, ReverseTranslator(), "de");
  std::vector<Article> out = articles;
  InsertTranslations(out, "chunk_00001", reversed);
  for (const auto &r : reversed) {
    const auto &e = out.at(static_cast<size_t>(r.article_index)).elements.at(static_cast<size_t>(r.element_path[0]));
    const auto &got = r.kind == "heading"
                          ? std::get<Heading>(e).translated_text
                          : std::get<Paragraph>(e).sentences.at(static_cast<size_t>(r.element_path[1])).translated_text;
    CHECK(got == std::optional<std::string>(Reversed(r.text)));
  }
  CHECK_THROWS_AS(TranslatorByName("google"), ConfigError);
}

TEST_CASE("partial inserts leave untranslated sentences absent") {
  std::vector<Article> articles = {Parsed("A", "One.<ref>r</ref> Two.<ref>s</ref> Three.")};
  auto records = ExtractTranslatables(articles, "c");
  TranslateRecords(records, IdentityTranslator(), "en");
  records.erase(records.begin() + 1);
  InsertTranslations(articles, "c", records);
  const auto &ss = std::get<Paragraph>(articles[0].elements[0]).sentences;
  CHECK(ss[0].translated_text.has_value());
  CHECK_FALSE(ss[1].translated_text.has_value());
  CHECK(ss[2].translated_text.has_value());
  CHECK(articles[0].excerpts_with_citations.at(0).translated_text == std::optional<std::string>("One."));
  CHECK_FALSE(articles[0].excerpts_with_citations.at(1).translated_text.has_value());
}

TEST_CASE("mismatched records are rejected with their address") {
  std::vector<Article> articles = {Parsed("A", "== H ==\nOne. Two.")};
  auto records = ExtractTranslatables(articles, "c");
  TranslateRecords(records, IdentityTranslator(), "en");

  auto wrong_text = records;
  wrong_text[1].text = "Uno.";
  CHECK_THROWS_AS(InsertTranslations(articles, "c", wrong_text), Error);
  auto wrong_path = records;
  wrong_path[2].element_path = {1, 9};
  CHECK_THROWS_AS(InsertTranslations(articles, "c", wrong_path), Error);
  auto wrong_kind = records;
  wrong_kind[0].kind = "sentence";
  CHECK_THROWS_AS(InsertTranslations(articles, "c", wrong_kind), Error);
  CHECK_THROWS_AS(InsertTranslations(articles, "other", records), Error);
  try {
    InsertTranslations(articles, "c", wrong_path);
  } catch (const Error &e) {
    CHECK(std::string(e.what()).find("1") != std::string::npos);
  }
}

TEST_CASE("extract then identity insert changes only translated_text on random articles") {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 100; ++i) {
    std::vector<Article> articles = {testing::RandomArticle(rng), testing::RandomArticle(rng)};
    for (auto &a : articles) ClearTranslations(a);
    auto records = ExtractTranslatables(articles, "chunk_00004");
    for (const auto &r : records) CHECK(Resolve(articles.at(static_cast<size_t>(r.article_index)), r) == r.text);
    TranslateRecords(records, IdentityTranslator(), "en", 7);
    std::vector<Article> inserted = articles;
    InsertTranslations(inserted, "chunk_00004", records);
    for (const auto &a : inserted) CHECK_NOTHROW(ValidateArticle(a));
    for (auto &a : inserted) ClearTranslations(a);
    CHECK(inserted == articles);
  }
}

TEST_CASE("chunk files round-trip through extract and insert") {
  testing::TempDir dir;
  const auto chunk = dir / "chunk_00003.0123456789abcdef.jsonl";
  std::vector<Article> articles = {Parsed("A", "Alpha beta.<ref>q</ref> Gamma."), Parsed("B", "== Only ==")};
  WriteChunkAtomic(chunk, articles);
  CHECK(ChunkId(chunk) == "chunk_00003");

  auto records = ExtractTranslatables(chunk);
  CHECK(records.size() == 3);
  WriteTranslatables(dir / "t.jsonl", records);
  CHECK(ReadTranslatables(dir / "t.jsonl") == records);

  TranslateRecords(records, ReverseTranslator(), "en");
  InsertTranslations(chunk, records, dir / "out.jsonl");
  const auto out = ReadChunk(dir / "out.jsonl");
  REQUIRE(out.size() == 2);
  CHECK(std::get<Heading>(out[1].elements[0]).translated_text == std::optional<std::string>("ylnO"));
  CHECK(ReadChunk(chunk) == articles);
}
