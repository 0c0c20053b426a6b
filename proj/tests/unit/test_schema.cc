#include <random>

#include "doctest.h"
#include "json.hpp"
#include "mwcorpus/chunk_io.h"
#include "mwcorpus/errors.h"
#include "mwcorpus/excerpts.h"
#include "mwcorpus/schema.h"
#include "test_support.h"

using namespace mwcorpus;
using mwcorpus::testing::RandomArticle;
using mwcorpus::testing::TempDir;

namespace {

// Expected digests from `printf '<bytes>' | sha256sum`.
struct HashCase {
  const char *title;
  const char *wikicode;
  const char *digest;
};

const HashCase kHashCases[] = {
    {"", "", "01ba4719c80b6fe911b091a7c05124b64eeece964e09c058ef8f9805daca546b"},
    {"A", "B", "23519a43c66b4c342f25b32e09797ec5f3fc0be388cd8243fb3449afbdce4013"},
    {"T", "", "678f81a714fbc72030f82f9980054d5cf90e6f041a367f7da2f35b0f7dafb0e5"},
    {"Paris", "Paris is the capital of [[France]].",
     "9c50dd3fce34aeece44a1384cf5aeb26196c4e103e2d01a4788740a8c5422f4d"},
    {"Zürich", "Die Stadt Zürich", "730a51d5cd66f47cedea3ae04e2453d8551a1babb7ef372a9c7f82dc415dfab3"},
    {"东京", "东京都", "056eb72067b25e33f520fc95e5a104e285de6043ce8f33b1bc210729e7536743"},
};

Article MinimalArticle() {
  Article a;
  a.title = "T";
  a.hash = ComputeHash("T", "");
  a.last_revision = "2024-01-01T00:00:00Z";
  return a;
}

std::string Replace(std::string s, const std::string &from, const std::string &to) {
  const size_t pos = s.find(from);
  REQUIRE(pos != std::string::npos);
  return s.replace(pos, from.size(), to);
}

}  // namespace

TEST_CASE("ComputeHash matches sha256sum of title, newline, wikicode") {
  for (const auto &c : kHashCases) {
    CAPTURE(c.title);
    CHECK(ComputeHash(c.title, c.wikicode) == c.digest);
  }
  CHECK(ComputeHash("x", "y") == ComputeHash("x", "y"));
  CHECK(ComputeHash("x", "y") != ComputeHash("y", "x"));
}

TEST_CASE("minimal article serializes with nulls and empty lists") {
  const std::string line = SerializeArticle(MinimalArticle());
  CHECK(line ==
        "{\"title\":\"T\",\"wikicode\":\"\",\"hash\":"
        "\"678f81a714fbc72030f82f9980054d5cf90e6f041a367f7da2f35b0f7dafb0e5\","
        "\"last_revision\":\"2024-01-01T00:00:00Z\",\"first_revision\":null,\"first_revision_access_date\":null,"
        "\"cross_lingual_links\":null,\"cross_lingual_links_access_date\":null,\"text\":\"\",\"elements\":[],"
        "\"excerpts_with_citations\":[]}");
}

TEST_CASE("citation fields use the exact published names") {
  Article a = MinimalArticle();
  Heading h;
  h.text = "History";
  h.level = 2;
  Citation c;
  c.content = "<ref name=\"Thomas2013\">x</ref>";
  c.name = "Thomas2013";
  c.char_index = 7;
  h.citations.push_back(c);
  h.citations_needed.push_back({"{{Citation needed|date=September 2015}}", 0});
  a.elements.emplace_back(h);
  RefreshDerived(a);
  const auto j = nlohmann::ordered_json::parse(SerializeArticle(a));
  const auto &cj = j["elements"][0]["citations"][0];
  CHECK(cj["name"] == "Thomas2013");
  std::vector<std::string> keys;
  for (const auto &[k, v] : cj.items()) keys.push_back(k);
  CHECK(keys == std::vector<std::string>{"content", "char_index", "name", "url", "source_text",
                                         "source_code_content_type", "source_code_num_bytes",
                                         "source_code_num_chars", "source_download_date",
                                         "source_download_error", "source_extract_error", "source_snippet",
                                         "source_quality_label", "source_quality_raw_score"});
  CHECK(cj["source_code_num_bytes"].is_null());
  const auto &cn = j["elements"][0]["citations_needed"][0];
  CHECK(cn["type"] == "citation-needed");
  CHECK(j["elements"][0]["type"] == "heading");
}

TEST_CASE("each element kind carries its lowercase type tag") {
  Article a = MinimalArticle();
  Paragraph p;
  p.sentences.push_back({"Hi.", std::nullopt, "", {}, {}});
  a.elements = {Heading{"H", std::nullopt, 1, {}, {}}, p, Table{"{|\n|}"}, Infobox{"{{Infobox x}}"},
                Math{"x^2"}, Code{std::string("cpp"), "int x;"}, Preformatted{" pre"}};
  RefreshDerived(a);
  const auto j = nlohmann::json::parse(SerializeArticle(a));
  std::vector<std::string> types;
  for (const auto &e : j["elements"]) types.push_back(e["type"]);
  CHECK(types ==
        std::vector<std::string>{"heading", "paragraph", "table", "infobox", "math", "code", "preformatted"});
  CHECK(DeserializeArticle(SerializeArticle(a)) == a);
}

TEST_CASE("1000 random articles round-trip unchanged and validate") {
  std::mt19937_64 rng(20240611);
  for (int i = 0; i < 1000; ++i) {
    const Article a = RandomArticle(rng);
    const std::string line = SerializeArticle(a);
    REQUIRE(line.find('\n') == std::string::npos);
    const Article back = DeserializeArticle(line);
    REQUIRE(back == a);
    REQUIRE(SerializeArticle(back) == line);
    ValidateArticle(a);
  }
}

TEST_CASE("deserialize rejects schema violations with a field path") {
  Article a = MinimalArticle();
  Paragraph p;
  Sentence s;
  s.text = "Claim.";
  Citation c;
  c.content = "<ref>x</ref>";
  c.char_index = 6;
  c.url = "https://example.org";
  c.source_text = "body";
  c.source_quality_label = 3;
  s.citations.push_back(c);
  p.sentences.push_back(s);
  a.elements.emplace_back(p);
  RefreshDerived(a);
  const std::string good = SerializeArticle(a);
  REQUIRE_NOTHROW(DeserializeArticle(good));

  SUBCASE("label out of range") {
    const std::string bad = Replace(good, "\"source_quality_label\":3", "\"source_quality_label\":6");
    try {
      DeserializeArticle(bad);
      FAIL("expected SchemaError");
    } catch (const SchemaError &e) {
      CHECK(e.path().find("source_quality_label") != std::string::npos);
    }
  }
  SUBCASE("wrong-case type tag") {
    const std::string bad = Replace(good, "\"type\":\"paragraph\"", "\"type\":\"Paragraph\"");
    try {
      DeserializeArticle(bad);
      FAIL("expected SchemaError");
    } catch (const SchemaError &e) {
      CHECK(e.path().find("elements[0]") != std::string::npos);
    }
  }
  SUBCASE("unknown field") {
    const std::string bad = Replace(good, "\"title\":\"T\"", "\"title\":\"T\",\"extra\":1");
    CHECK_THROWS_AS(DeserializeArticle(bad), SchemaError);
  }
  SUBCASE("missing field") {
    const std::string bad = Replace(good, "\"wikicode\":\"\",", "");
    CHECK_THROWS_AS(DeserializeArticle(bad), SchemaError);
  }
  SUBCASE("trailing whitespace other than one space") {
    const std::string bad = Replace(good, "\"trailing_whitespace\":\"\"", "\"trailing_whitespace\":\"\\t\"");
    CHECK_THROWS_AS(DeserializeArticle(bad), SchemaError);
  }
  SUBCASE("not JSON") { CHECK_THROWS_AS(DeserializeArticle("{\"title\":"), SchemaError); }
}

TEST_CASE("ValidateArticle enforces the cross-field invariants") {
  Article a = MinimalArticle();
  Paragraph p;
  Sentence s;
  s.text = "Claim.";
  Citation c;
  c.content = "<ref>x</ref>";
  c.char_index = 6;
  s.citations.push_back(c);
  p.sentences.push_back(s);
  a.elements.emplace_back(p);
  RefreshDerived(a);
  REQUIRE_NOTHROW(ValidateArticle(a));

  auto citation = [](Article &art) -> Citation & {
    return std::get<Paragraph>(art.elements[0]).sentences[0].citations[0];
  };
  SUBCASE("offset past the end") {
    citation(a).char_index = 7;
    CHECK_THROWS_AS(ValidateArticle(a), SchemaError);
  }
  SUBCASE("negative offset") {
    citation(a).char_index = -1;
    CHECK_THROWS_AS(ValidateArticle(a), SchemaError);
  }
  SUBCASE("source fields without url") {
    citation(a).source_download_error = "MaxRetryError";
    CHECK_THROWS_AS(ValidateArticle(a), SchemaError);
  }
  SUBCASE("source text together with an error") {
    citation(a).url = "https://example.org";
    citation(a).source_text = "x";
    citation(a).source_extract_error = "Exception: empty document";
    CHECK_THROWS_AS(ValidateArticle(a), SchemaError);
  }
  SUBCASE("label without source text") {
    citation(a).url = "https://example.org";
    citation(a).source_quality_label = 2;
    CHECK_THROWS_AS(ValidateArticle(a), SchemaError);
  }
  SUBCASE("stale hash") {
    a.wikicode = "changed";
    CHECK_THROWS_AS(ValidateArticle(a), SchemaError);
  }
  SUBCASE("stale text") {
    a.text = "other";
    CHECK_THROWS_AS(ValidateArticle(a), SchemaError);
  }
  SUBCASE("heading level") {
    a.elements.emplace_back(Heading{"H", std::nullopt, 7, {}, {}});
    RefreshDerived(a);
    CHECK_THROWS_AS(ValidateArticle(a), SchemaError);
  }
  SUBCASE("excerpt citation not present in elements") {
    a.excerpts_with_citations[0].citations[0].content = "<ref>y</ref>";
    CHECK_THROWS_AS(ValidateArticle(a), SchemaError);
  }
}

TEST_CASE("char_index counts code points") {
  Article a = MinimalArticle();
  Paragraph p;
  Sentence s;
  s.text = "Zürich 😀";  // 8 code points, 12 bytes
  Citation c;
  c.content = "<ref>x</ref>";
  c.char_index = 8;
  s.citations.push_back(c);
  p.sentences.push_back(s);
  a.elements.emplace_back(p);
  RefreshDerived(a);
  CHECK_NOTHROW(ValidateArticle(a));
  std::get<Paragraph>(a.elements[0]).sentences[0].citations[0].char_index = 9;
  RefreshDerived(a);
  CHECK_THROWS_AS(ValidateArticle(a), SchemaError);
}

TEST_CASE("article text joins headings and paragraphs with newlines") {
  Article a = MinimalArticle();
  Paragraph p;
  p.sentences = {{"One.", std::nullopt, " ", {}, {}}, {"Two.", std::nullopt, "", {}, {}}};
  a.elements = {Heading{"Intro", std::nullopt, 2, {}, {}}, Table{"{|\n|}"}, p, Math{"x"},
                Heading{"End", std::nullopt, 2, {}, {}}};
  CHECK(ArticleText(a.elements) == "Intro\nOne. Two.\nEnd");
}

TEST_CASE("chunk files hold one newline-terminated line per article") {
  TempDir dir;
  std::mt19937_64 rng(3);
  std::vector<Article> articles;
  for (int i = 0; i < 25; ++i) articles.push_back(RandomArticle(rng));
  const auto path = dir / "chunk_00000.jsonl";
  WriteChunkAtomic(path, articles);
  const std::string bytes = ReadFile(path);
  CHECK(std::count(bytes.begin(), bytes.end(), '\n') == 25);
  CHECK(bytes.back() == '\n');
  CHECK(ReadChunk(path) == articles);
}

TEST_CASE("ReadChunk reports the file and line of a bad record") {
  TempDir dir;
  const auto path = dir / "chunk_00000.jsonl";
  const std::string good = SerializeArticle(MinimalArticle());
  WriteLinesAtomic(path, {good, Replace(good, "\"text\":\"\"", "\"text\":5")});
  try {
    ReadChunk(path);
    FAIL("expected SchemaError");
  } catch (const SchemaError &e) {
    const std::string what = e.what();
    CHECK(what.find("chunk_00000.jsonl") != std::string::npos);
    CHECK(what.find(":2") != std::string::npos);
  }
}
