#include <random>

#include "doctest.h"
#include "mwcorpus/language_config.h"
#include "mwcorpus/segmenter.h"
#include "mwcorpus/utf8.h"
#include "test_support.h"

using namespace mwcorpus;

namespace {

using Spans = std::vector<SentenceSpan>;

Spans Seg(std::string_view text, std::string_view lang = "en") {
  return SegmentParagraph(text, DefaultLanguageConfig(lang).segmenter);
}

std::string Join(const Spans &spans) {
  std::string out;
  for (const auto &s : spans) out += s.text + s.trailing_whitespace;
  return out;
}

std::string RandomParagraph(std::mt19937_64 &rng) {
  static const std::vector<std::string> kPieces = {
      "The", "cat", "sat", "Dr.", "Mr.", "e.g.", "U.S.", "St.", "z.B.", "Nr.", "т.е.", "г.", "Sr.", "1.", "3.5",
      "été", "Zürich", "Москва", "東京", "日本語", "中文", "A.", "J.", "\"Go.\"", "(see above.)", "word",
      "lower", "Upper", "…", "!", "?", ".", "。", "！", "？", "।", "«", "»", "’", "\t", "  ", "😀", "x"};
  std::string out;
  const int n = std::uniform_int_distribution<int>(0, 40)(rng);
  for (int i = 0; i < n; ++i) {
    out += kPieces[std::uniform_int_distribution<size_t>(0, kPieces.size() - 1)(rng)];
    const int gap = std::uniform_int_distribution<int>(0, 6)(rng);
    if (gap < 4) out += " ";
    if (gap == 5) out += "  ";
  }
  return out;
}

}  // namespace

TEST_CASE("basic splitting") {
  CHECK(Seg("A b. C d.") == Spans{{"A b.", " "}, {"C d.", ""}});
  CHECK(Seg("He said \"Go.\"") == Spans{{"He said \"Go.\"", ""}});
  CHECK(Seg("").empty());
  CHECK(Seg("No terminal here") == Spans{{"No terminal here", ""}});
  CHECK(Seg("Why? Because! Yes.") == Spans{{"Why?", " "}, {"Because!", " "}, {"Yes.", ""}});
}

TEST_CASE("closing quotes and brackets stay with the sentence") {
  CHECK(Seg("He said \"Go.\" Then left.") == Spans{{"He said \"Go.\"", " "}, {"Then left.", ""}});
  CHECK(Seg("It ended (finally.) Next one.") == Spans{{"It ended (finally.)", " "}, {"Next one.", ""}});
  CHECK(Seg("« Oui. » Non.", "fr") == Spans{{"« Oui. »", " "}, {"Non.", ""}});
}

TEST_CASE("abbreviations, initials and lowercase continuations suppress breaks") {
  CHECK(Seg("Dr. Smith arrived. He sat.") == Spans{{"Dr. Smith arrived.", " "}, {"He sat.", ""}});
  CHECK(Seg("J. R. R. Tolkien wrote. Then slept.") ==
        Spans{{"J. R. R. Tolkien wrote.", " "}, {"Then slept.", ""}});
  CHECK(Seg("It costs approx. five dollars.") == Spans{{"It costs approx. five dollars.", ""}});
  CHECK(Seg("Das ist z.B. gut. Aber nein.", "de") == Spans{{"Das ist z.B. gut.", " "}, {"Aber nein.", ""}});
}

TEST_CASE("scripts without spaces break on full-width terminals") {
  CHECK(Seg("東京は首都です。大阪は都市です。", "en") == Spans{{"東京は首都です。", ""}, {"大阪は都市です。", ""}});
  CHECK(Seg("你好！再见？", "en") == Spans{{"你好！", ""}, {"再见？", ""}});
}

TEST_CASE("only a single space is consumed as trailing whitespace") {
  const auto spans = Seg("One.  Two.");
  CHECK(Join(spans) == "One.  Two.");
  for (const auto &s : spans) CHECK((s.trailing_whitespace.empty() || s.trailing_whitespace == " "));
  CHECK(Join(Seg("One.\tTwo.")) == "One.\tTwo.");
}

TEST_CASE("exact reconstruction on 10000 random paragraphs") {
  std::mt19937_64 rng(424242);
  const std::vector<std::string> langs = {"en", "fr", "de", "es", "ru", "ja"};
  for (int i = 0; i < 10000; ++i) {
    const std::string text = i % 2 ? RandomParagraph(rng) : testing::RandomText(rng, 120);
    const auto spans = Seg(text, langs[static_cast<size_t>(i) % langs.size()]);
    REQUIRE(Join(spans) == text);
    for (const auto &s : spans) {
      REQUIRE((s.trailing_whitespace.empty() || s.trailing_whitespace == " "));
      REQUIRE_FALSE(s.text.empty());
    }
  }
}

TEST_CASE("segmenting a single sentence is idempotent") {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 2000; ++i) {
    const std::string text = RandomParagraph(rng);
    CAPTURE(text);
    for (const auto &s : Seg(text)) {
      const auto again = Seg(s.text);
      REQUIRE(again.size() == 1);
      REQUIRE(again[0].text == s.text);
    }
  }
}

TEST_CASE("AssignOffsets maps paragraph offsets to sentences") {
  auto cite = [](int64_t at) {
    Citation c;
    c.content = "<ref>" + std::to_string(at) + "</ref>";
    c.char_index = at;
    return c;
  };
  SUBCASE("single sentence") {
    const auto out = AssignOffsets({{"Sun is hot.", ""}}, {cite(11)}, {});
    REQUIRE(out.size() == 1);
    REQUIRE(out[0].citations.size() == 1);
    CHECK(out[0].citations[0].char_index == 11);
  }
  SUBCASE("boundary goes to the earlier sentence") {
    const Spans spans = {{"Aaaa.", " "}, {"Bbbb.", ""}};
    const auto out = AssignOffsets(spans, {cite(5), cite(6), cite(0), cite(11)}, {{"{{cn}}", 3}});
    REQUIRE(out.size() == 2);
    REQUIRE(out[0].citations.size() == 2);
    CHECK(out[0].citations[0].char_index == 5);
    CHECK(out[0].citations[1].char_index == 0);
    REQUIRE(out[1].citations.size() == 2);
    CHECK(out[1].citations[0].char_index == 0);
    CHECK(out[1].citations[1].char_index == 5);
    REQUIRE(out[0].citations_needed.size() == 1);
    CHECK(out[0].citations_needed[0].char_index == 3);
    CHECK(out[0].text == "Aaaa.");
    CHECK(out[0].trailing_whitespace == " ");
  }
  SUBCASE("offset past the end attaches to the last sentence and warns") {
    int warnings = 0;
    const auto out = AssignOffsets({{"Ab.", " "}, {"Cd.", ""}}, {cite(40)}, {}, &warnings);
    CHECK(warnings == 1);
    REQUIRE(out[1].citations.size() == 1);
    CHECK(out[1].citations[0].char_index == 3);
  }
  SUBCASE("offsets count code points") {
    const auto out = AssignOffsets({{"Zürich.", " "}, {"東京。", ""}}, {cite(8), cite(11)}, {});
    REQUIRE(out[1].citations.size() == 2);
    CHECK(out[1].citations[0].char_index == 0);
    CHECK(out[1].citations[1].char_index == 3);
  }
}

TEST_CASE("AssignOffsets conserves citations and keeps them in bounds") {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 2000; ++i) {
    const std::string text = RandomParagraph(rng);
    const auto spans = Seg(text);
    const auto length = static_cast<int64_t>(utf8::Length(text));
    std::vector<Citation> cites;
    const int n = std::uniform_int_distribution<int>(0, 6)(rng);
    for (int k = 0; k < n; ++k) {
      Citation c;
      c.content = "<ref/>";
      c.char_index = std::uniform_int_distribution<int64_t>(0, length)(rng);
      cites.push_back(c);
    }
    int warnings = 0;
    const auto out = AssignOffsets(spans, cites, {}, &warnings);
    size_t total = 0;
    for (const auto &s : out) {
      total += s.citations.size();
      for (const auto &c : s.citations) {
        REQUIRE(c.char_index >= 0);
        REQUIRE(c.char_index <= static_cast<int64_t>(utf8::Length(s.text)));
      }
    }
    if (spans.empty()) {
      REQUIRE(static_cast<int>(cites.size()) == warnings);
    } else {
      REQUIRE(total == cites.size());
      REQUIRE(warnings == 0);
    }
  }
}

TEST_CASE("lowercase continuation after any terminal") {
  CHECK(Seg("« Quel accueil ! » pense-t-il alors. Il entre.", "fr") ==
        Spans{{"« Quel accueil ! » pense-t-il alors.", " "}, {"Il entre.", ""}});
  CHECK(Seg("\"Stop!\" she said. Then quiet.") == Spans{{"\"Stop!\" she said.", " "}, {"Then quiet.", ""}});
}

TEST_CASE("ordinal numbers before listed words do not end a sentence") {
  CHECK(Seg("Er wurde am 14. März 1879 geboren. Danach zog er um.", "de") ==
        Spans{{"Er wurde am 14. März 1879 geboren.", " "}, {"Danach zog er um.", ""}});
  CHECK(Seg("Im 19. Jahrhundert wuchs die Stadt.", "de") == Spans{{"Im 19. Jahrhundert wuchs die Stadt.", ""}});
  CHECK(Seg("Das war 1237. Nach dem Krieg kam mehr.", "de") ==
        Spans{{"Das war 1237.", " "}, {"Nach dem Krieg kam mehr.", ""}});
  CHECK(Seg("It was 1879. March came.", "en") == Spans{{"It was 1879.", " "}, {"March came.", ""}});
}
