#include <chrono>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "mwcorpus/language_config.h"
#include "mwcorpus/utf8.h"
#include "mwcorpus/wikitext.h"
#include "test_support.h"

using namespace mwcorpus;
namespace fs = std::filesystem;

namespace {

std::string Slurp(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json Expected() { return nlohmann::json::parse(Slurp(testing::DataDir() / "golden" / "expected.json")); }

size_t CountContent(std::string_view text) {
  size_t n = 0;
  for (char32_t cp : utf8::Decode(text)) {
    if (utf8::IsLetter(cp) || utf8::IsDigit(cp)) ++n;
  }
  return n;
}

// Letters and digits of the wikicode outside comments and file, media and
// category links.
size_t CountInputContent(std::string_view wikicode, const LanguageConfig &config) {
  std::string text(wikicode);
  for (size_t at = text.find("<!--"); at != std::string::npos; at = text.find("<!--", at)) {
    const size_t end = text.find("-->", at);
    text.erase(at, end == std::string::npos ? std::string::npos : end + 3 - at);
  }
  std::vector<std::string> dropped = config.file_media_prefixes;
  dropped.insert(dropped.end(), config.category_prefixes.begin(), config.category_prefixes.end());
  for (size_t at = text.find("[["); at != std::string::npos; at = text.find("[[", at + 2)) {
    const std::string_view rest = std::string_view(text).substr(at + 2);
    bool drop = false;
    for (const auto &prefix : dropped) drop = drop || utf8::StartsWithFolded(rest, prefix);
    if (!drop) continue;
    int depth = 0;
    size_t k = at;
    for (; k + 1 < text.size(); ++k) {
      if (text.compare(k, 2, "[[") == 0) ++depth, ++k;
      else if (text.compare(k, 2, "]]") == 0 && --depth == 0) break;
      else if (text.compare(k, 2, "]]") == 0) ++k;
    }
    text.erase(at, k + 2 - at);
    at = at > 2 ? at - 2 : 0;
  }
  return CountContent(text);
}

// Reused named refs carry their definition's content again, so each
// distinct citation body is counted once.
size_t CountOutputContent(const std::vector<Element> &elements) {
  size_t n = 0;
  std::set<std::string> seen;
  auto markers = [&](const auto &owner) {
    for (const auto &c : owner.citations) {
      if (seen.insert(c.content).second) n += CountContent(c.content);
    }
    for (const auto &c : owner.citations_needed) n += CountContent(c.content);
  };
  for (const auto &e : elements) {
    if (const auto *h = std::get_if<Heading>(&e)) {
      n += CountContent(h->text);
      markers(*h);
    } else if (const auto *p = std::get_if<Paragraph>(&e)) {
      for (const auto &s : p->sentences) {
        n += CountContent(s.text);
        markers(s);
      }
    } else if (const auto *c = std::get_if<Code>(&e)) {
      n += CountContent(c->content);
    } else {
      std::visit([&](const auto &raw) {
        if constexpr (requires { raw.content; }) n += CountContent(raw.content);
      }, e);
    }
  }
  return n;
}

}  // namespace

TEST_CASE("golden corpus has at least 20 articles in several languages") {
  const auto expected = Expected();
  CHECK(expected.size() >= 20);
  std::set<std::string> languages;
  for (const auto &[name, entry] : expected.items()) {
    languages.insert(entry["language"].get<std::string>());
    CHECK(fs::exists(testing::DataDir() / "golden" / name));
  }
  CHECK(languages.size() >= 5);
}

TEST_CASE("golden corpus parses to the hand-checked structure") {
  const auto start = std::chrono::steady_clock::now();
  size_t input_content = 0;
  size_t output_content = 0;
  const auto expected = Expected();
  for (const auto &[name, entry] : expected.items()) {
    CAPTURE(name);
    const std::string wikicode = Slurp(testing::DataDir() / "golden" / name);
    const LanguageConfig config = DefaultLanguageConfig(entry["language"].get<std::string>());
    std::vector<Element> elements;
    ParseStats stats;
    REQUIRE_NOTHROW(elements = ParseArticle(wikicode, config, &stats));
    CHECK(stats.degraded_blocks == 0);

    std::vector<std::string> kinds;
    std::vector<std::string> headings;
    std::vector<std::string> paragraphs;
    int citations = 0;
    int needed = 0;
    int with_url = 0;
    for (const auto &e : elements) {
      kinds.emplace_back(ElementType(e));
      if (const auto *h = std::get_if<Heading>(&e)) {
        headings.push_back(h->text);
        const auto len = static_cast<int64_t>(utf8::Length(h->text));
        for (const auto &c : h->citations) CHECK((c.char_index >= 0 && c.char_index <= len));
        citations += static_cast<int>(h->citations.size());
        needed += static_cast<int>(h->citations_needed.size());
      } else if (const auto *p = std::get_if<Paragraph>(&e)) {
        std::string joined;
        for (size_t i = 0; i < p->sentences.size(); ++i) {
          const auto &s = p->sentences[i];
          CHECK_FALSE(s.text.empty());
          if (i + 1 == p->sentences.size()) CHECK(s.trailing_whitespace.empty());
          CHECK((s.trailing_whitespace.empty() || s.trailing_whitespace == " "));
          const auto len = static_cast<int64_t>(utf8::Length(s.text));
          for (const auto &c : s.citations) {
            CHECK((c.char_index >= 0 && c.char_index <= len));
            with_url += c.url.has_value();
          }
          for (const auto &c : s.citations_needed) CHECK((c.char_index >= 0 && c.char_index <= len));
          citations += static_cast<int>(s.citations.size());
          needed += static_cast<int>(s.citations_needed.size());
          joined += s.text + s.trailing_whitespace;
        }
        paragraphs.push_back(joined);
      }
    }
    CHECK(kinds == entry["elements"].get<std::vector<std::string>>());
    CHECK(headings == entry["headings"].get<std::vector<std::string>>());
    CHECK(paragraphs == entry["paragraphs"].get<std::vector<std::string>>());
    CHECK(citations == entry["citations"].get<int>());
    CHECK(needed == entry["citations_needed"].get<int>());
    CHECK(with_url == entry["citations_with_url"].get<int>());

    input_content += CountInputContent(wikicode, config);
    output_content += CountOutputContent(elements);
  }
  const double kept = static_cast<double>(output_content) / static_cast<double>(input_content);
  MESSAGE("content kept " << kept);
  CHECK(kept >= 0.90);
  CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(60));
}
