#include <random>

#include "doctest.h"
#include "mwcorpus/utf8.h"
#include "test_support.h"

using namespace mwcorpus;

TEST_CASE("Length counts scalar values") {
  CHECK(utf8::Length("") == 0);
  CHECK(utf8::Length("abc") == 3);
  CHECK(utf8::Length("Zürich") == 6);
  CHECK(utf8::Length("東京") == 2);
  CHECK(utf8::Length("😀x") == 2);
}

TEST_CASE("ByteOffset and Truncate work in code points") {
  const std::string s = "aé東😀b";
  CHECK(utf8::ByteOffset(s, 0) == 0);
  CHECK(utf8::ByteOffset(s, 1) == 1);
  CHECK(utf8::ByteOffset(s, 2) == 3);
  CHECK(utf8::ByteOffset(s, 3) == 6);
  CHECK(utf8::ByteOffset(s, 4) == 10);
  CHECK(utf8::ByteOffset(s, 99) == s.size());
  CHECK(utf8::Truncate(s, 3) == "aé東");
  CHECK(utf8::Truncate(s, 10) == s);
}

TEST_CASE("Sanitize replaces invalid bytes") {
  CHECK(utf8::IsValid("Zürich"));
  CHECK_FALSE(utf8::IsValid("a\xff" "b"));
  CHECK(utf8::Sanitize("a\xff" "b") == "a\xEF\xBF\xBD" "b");
  CHECK(utf8::Sanitize("\xC3") == "\xEF\xBF\xBD");
  CHECK_FALSE(utf8::IsValid("\xED\xA0\x80"));  // surrogate
  CHECK_FALSE(utf8::IsValid("\xC0\xAF"));      // overlong
}

TEST_CASE("Decode and Encode are inverse on valid text") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 500; ++i) {
    const std::string text = testing::RandomText(rng, 50);
    REQUIRE(utf8::Encode(utf8::Decode(text)) == text);
    REQUIRE(utf8::Decode(text).size() == utf8::Length(text));
  }
}

TEST_CASE("FoldCase and StartsWithFolded") {
  CHECK(utf8::FoldCase("ÉCOLE Жук") == "école жук");
  CHECK(utf8::StartsWithFolded("fichier:Paris.jpg", "Fichier:"));
  CHECK(utf8::StartsWithFolded("ФАЙЛ:x", "Файл:"));
  CHECK_FALSE(utf8::StartsWithFolded("File", "File:"));
}

TEST_CASE("Reverse reverses by code point") {
  CHECK(utf8::Reverse("abc") == "cba");
  CHECK(utf8::Reverse("aé😀") == "😀éa");
  CHECK(utf8::Reverse("") == "");
}

TEST_CASE("character classes") {
  CHECK(utf8::IsSpace(U' '));
  CHECK(utf8::IsSpace(U' '));
  CHECK(utf8::IsLetter(U'ж'));
  CHECK(utf8::IsLower(U'é'));
  CHECK_FALSE(utf8::IsLower(U'É'));
  CHECK(utf8::IsDigit(U'7'));
  CHECK_FALSE(utf8::IsLetter(U'7'));
}
