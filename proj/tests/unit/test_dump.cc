#include <cstdlib>
#include <fstream>
#include <sstream>
#include <streambuf>

#include "doctest.h"
#include "mwcorpus/chunk_io.h"
#include "mwcorpus/dump.h"
#include "mwcorpus/errors.h"
#include "mwcorpus/pipeline.h"
#include "test_support.h"

using namespace mwcorpus;
using mwcorpus::testing::DumpXml;
using mwcorpus::testing::TempDir;
using mwcorpus::testing::WriteDump;

namespace {

std::vector<RawPage> ReadAll(const std::string &xml) {
  std::istringstream in(xml);
  PageReader reader(in);
  std::vector<RawPage> out;
  while (auto p = reader.Next()) out.push_back(*p);
  return out;
}

std::vector<RawPage> NumberedPages(size_t n) {
  std::vector<RawPage> pages;
  for (size_t i = 0; i < n; ++i) {
    pages.push_back({"Page " + std::to_string(i), "Body of page " + std::to_string(i) + ".",
                     "2024-03-01T00:00:00Z", 0});
  }
  return pages;
}

// Serves an endless-looking dump of `pages` pages without holding it in
// memory.
class SyntheticDumpBuf : public std::streambuf {
 public:
  explicit SyntheticDumpBuf(size_t pages) : remaining_(pages) { Refill("<mediawiki>\n"); }

 protected:
  int_type underflow() override {
    if (gptr() < egptr()) return traits_type::to_int_type(*gptr());
    if (remaining_ == 0) {
      if (done_) return traits_type::eof();
      done_ = true;
      Refill("</mediawiki>\n");
    } else {
      --remaining_;
      Refill("<page><title>P" + std::to_string(remaining_) +
             "</title><revision><timestamp>2024-01-01T00:00:00Z</timestamp><text>" + std::string(4000, 'x') +
             "</text></revision></page>\n");
    }
    return traits_type::to_int_type(*gptr());
  }

 private:
  void Refill(std::string s) {
    chunk_ = std::move(s);
    setg(chunk_.data(), chunk_.data(), chunk_.data() + chunk_.size());
  }
  std::string chunk_;
  size_t remaining_;
  bool done_ = false;
};

long ResidentKb() {
  std::ifstream status("/proc/self/status");
  std::string line;
  while (std::getline(status, line)) {
    if (line.rfind("VmRSS:", 0) == 0) return std::stol(line.substr(6));
  }
  return -1;
}

}  // namespace

TEST_CASE("PageReader yields pages in document order") {
  const std::vector<RawPage> pages = {{"Alpha", "First & <b>bold</b>", "2024-01-01T00:00:00Z", 0},
                                      {"Beta", "Zweite Seite über Zürich", "2024-01-02T00:00:00Z", 0},
                                      {"Gamma", "", "2024-01-03T00:00:00Z", 0}};
  const auto got = ReadAll(DumpXml(pages));
  REQUIRE(got.size() == 3);
  for (size_t i = 0; i < 3; ++i) {
    CHECK(got[i].title == pages[i].title);
    CHECK(got[i].wikicode == pages[i].wikicode);
    CHECK(got[i].last_revision == pages[i].last_revision);
    CHECK(got[i].dump_position == i);
  }
}

TEST_CASE("PageReader handles an empty root and rejects truncated XML") {
  CHECK(ReadAll("<mediawiki></mediawiki>").empty());
  CHECK(ReadAll("<mediawiki xmlns=\"http://www.mediawiki.org/xml/export-0.11/\"/>").empty());

  const std::string xml = DumpXml(NumberedPages(3));
  const std::string truncated = xml.substr(0, xml.size() / 2);
  try {
    ReadAll(truncated);
    FAIL("expected XmlError");
  } catch (const XmlError &e) {
    CHECK(e.byte_offset() <= truncated.size());
  }
  CHECK_THROWS_AS(ReadAll("<mediawiki><page><title>x</titel></page></mediawiki>"), XmlError);
}

TEST_CASE("only the latest revision text is kept per page") {
  const std::string xml =
      "<mediawiki><page><title>T</title><ns>0</ns><revision><timestamp>2024-05-05T10:00:00Z</timestamp>"
      "<contributor><username>U</username></contributor><comment>c</comment><text>body</text></revision>"
      "</page></mediawiki>";
  const auto got = ReadAll(xml);
  REQUIRE(got.size() == 1);
  CHECK(got[0].title == "T");
  CHECK(got[0].wikicode == "body");
  CHECK(got[0].last_revision == "2024-05-05T10:00:00Z");
}

TEST_CASE("ShouldFilter matches the three trigger patterns") {
  auto page = [](std::string title, std::string wikicode) { return RawPage{title, wikicode, "", 0}; };
  CHECK(ShouldFilter(page("Main", "#REDIRECT [[Main]]")));
  CHECK(ShouldFilter(page("Main", "#redirect [[Main]]")));
  CHECK(ShouldFilter(page("Main", "#ReDiReCt[[x]]")));
  CHECK(ShouldFilter(page("Site", "Text {{Website-stub}}")));
  CHECK(ShouldFilter(page("Site", "Text {{WEBSITE-STUB}}")));
  CHECK(ShouldFilter(page("Category:Physics", "Physics pages")));
  CHECK(ShouldFilter(page("Talk:Category:Physics", "x")));
  CHECK_FALSE(ShouldFilter(page("category:physics", "Plain prose.")));
  CHECK_FALSE(ShouldFilter(page("Redirect", "A redirect is a page.")));
  CHECK_FALSE(ShouldFilter(page("Stub", "{{stub}} {{website}}")));
  CHECK_FALSE(ShouldFilter(page("Talk:Physics", "Talk pages survive ingest.")));
}

TEST_CASE("filtering never drops pages without a trigger") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 2000; ++i) {
    RawPage p{testing::RandomText(rng, 30), testing::RandomText(rng, 200), "", 0};
    REQUIRE_FALSE(ShouldFilter(p));
  }
}

TEST_CASE("WriteChunks splits into files of 1000") {
  TempDir dir;
  SUBCASE("2500 pages") {
    const auto pages = NumberedPages(2500);
    const auto m = WriteChunks(pages, dir.path(), "en");
    REQUIRE(m.chunk_paths.size() == 3);
    CHECK(m.article_count == 2500);
    CHECK(m.chunk_paths[0].filename() == "chunk_00000.jsonl");
    CHECK(m.chunk_paths[2].filename() == "chunk_00002.jsonl");
    CHECK(ReadChunk(m.chunk_paths[0]).size() == 1000);
    CHECK(ReadChunk(m.chunk_paths[1]).size() == 1000);
    CHECK(ReadChunk(m.chunk_paths[2]).size() == 500);
    size_t i = 0;
    for (const auto &path : m.chunk_paths) {
      for (const auto &a : ReadChunk(path)) {
        REQUIRE(a.title == pages[i].title);
        REQUIRE(a.hash == ComputeHash(a.title, a.wikicode));
        REQUIRE(a.elements.empty());
        ++i;
      }
    }
    CHECK(LoadManifest(dir.path()) == m);
  }
  SUBCASE("1000 pages") {
    const auto m = WriteChunks(NumberedPages(1000), dir.path(), "en");
    REQUIRE(m.chunk_paths.size() == 1);
    CHECK(ReadChunk(m.chunk_paths[0]).size() == 1000);
  }
  SUBCASE("no pages") {
    const auto m = WriteChunks(std::vector<RawPage>{}, dir.path(), "en");
    CHECK(m.chunk_paths.empty());
    CHECK(m.article_count == 0);
    CHECK(ListChunks(dir.path()).empty());
  }
}

TEST_CASE("WriteChunks refuses to rerun over an existing manifest") {
  TempDir dir;
  WriteChunks(NumberedPages(3), dir.path(), "en");
  CHECK_THROWS_AS(WriteChunks(NumberedPages(3), dir.path(), "en"), IoError);
  ChunkOptions overwrite;
  overwrite.overwrite = true;
  CHECK(WriteChunks(NumberedPages(2), dir.path(), "en", overwrite).article_count == 2);
}

TEST_CASE("IngestDump reads plain, gzip and bzip2 dumps identically") {
  TempDir dir;
  std::vector<RawPage> pages = NumberedPages(30);
  pages.push_back({"Old name", "#REDIRECT [[Page 1]]", "2024-03-01T00:00:00Z", 0});
  pages.push_back({"Category:Things", "Things.", "2024-03-01T00:00:00Z", 0});
  pages.push_back({"Some site", "A site. {{website-stub}}", "2024-03-01T00:00:00Z", 0});
  const auto plain = dir / "dump.xml";
  WriteDump(plain, pages);
  REQUIRE(std::system(("gzip -c " + plain.string() + " > " + (dir / "dump.xml.gz").string()).c_str()) == 0);
  REQUIRE(std::system(("bzip2 -c " + plain.string() + " > " + (dir / "dump.xml.bz2").string()).c_str()) == 0);
  CHECK(SniffCompression(plain) == Compression::kNone);
  CHECK(SniffCompression(dir / "dump.xml.gz") == Compression::kGzip);
  CHECK(SniffCompression(dir / "dump.xml.bz2") == Compression::kBzip2);

  std::vector<std::vector<Article>> results;
  for (const char *name : {"dump.xml", "dump.xml.gz", "dump.xml.bz2"}) {
    const auto out = dir / (std::string(name) + ".chunks");
    const auto report = IngestDump(dir / name, out, "en");
    CHECK(report.pages_read == 33);
    CHECK(report.pages_filtered == 3);
    CHECK(report.manifest.article_count == 30);
    CHECK(report.manifest.source_sha256 == FileSha256(dir / name));
    results.push_back(ReadChunk(report.manifest.chunk_paths[0]));
  }
  CHECK(results[0] == results[1]);
  CHECK(results[0] == results[2]);
}

TEST_CASE("multistream bzip2 dumps are read to the end") {
  TempDir dir;
  const std::string xml = DumpXml(NumberedPages(10));
  const size_t cut = xml.find("<page>", xml.size() / 2);
  std::ofstream(dir / "a.xml", std::ios::binary) << xml.substr(0, cut);
  std::ofstream(dir / "b.xml", std::ios::binary) << xml.substr(cut);
  const std::string cmd = "bzip2 -c " + (dir / "a.xml").string() + " > " + (dir / "m.bz2").string() +
                          " && bzip2 -c " + (dir / "b.xml").string() + " >> " + (dir / "m.bz2").string();
  REQUIRE(std::system(cmd.c_str()) == 0);
  const auto report = IngestDump(dir / "m.bz2", dir / "out", "en");
  CHECK(report.manifest.article_count == 10);
}

TEST_CASE("streaming a large dump keeps memory bounded") {
  // About 100 MB of XML in 25000 pages of 4 KB.
  SyntheticDumpBuf buf(25000);
  std::istream in(&buf);
  PageReader reader(in);
  const long before = ResidentKb();
  size_t n = 0;
  uint64_t last_position = 0;
  while (auto p = reader.Next()) {
    if (n > 0) REQUIRE(p->dump_position > last_position);
    last_position = p->dump_position;
    ++n;
  }
  const long growth = ResidentKb() - before;
  CHECK(n == 25000);
  CHECK(reader.bytes_consumed() > 100'000'000);
  MESSAGE("resident growth " << growth << " KB");
  CHECK(growth < 16 * 1024);
}
