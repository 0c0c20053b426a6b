#ifndef MWCORPUS_TESTS_TEST_SUPPORT_H_
#define MWCORPUS_TESTS_TEST_SUPPORT_H_

#include <filesystem>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"
#include "mwcorpus/dump.h"
#include "mwcorpus/schema.h"

namespace mwcorpus::testing {

std::filesystem::path DataDir();

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir &) = delete;
  TempDir &operator=(const TempDir &) = delete;
  const std::filesystem::path &path() const { return path_; }
  std::filesystem::path operator/(const std::string &name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// An httplib server on a free loopback port, serving until destroyed.
class MockServer {
 public:
  MockServer();
  ~MockServer();
  MockServer(const MockServer &) = delete;
  MockServer &operator=(const MockServer &) = delete;

  httplib::Server &server() { return server_; }
  // Must be called after routes are registered.
  void Start();
  int port() const { return port_; }
  std::string url(const std::string &path = "") const;

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

// A loopback port with nothing listening.
int ClosedPort();

std::string XmlEscape(const std::string &text);
// MediaWiki export XML for the pages, one revision each.
std::string DumpXml(const std::vector<RawPage> &pages);
void WriteDump(const std::filesystem::path &path, const std::vector<RawPage> &pages);

// Citation sources and a fake Action API on one loopback server.
// /src/ok/<id> serves 150 words of HTML under a heading, /src/short/<id> 20 and
// /src/gone/<id> a 404. /w/api.php answers langlinks with a single "de" link
// and revisions with kFixtureFirstRevision; titles containing "Missing" are
// missing pages.
inline constexpr const char *kFixtureFirstRevision = "2015-06-01T09:30:00Z";

class FixtureWeb {
 public:
  FixtureWeb();
  std::string url(const std::string &path = "") const { return mock_.url(path); }
  std::string api() const { return mock_.url("/w/api.php"); }
  int source_hits() const { return source_hits_; }
  int api_hits() const { return api_hits_; }

 private:
  MockServer mock_;
  std::atomic<int> source_hits_{0};
  std::atomic<int> api_hits_{0};
};

// "Article <i>" pages. Each has 1 heading, 2 paragraphs, 3 sentences and 2
// citations, one of them a web citation to /src/<kind>/<i> where kind is
// "gone" for i % 10 == 3, "short" for i % 10 == 7 and "ok" otherwise.
std::vector<RawPage> FixturePages(const std::string &base_url, size_t count, size_t first = 0);
std::string FixtureWikicode(const std::string &base_url, size_t i);
// Pages the ingest filter drops: a redirect, a category and a website stub.
std::vector<RawPage> FilteredPages();

// A random article satisfying ValidateArticle, exercising every element
// kind and every optional field.
Article RandomArticle(std::mt19937_64 &rng);

// Random UTF-8 text mixing ASCII, accented Latin, Cyrillic, CJK and emoji.
std::string RandomText(std::mt19937_64 &rng, size_t max_code_points);

}  // namespace mwcorpus::testing

#endif  // MWCORPUS_TESTS_TEST_SUPPORT_H_
