#include <map>
#include <mutex>

#include "doctest.h"
#include "json.hpp"
#include "mwcorpus/enrich.h"
#include "mwcorpus/errors.h"
#include "test_support.h"

using namespace mwcorpus;
using nlohmann::json;

namespace {

const char *kAccess = "2024-05-01T12:00:00Z";

struct Page {
  std::vector<std::pair<std::string, std::string>> links;
  std::string first_revision = "2010-01-01T00:00:00Z";
};

// A fake Action API speaking formatversion=2 for a handful of pages.
class FakeApi {
 public:
  FakeApi() {
    pages_["Les Hauts de Hurlevent"] = {{{"en", "Wuthering Heights"}, {"es", "Cumbres Borrascosas"}, {"fr", "x"}},
                                        "2023-09-04T08:19:40Z"};
    pages_["Lonely"] = {{}, "2005-03-02T10:00:00Z"};
    // A redirect page keeps its own (empty) links and its own creation date.
    pages_["Hurlevent"] = {{}, "2019-11-11T11:11:11Z"};
    pages_["Les Hauts de Hurlevent (roman)"] = {{{"de", "Sturmhöhe"}}, "2001-01-01T00:00:00Z"};
    pages_["Bad time"] = {{}, "yesterday"};
    for (int i = 0; i < 5; ++i) pages_["Many"].links.push_back({"l" + std::to_string(i), "T" + std::to_string(i)});
    for (int i = 0; i < 10; ++i) pages_["P" + std::to_string(i)] = {{{"en", "E" + std::to_string(i)}}, "2020-01-01T00:00:00Z"};

    mock_.server().Get("/w/api.php", [this](const httplib::Request &req, httplib::Response &res) {
      std::lock_guard<std::mutex> lock(mu_);
      const std::string title = req.get_param_value("titles");
      ++hits_[title];
      agents_.push_back(req.get_header_value("User-Agent"));
      if (title == "Flaky" && hits_[title] == 1) {
        res.status = 429;
        return;
      }
      if (title == "Down") {
        res.status = 503;
        return;
      }
      if (title == "Garbage") {
        res.set_content("<html>", "text/html");
        return;
      }
      json page = {{"title", title}};
      const std::string name = title == "Flaky" ? "Lonely" : title;
      const auto it = pages_.find(name);
      if (it == pages_.end()) {
        page["missing"] = true;
      } else if (req.get_param_value("prop") == "langlinks") {
        json links = json::array();
        const auto &all = it->second.links;
        // Two links per reply, continuing by index.
        const size_t from = req.has_param("llcontinue") ? std::stoul(req.get_param_value("llcontinue")) : 0;
        for (size_t i = from; i < all.size() && i < from + 2; ++i) {
          links.push_back({{"lang", all[i].first}, {"title", all[i].second}});
        }
        if (!links.empty()) page["langlinks"] = links;
        json reply = {{"batchcomplete", true}, {"query", {{"pages", json::array({page})}}}};
        if (from + 2 < all.size()) reply["continue"] = {{"llcontinue", std::to_string(from + 2)}, {"continue", "||"}};
        res.set_content(reply.dump(), "application/json");
        return;
      } else {
        CHECK(req.get_param_value("rvdir") == "newer");
        page["revisions"] = json::array({{{"timestamp", it->second.first_revision}}});
      }
      res.set_content(json{{"query", {{"pages", json::array({page})}}}}.dump(), "application/json");
    });
    mock_.Start();
  }

  std::string endpoint() const { return mock_.url("/w/api.php"); }
  int hits(const std::string &title) {
    std::lock_guard<std::mutex> lock(mu_);
    return hits_[title];
  }
  std::vector<std::string> agents() {
    std::lock_guard<std::mutex> lock(mu_);
    return agents_;
  }

 private:
  testing::MockServer mock_;
  std::map<std::string, Page> pages_;
  std::mutex mu_;
  std::map<std::string, int> hits_;
  std::vector<std::string> agents_;
};

EnrichOptions Fast() {
  EnrichOptions o;
  o.rate = 200;
  o.backoff_base_seconds = 0.05;
  o.timeout_seconds = 5;
  return o;
}

Article Bare(const std::string &title) {
  Article a;
  a.title = title;
  a.hash = ComputeHash(title, "");
  a.last_revision = "2024-01-01T00:00:00Z";
  return a;
}

std::string Serialized(const std::vector<Article> &articles) {
  std::string out;
  for (const auto &a : articles) out += SerializeArticle(a) + "\n";
  return out;
}

}  // namespace

TEST_CASE("langlinks example drops the self-language key") {
  FakeApi api;
  ActionApiClient client(api.endpoint(), Fast(), [] { return std::string(kAccess); });
  const auto links = client.FetchLangLinks("Les Hauts de Hurlevent", "fr");
  REQUIRE(links.has_value());
  CHECK(links->links ==
        std::map<std::string, std::string>{{"en", "Wuthering Heights"}, {"es", "Cumbres Borrascosas"}});
  CHECK(links->access_date == kAccess);

  const auto none = client.FetchLangLinks("Lonely", "fr");
  REQUIRE(none.has_value());
  CHECK(none->links.empty());
  CHECK(none->access_date == kAccess);

  CHECK_FALSE(client.FetchLangLinks("Nowhere", "fr").has_value());
  CHECK(client.last_access_date() == kAccess);
  CHECK(api.agents().front() == EnrichOptions{}.user_agent);
}

TEST_CASE("langlinks follow continuation") {
  FakeApi api;
  ActionApiClient client(api.endpoint(), Fast());
  const auto links = client.FetchLangLinks("Many", "en");
  REQUIRE(links.has_value());
  CHECK(links->links.size() == 5);
  CHECK(links->links.at("l4") == "T4");
  CHECK(api.hits("Many") == 3);
}

TEST_CASE("first revision examples") {
  FakeApi api;
  ActionApiClient client(api.endpoint(), Fast(), [] { return std::string(kAccess); });
  const auto rev = client.FetchFirstRevision("Les Hauts de Hurlevent", "fr");
  REQUIRE(rev.has_value());
  CHECK(rev->first_revision == "2023-09-04T08:19:40Z");
  CHECK(rev->access_date == kAccess);
  CHECK_FALSE(client.FetchFirstRevision("Nowhere", "fr").has_value());
  CHECK_THROWS_AS(client.FetchFirstRevision("Bad time", "fr"), ProtocolError);
  CHECK_THROWS_AS(client.FetchFirstRevision("Garbage", "fr"), ProtocolError);
}

TEST_CASE("redirect titles return the redirect page's own data") {
  FakeApi api;
  ActionApiClient client(api.endpoint(), Fast());
  const auto links = client.FetchLangLinks("Hurlevent", "fr");
  REQUIRE(links.has_value());
  CHECK(links->links.empty());
  CHECK(client.FetchFirstRevision("Hurlevent", "fr")->first_revision == "2019-11-11T11:11:11Z");
}

TEST_CASE("429 is retried after backoff") {
  FakeApi api;
  ActionApiClient client(api.endpoint(), Fast());
  const auto links = client.FetchLangLinks("Flaky", "en");
  CHECK(links.has_value());
  CHECK(client.retries() == 1);
  CHECK(client.requests() == 2);
  const auto &t = client.request_times();
  CHECK(t[1] - t[0] >= std::chrono::milliseconds(50));
}

TEST_CASE("retries are capped and then surfaced") {
  FakeApi api;
  EnrichOptions o = Fast();
  o.max_attempts = 3;
  ActionApiClient client(api.endpoint(), o);
  CHECK_THROWS_AS(client.FetchLangLinks("Down", "en"), Error);
  CHECK(api.hits("Down") == 3);
  CHECK(client.retries() == 2);
}

TEST_CASE("invalid options are rejected") {
  EnrichOptions o;
  o.rate = 0;
  CHECK_THROWS_AS(ActionApiClient("http://127.0.0.1:1/w/api.php", o), ConfigError);
  CHECK_THROWS_AS(ActionApiClient("not a url", EnrichOptions{}), ConfigError);
  CHECK(DefaultApiEndpoint("fr") == "https://fr.wikipedia.org/w/api.php");
}

TEST_CASE("enriching a chunk keeps order, stamps missing pages and is idempotent") {
  FakeApi api;
  ActionApiClient client(api.endpoint(), Fast(), [] { return std::string(kAccess); });
  std::vector<Article> articles = {Bare("Les Hauts de Hurlevent"), Bare("Nowhere"), Bare("Lonely")};
  const auto report = EnrichArticles(articles, "fr", client);
  CHECK(report.enriched == 3);
  CHECK(report.failed == 0);
  CHECK(articles[0].title == "Les Hauts de Hurlevent");
  CHECK(articles[0].cross_lingual_links->at("es") == "Cumbres Borrascosas");
  CHECK(articles[0].first_revision == std::optional<std::string>("2023-09-04T08:19:40Z"));
  CHECK(articles[0].first_revision_access_date == std::optional<std::string>(kAccess));
  CHECK_FALSE(articles[1].cross_lingual_links.has_value());
  CHECK_FALSE(articles[1].first_revision.has_value());
  CHECK(articles[1].cross_lingual_links_access_date == std::optional<std::string>(kAccess));
  REQUIRE(articles[2].cross_lingual_links.has_value());
  CHECK(articles[2].cross_lingual_links->empty());
  for (const auto &a : articles) CHECK_NOTHROW(ValidateArticle(a));

  const std::string once = Serialized(articles);
  const size_t calls = client.requests();
  const auto again = EnrichArticles(articles, "fr", client);
  CHECK(again.skipped == 3);
  CHECK(client.requests() == calls);
  CHECK(Serialized(articles) == once);
}

TEST_CASE("per-article failures leave fields absent and are resumed later") {
  FakeApi api;
  EnrichOptions o = Fast();
  o.max_attempts = 1;
  ActionApiClient client(api.endpoint(), o);
  std::vector<Article> articles = {Bare("Down"), Bare("Lonely")};
  const auto report = EnrichArticles(articles, "en", client);
  CHECK(report.failed == 1);
  CHECK(report.enriched == 1);
  CHECK_FALSE(articles[0].cross_lingual_links_access_date.has_value());
  CHECK_FALSE(articles[0].first_revision_access_date.has_value());
  CHECK(EnrichArticles(articles, "en", client).skipped == 1);
}

TEST_CASE("requests never exceed the configured rate in any one-second window") {
  FakeApi api;
  EnrichOptions o = Fast();
  o.rate = 10;
  ActionApiClient client(api.endpoint(), o);
  std::vector<Article> articles;
  for (int i = 0; i < 10; ++i) articles.push_back(Bare("P" + std::to_string(i)));
  const auto start = std::chrono::steady_clock::now();
  CHECK(EnrichArticles(articles, "fr", client).enriched == 10);
  const auto elapsed = std::chrono::steady_clock::now() - start;
  const auto &t = client.request_times();
  REQUIRE(t.size() == 20);
  CHECK(elapsed >= std::chrono::milliseconds(1900));
  for (size_t i = 0; i < t.size(); ++i) {
    size_t in_window = 0;
    for (size_t k = i; k < t.size() && t[k] - t[i] < std::chrono::seconds(1); ++k) ++in_window;
    CHECK(in_window <= 10);
  }
}
