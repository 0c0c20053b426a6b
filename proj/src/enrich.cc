#include "mwcorpus/enrich.h"

#include <cmath>
#include <thread>

#include <spdlog/spdlog.h>

#include "httplib.h"
#include "json.hpp"
#include "mwcorpus/errors.h"

namespace mwcorpus {

namespace {

using SteadyClock = std::chrono::steady_clock;
using json = nlohmann::json;

SteadyClock::duration Seconds(double s) {
  return std::chrono::duration_cast<SteadyClock::duration>(std::chrono::duration<double>(s));
}

// The single page object of a formatversion=2 query reply.
const json &OnlyPage(const json &reply) {
  if (reply.contains("error")) {
    const auto &e = reply["error"];
    throw ProtocolError("API error " + e.value("code", std::string("?")) + ": " + e.value("info", std::string()));
  }
  if (!reply.contains("query") || !reply["query"].is_object() || !reply["query"].contains("pages") ||
      !reply["query"]["pages"].is_array() || reply["query"]["pages"].size() != 1 ||
      !reply["query"]["pages"][0].is_object()) {
    throw ProtocolError("API reply lacks query.pages[0]");
  }
  return reply["query"]["pages"][0];
}

bool PageMissing(const json &page) {
  return page.value("missing", false) || page.value("invalid", false);
}

json ParseReply(const std::string &body) {
  try {
    return json::parse(body);
  } catch (const json::exception &e) {
    throw ProtocolError(std::string("API reply is not JSON: ") + e.what());
  }
}

}  // namespace

struct ActionApiClient::Impl {
  std::unique_ptr<httplib::Client> client;
  std::string path;
};

std::string DefaultApiEndpoint(const std::string &language) {
  return "https://" + language + ".wikipedia.org/w/api.php";
}

ActionApiClient::ActionApiClient(std::string endpoint, EnrichOptions options, Clock clock)
    : endpoint_(std::move(endpoint)), options_(std::move(options)), clock_(std::move(clock)),
      impl_(std::make_unique<Impl>()) {
  if (!(options_.rate > 0)) throw ConfigError("enrich rate must be positive");
  if (options_.max_attempts < 1) throw ConfigError("enrich max_attempts must be at least 1");
  const size_t scheme = endpoint_.find("://");
  if (scheme == std::string::npos) throw ConfigError("API endpoint must be an absolute URL: " + endpoint_);
  const size_t path_start = endpoint_.find('/', scheme + 3);
  const std::string origin = path_start == std::string::npos ? endpoint_ : endpoint_.substr(0, path_start);
  impl_->path = path_start == std::string::npos ? "/" : endpoint_.substr(path_start);
  impl_->client = std::make_unique<httplib::Client>(origin);
  const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::duration<double>(options_.timeout_seconds));
  impl_->client->set_connection_timeout(timeout);
  impl_->client->set_read_timeout(timeout);
  impl_->client->set_follow_location(false);
}

ActionApiClient::~ActionApiClient() = default;

void ActionApiClient::Pace() {
  // A small margin keeps measured spacing at or above 1/rate despite timer slack.
  const auto interval = Seconds(1.0 / options_.rate * 1.01);
  if (last_request_) std::this_thread::sleep_until(*last_request_ + interval);
  last_request_ = SteadyClock::now();
  request_times_.push_back(*last_request_);
}

std::string ActionApiClient::Query(const std::vector<std::pair<std::string, std::string>> &params) {
  httplib::Params query = {{"action", "query"}, {"format", "json"}, {"formatversion", "2"}};
  for (const auto &[k, v] : params) query.emplace(k, v);
  const httplib::Headers headers = {{"User-Agent", options_.user_agent}};
  std::string failure;
  for (int attempt = 0; attempt < options_.max_attempts; ++attempt) {
    if (attempt > 0) {
      ++retries_;
      const double wait = std::min(options_.backoff_cap_seconds,
                                   options_.backoff_base_seconds * std::pow(options_.backoff_factor, attempt - 1));
      spdlog::debug("retrying API request in {:.2f}s after {}", wait, failure);
      std::this_thread::sleep_for(Seconds(wait));
    }
    Pace();
    auto res = impl_->client->Get(impl_->path, query, headers);
    if (!res) {
      failure = httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      failure = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) throw ProtocolError("API returned HTTP " + std::to_string(res->status));
    last_access_date_ = clock_();
    const json reply = ParseReply(res->body);
    if (reply.contains("error") && reply["error"].is_object()) {
      const std::string code = reply["error"].value("code", std::string());
      if (code == "maxlag" || code == "ratelimited") {
        failure = "API error " + code;
        continue;
      }
    }
    return res->body;
  }
  throw Error("API request failed after " + std::to_string(options_.max_attempts) + " attempts: " + failure);
}

std::optional<LangLinkSet> ActionApiClient::FetchLangLinks(const std::string &title, const std::string &language) {
  LangLinkSet out;
  std::string cont;
  for (;;) {
    std::vector<std::pair<std::string, std::string>> params = {
        {"prop", "langlinks"}, {"titles", title}, {"lllimit", "max"}};
    if (!cont.empty()) {
      params.emplace_back("llcontinue", cont);
      params.emplace_back("continue", "||");
    }
    const json reply = ParseReply(Query(params));
    const json &page = OnlyPage(reply);
    if (PageMissing(page)) return std::nullopt;
    if (page.contains("langlinks")) {
      const auto &links = page["langlinks"];
      if (!links.is_array()) throw ProtocolError("langlinks is not an array");
      for (const auto &link : links) {
        if (!link.is_object() || !link.contains("lang") || !link["lang"].is_string() || !link.contains("title") ||
            !link["title"].is_string()) {
          throw ProtocolError("malformed langlink entry");
        }
        const std::string lang = link["lang"].get<std::string>();
        if (lang == language) continue;
        out.links.emplace(lang, link["title"].get<std::string>());
      }
    }
    out.access_date = last_access_date_;
    if (reply.contains("continue") && reply["continue"].contains("llcontinue")) {
      cont = reply["continue"]["llcontinue"].get<std::string>();
      continue;
    }
    return out;
  }
}

std::optional<RevisionInfo> ActionApiClient::FetchFirstRevision(const std::string &title,
                                                                const std::string &language) {
  (void)language;
  const json reply = ParseReply(Query(
      {{"prop", "revisions"}, {"titles", title}, {"rvlimit", "1"}, {"rvdir", "newer"}, {"rvprop", "timestamp"}}));
  const json &page = OnlyPage(reply);
  if (PageMissing(page)) return std::nullopt;
  if (!page.contains("revisions") || !page["revisions"].is_array() || page["revisions"].empty() ||
      !page["revisions"][0].is_object() || !page["revisions"][0].contains("timestamp") ||
      !page["revisions"][0]["timestamp"].is_string()) {
    throw ProtocolError("revision reply lacks a timestamp");
  }
  const std::string timestamp = page["revisions"][0]["timestamp"].get<std::string>();
  if (!IsIsoUtc(timestamp)) throw ProtocolError("malformed revision timestamp: " + timestamp);
  return RevisionInfo{timestamp, last_access_date_};
}

EnrichReport EnrichArticles(std::vector<Article> &articles, const std::string &language, ActionApiClient &client) {
  EnrichReport report;
  for (auto &article : articles) {
    const bool need_links = !article.cross_lingual_links_access_date;
    const bool need_revision = !article.first_revision_access_date;
    if (!need_links && !need_revision) {
      ++report.skipped;
      continue;
    }
    bool ok = true;
    if (need_links) {
      try {
        if (auto links = client.FetchLangLinks(article.title, language)) {
          article.cross_lingual_links = std::move(links->links);
          article.cross_lingual_links_access_date = links->access_date;
        } else {
          article.cross_lingual_links.reset();
          article.cross_lingual_links_access_date = client.last_access_date();
        }
      } catch (const Error &e) {
        spdlog::warn("langlinks for '{}' failed: {}", article.title, e.what());
        ok = false;
      }
    }
    if (need_revision) {
      try {
        if (auto revision = client.FetchFirstRevision(article.title, language)) {
          article.first_revision = revision->first_revision;
          article.first_revision_access_date = revision->access_date;
        } else {
          article.first_revision.reset();
          article.first_revision_access_date = client.last_access_date();
        }
      } catch (const Error &e) {
        spdlog::warn("first revision for '{}' failed: {}", article.title, e.what());
        ok = false;
      }
    }
    if (ok) {
      ++report.enriched;
    } else {
      ++report.failed;
    }
  }
  return report;
}

}  // namespace mwcorpus
