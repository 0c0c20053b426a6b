#ifndef MWCORPUS_ENRICH_H_
#define MWCORPUS_ENRICH_H_

#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mwcorpus/schema.h"
#include "mwcorpus/timeutil.h"

namespace mwcorpus {

struct EnrichOptions {
  double rate = 1.0;  // requests per second
  int max_attempts = 5;
  double backoff_base_seconds = 1.0;
  double backoff_factor = 2.0;
  double backoff_cap_seconds = 60.0;
  double timeout_seconds = 30.0;
  std::string user_agent = "mwcorpus-enrich/1.0 (corpus metadata)";
};

// "https://<language>.wikipedia.org/w/api.php"
std::string DefaultApiEndpoint(const std::string &language);

struct LangLinkSet {
  std::map<std::string, std::string> links;
  std::string access_date;
};

struct RevisionInfo {
  std::string first_revision;
  std::string access_date;
};

// Serial, rate-limited Action API client. Redirects are never followed, so
// a redirect title yields the redirect page's own data.
class ActionApiClient {
 public:
  ActionApiClient(std::string endpoint, EnrichOptions options, Clock clock = UtcNowIso);
  ~ActionApiClient();

  // Absent when the page does not exist. The self-language key is dropped.
  // Throws Error after exhausting retries and ProtocolError on bad replies.
  std::optional<LangLinkSet> FetchLangLinks(const std::string &title, const std::string &language);
  std::optional<RevisionInfo> FetchFirstRevision(const std::string &title, const std::string &language);

  // When a lookup returned nothing, the access date of that response.
  const std::string &last_access_date() const { return last_access_date_; }

  size_t requests() const { return request_times_.size(); }
  size_t retries() const { return retries_; }
  const std::vector<std::chrono::steady_clock::time_point> &request_times() const { return request_times_; }

 private:
  std::string Query(const std::vector<std::pair<std::string, std::string>> &params);
  void Pace();

  std::string endpoint_;
  EnrichOptions options_;
  Clock clock_;
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::optional<std::chrono::steady_clock::time_point> last_request_;
  std::vector<std::chrono::steady_clock::time_point> request_times_;
  size_t retries_ = 0;
  std::string last_access_date_;
};

struct EnrichReport {
  size_t enriched = 0;
  size_t skipped = 0;
  size_t failed = 0;
};

// Fills cross-lingual links and first revision for articles that lack the
// corresponding access date. Missing pages get the access date stamped with
// the value left absent, so reruns make no requests.
EnrichReport EnrichArticles(std::vector<Article> &articles, const std::string &language, ActionApiClient &client);

}  // namespace mwcorpus

#endif  // MWCORPUS_ENRICH_H_
