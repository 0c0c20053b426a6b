#ifndef MWCORPUS_SCRAPER_H_
#define MWCORPUS_SCRAPER_H_

#include <chrono>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mwcorpus/schema.h"
#include "mwcorpus/timeutil.h"

namespace mwcorpus {

struct ScrapePolicy {
  double timeout_seconds = 10.0;
  int64_t max_chars = 1'000'000;
  int min_tokens = 100;
  int max_concurrent = 8;
  double per_host_delay_seconds = 1.0;
  int max_redirects = 5;
  int retries = 0;
  std::string user_agent = "mwcorpus-scraper/1.0 (citation source archiving)";

  bool operator==(const ScrapePolicy &) const = default;
};

// Throws ConfigError on non-positive limits.
void ValidateScrapePolicy(const ScrapePolicy &policy);
ScrapePolicy ScrapePolicyFromJson(std::string_view json_text);
std::string ScrapePolicyToJson(const ScrapePolicy &policy);

enum class ScrapeStatus { kSuccess, kDownloadError, kExtractError };

struct ScrapeOutcome {
  ScrapeStatus status = ScrapeStatus::kDownloadError;
  std::optional<std::string> content_type;
  std::optional<int64_t> num_chars;
  std::optional<std::string> text;
  std::optional<std::string> error_message;
  std::string download_date;
};

struct DownloadResult {
  std::optional<std::string> error;  // set on download failure
  int status = 0;
  std::string reason;
  std::string content_type;
  std::string content;  // decoded to UTF-8
  int64_t num_chars = 0;
};

// Fetches url with redirects, the per-request timeout, the size cap and
// charset decoding applied. Never throws.
DownloadResult Download(const std::string &url, const ScrapePolicy &policy);

// Decodes bytes to UTF-8 using the charset named in content_type or, for
// HTML, a <meta> charset declaration; falls back to UTF-8 with U+FFFD.
std::string DecodeBody(std::string_view bytes, std::string_view content_type);

// Spaces request start times to the same host at least delay apart.
class HostScheduler {
 public:
  explicit HostScheduler(std::chrono::duration<double> delay) : delay_(delay) {}
  void Acquire(const std::string &host);

 private:
  std::chrono::duration<double> delay_;
  std::mutex mu_;
  std::map<std::string, std::chrono::steady_clock::time_point> next_;
};

// "host:port" key of an http(s) URL, or empty for anything else.
std::string UrlHost(std::string_view url);

ScrapeOutcome ScrapeUrl(const std::string &url, const ScrapePolicy &policy,
                        HostScheduler *scheduler = nullptr, const Clock &clock = UtcNowIso);

// Writes the outcome into the citation's source fields, clearing stale ones.
void ApplyOutcome(Citation &citation, const ScrapeOutcome &outcome);

// Scrapes one citation; citations without a url are left untouched.
void ScrapeCitation(Citation &citation, const ScrapePolicy &policy,
                    HostScheduler *scheduler = nullptr, const Clock &clock = UtcNowIso);

// Scrapes every citation with a url and no download date, using up to
// policy.max_concurrent workers. Returns the number scraped.
size_t ScrapeCitations(const std::vector<Citation *> &citations, const ScrapePolicy &policy,
                       const Clock &clock = UtcNowIso);

// Scrapes all web citations of the articles (headings, sentences) and then
// rebuilds excerpts. Returns the number scraped.
size_t ScrapeArticles(std::vector<Article> &articles, const ScrapePolicy &policy,
                      const Clock &clock = UtcNowIso);

// Failure classes observed when re-scraping citation sources.
enum class ScrapeCategory {
  kSuccess,
  kMaxRetries,
  kReadTimeout,
  kConnectTimeout,
  kTooLarge,
  kOtherDownloadError,
  kHttp403,
  kHttp404,
  kHttpOther,
  kSkeleton,
  kTooFewWords,
  kUnsupported,
  kOtherExtractError,
  kNotScraped,
};

ScrapeCategory Classify(const Citation &citation);
std::string_view CategoryName(ScrapeCategory category);

}  // namespace mwcorpus

#endif  // MWCORPUS_SCRAPER_H_
