#include "mwcorpus/scraper.h"

#include <iconv.h>

#include <atomic>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "mwcorpus/errors.h"
#include "mwcorpus/excerpts.h"
#include "mwcorpus/html_text.h"
#include "mwcorpus/utf8.h"

namespace mwcorpus {

namespace {

using SteadyClock = std::chrono::steady_clock;

struct ParsedUrl {
  std::string scheme;  // "http" or "https"
  std::string host;
  int port = 0;
  std::string path;  // with query, without fragment
};

std::string Lower(std::string_view s) {
  std::string out(s);
  for (auto &c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::optional<ParsedUrl> ParseUrl(std::string_view url) {
  const size_t sep = url.find("://");
  if (sep == std::string_view::npos) return std::nullopt;
  ParsedUrl out;
  out.scheme = Lower(url.substr(0, sep));
  if (out.scheme != "http" && out.scheme != "https") return std::nullopt;
  std::string_view rest = url.substr(sep + 3);
  const size_t host_end = rest.find_first_of("/?#");
  std::string_view authority = rest.substr(0, host_end);
  rest = host_end == std::string_view::npos ? std::string_view() : rest.substr(host_end);
  const size_t at = authority.rfind('@');
  if (at != std::string_view::npos) authority = authority.substr(at + 1);
  out.port = out.scheme == "https" ? 443 : 80;
  const size_t bracket = authority.rfind(']');
  const size_t colon = authority.rfind(':');
  if (colon != std::string_view::npos && (bracket == std::string_view::npos || colon > bracket)) {
    const std::string port(authority.substr(colon + 1));
    authority = authority.substr(0, colon);
    if (!port.empty()) {
      if (port.find_first_not_of("0123456789") != std::string::npos || port.size() > 5) return std::nullopt;
      out.port = std::stoi(port);
    }
  }
  if (authority.empty()) return std::nullopt;
  out.host = Lower(authority);
  const size_t hash = rest.find('#');
  if (hash != std::string_view::npos) rest = rest.substr(0, hash);
  out.path = rest.empty() ? "/" : std::string(rest);
  if (out.path.front() == '?') out.path = "/" + out.path;
  return out;
}

std::string Resolve(const ParsedUrl &base, const std::string &location) {
  if (location.find("://") != std::string::npos) return location;
  const std::string origin = base.scheme + "://" + base.host + ":" + std::to_string(base.port);
  if (location.rfind("//", 0) == 0) return base.scheme + ":" + location;
  if (!location.empty() && location.front() == '/') return origin + location;
  std::string dir = base.path.substr(0, base.path.find('?'));
  dir = dir.substr(0, dir.rfind('/') + 1);
  return origin + dir + location;
}

std::string FormatSeconds(double s) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", s);
  return buf;
}

std::string MaxRetries(const ParsedUrl &u, std::string_view cause) {
  return std::string("MaxRetryError: ") + (u.scheme == "https" ? "HTTPSConnectionPool" : "HTTPConnectionPool") +
         "(host='" + u.host + "', port=" + std::to_string(u.port) + "): Max retries exceeded with url: " +
         u.path + " (Caused by " + std::string(cause) + ")";
}

std::string TooLarge(int64_t bytes) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "Download is too large (%.1f MB)", static_cast<double>(bytes) / 1e6);
  return buf;
}

std::string CharsetOf(std::string_view content_type) {
  const std::string lower = Lower(content_type);
  const size_t at = lower.find("charset=");
  if (at == std::string::npos) return "";
  std::string value = lower.substr(at + 8);
  const size_t end = value.find_first_of("; ");
  if (end != std::string::npos) value.resize(end);
  value.erase(std::remove(value.begin(), value.end(), '"'), value.end());
  value.erase(std::remove(value.begin(), value.end(), '\''), value.end());
  return value;
}

std::string MetaCharset(std::string_view bytes) {
  const std::string head = Lower(bytes.substr(0, 2048));
  size_t at = head.find("charset=");
  if (at == std::string::npos) return "";
  at += 8;
  while (at < head.size() && (head[at] == '"' || head[at] == '\'' || head[at] == ' ')) ++at;
  size_t end = at;
  while (end < head.size() && (std::isalnum(static_cast<unsigned char>(head[end])) || head[end] == '-' || head[end] == '_')) ++end;
  return head.substr(at, end - at);
}

std::optional<std::string> Iconv(std::string_view bytes, const std::string &charset) {
  iconv_t cd = iconv_open("UTF-8", charset.c_str());
  if (cd == reinterpret_cast<iconv_t>(-1)) return std::nullopt;
  std::string out;
  std::string in(bytes);
  char *inbuf = in.data();
  size_t inleft = in.size();
  char buffer[8192];
  while (inleft > 0) {
    char *outbuf = buffer;
    size_t outleft = sizeof(buffer);
    const size_t rc = iconv(cd, &inbuf, &inleft, &outbuf, &outleft);
    out.append(buffer, static_cast<size_t>(outbuf - buffer));
    if (rc == static_cast<size_t>(-1)) {
      if (errno == E2BIG) continue;
      // Invalid or truncated input: substitute and skip one byte.
      utf8::Append(out, utf8::kReplacement);
      ++inbuf;
      --inleft;
    }
  }
  iconv_close(cd);
  return out;
}

}  // namespace

void ValidateScrapePolicy(const ScrapePolicy &p) {
  if (!(p.timeout_seconds > 0)) throw ConfigError("timeout_seconds must be positive");
  if (p.max_chars <= 0) throw ConfigError("max_chars must be positive");
  if (p.min_tokens <= 0) throw ConfigError("min_tokens must be positive");
  if (p.max_concurrent <= 0) throw ConfigError("max_concurrent must be positive");
  if (p.per_host_delay_seconds < 0) throw ConfigError("per_host_delay_seconds must not be negative");
  if (p.max_redirects < 0) throw ConfigError("max_redirects must not be negative");
  if (p.retries < 0) throw ConfigError("retries must not be negative");
}

ScrapePolicy ScrapePolicyFromJson(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception &e) {
    throw ConfigError(std::string("scrape policy: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("scrape policy must be a JSON object");
  ScrapePolicy p;
  try {
    for (const auto &[key, value] : j.items()) {
      if (key == "timeout_seconds") p.timeout_seconds = value.get<double>();
      else if (key == "max_chars") p.max_chars = value.get<int64_t>();
      else if (key == "min_tokens") p.min_tokens = value.get<int>();
      else if (key == "max_concurrent") p.max_concurrent = value.get<int>();
      else if (key == "per_host_delay_seconds") p.per_host_delay_seconds = value.get<double>();
      else if (key == "max_redirects") p.max_redirects = value.get<int>();
      else if (key == "retries") p.retries = value.get<int>();
      else if (key == "user_agent") p.user_agent = value.get<std::string>();
      else throw ConfigError("scrape policy: unknown key " + key);
    }
  } catch (const nlohmann::json::exception &e) {
    throw ConfigError(std::string("scrape policy: ") + e.what());
  }
  ValidateScrapePolicy(p);
  return p;
}

std::string ScrapePolicyToJson(const ScrapePolicy &p) {
  nlohmann::ordered_json j;
  j["timeout_seconds"] = p.timeout_seconds;
  j["max_chars"] = p.max_chars;
  j["min_tokens"] = p.min_tokens;
  j["max_concurrent"] = p.max_concurrent;
  j["per_host_delay_seconds"] = p.per_host_delay_seconds;
  j["max_redirects"] = p.max_redirects;
  j["retries"] = p.retries;
  j["user_agent"] = p.user_agent;
  return j.dump(2);
}

std::string DecodeBody(std::string_view bytes, std::string_view content_type) {
  std::string charset = CharsetOf(content_type);
  if (charset.empty() && Lower(content_type).find("html") != std::string::npos) charset = MetaCharset(bytes);
  if (charset.empty() || charset == "utf-8" || charset == "utf8") return utf8::Sanitize(bytes);
  if (auto decoded = Iconv(bytes, charset)) return utf8::Sanitize(*decoded);
  return utf8::Sanitize(bytes);
}

std::string UrlHost(std::string_view url) {
  const auto parsed = ParseUrl(url);
  if (!parsed) return "";
  return parsed->host + ":" + std::to_string(parsed->port);
}

DownloadResult Download(const std::string &url, const ScrapePolicy &policy) {
  DownloadResult result;
  const auto deadline = SteadyClock::now() + std::chrono::duration_cast<SteadyClock::duration>(
                                                 std::chrono::duration<double>(policy.timeout_seconds));
  const int64_t byte_cap = policy.max_chars * 4;
  std::string current = url;
  for (int hop = 0;; ++hop) {
    const auto parsed = ParseUrl(current);
    if (!parsed) {
      result.error = "InvalidURL: Failed to parse: " + current;
      return result;
    }
    const auto remaining = std::chrono::duration<double>(deadline - SteadyClock::now()).count();
    if (remaining <= 0) {
      result.error = "ReadTimeoutError: Read timed out. (read timeout=" + FormatSeconds(policy.timeout_seconds) + ")";
      return result;
    }
    const auto timeout = std::chrono::duration<double>(remaining);
    const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(timeout);
    httplib::Client client(parsed->scheme + "://" + parsed->host + ":" + std::to_string(parsed->port));
    client.set_follow_location(false);
    client.set_connection_timeout(micros);
    client.set_read_timeout(micros);
    client.set_write_timeout(micros);
    client.set_keep_alive(false);

    std::string body;
    bool too_large = false;
    bool past_deadline = false;
    int64_t declared = -1;
    const httplib::Headers headers = {{"User-Agent", policy.user_agent}, {"Accept", "*/*"}};
    auto res = client.Get(
        parsed->path, headers,
        [&](const httplib::Response &response) {
          if (response.has_header("Content-Length")) {
            try {
              declared = std::stoll(response.get_header_value("Content-Length"));
            } catch (...) {
              declared = -1;
            }
            if (response.status < 300 && declared > byte_cap) {
              too_large = true;
              return false;
            }
          }
          return true;
        },
        [&](const char *data, size_t length) {
          body.append(data, length);
          if (static_cast<int64_t>(body.size()) > byte_cap) {
            too_large = true;
            return false;
          }
          if (SteadyClock::now() > deadline) {
            past_deadline = true;
            return false;
          }
          return true;
        });
    if (too_large) {
      result.error = TooLarge(declared > 0 ? declared : static_cast<int64_t>(body.size()));
      return result;
    }
    if (!res) {
      const httplib::Error err = res.error();
      const std::string timeout_text = FormatSeconds(policy.timeout_seconds);
      if (past_deadline || err == httplib::Error::Read) {
        result.error = "ReadTimeoutError: Read timed out. (read timeout=" + timeout_text + ")";
      } else if (err == httplib::Error::ConnectionTimeout) {
        result.error = "ConnectTimeoutError: Connection to " + parsed->host + " timed out. (connect timeout=" +
                       timeout_text + ")";
      } else if (err == httplib::Error::Connection) {
        result.error = MaxRetries(*parsed, "NewConnectionError('Failed to establish a new connection')");
      } else if (err == httplib::Error::SSLConnection || err == httplib::Error::SSLServerVerification ||
                 err == httplib::Error::SSLLoadingCerts) {
        result.error = MaxRetries(*parsed, "SSLError('" + httplib::to_string(err) + "')");
      } else {
        result.error = "ConnectionError: " + httplib::to_string(err);
      }
      return result;
    }
    const httplib::Response &response = res.value();
    if (response.status >= 300 && response.status < 400 && response.has_header("Location")) {
      if (hop >= policy.max_redirects) {
        result.error = "TooManyRedirects: Exceeded " + std::to_string(policy.max_redirects) + " redirects.";
        return result;
      }
      current = Resolve(*parsed, response.get_header_value("Location"));
      continue;
    }
    result.status = response.status;
    result.reason = response.reason.empty() ? httplib::status_message(response.status) : response.reason;
    result.content_type = response.get_header_value("Content-Type");
    result.content = DecodeBody(body, result.content_type);
    result.num_chars = static_cast<int64_t>(utf8::Length(result.content));
    if (result.num_chars > policy.max_chars) {
      result.error = TooLarge(static_cast<int64_t>(body.size()));
      result.content.clear();
    }
    return result;
  }
}

void HostScheduler::Acquire(const std::string &host) {
  SteadyClock::time_point slot;
  {
    std::lock_guard<std::mutex> lock(mu_);
    const auto now = SteadyClock::now();
    auto it = next_.find(host);
    slot = it == next_.end() ? now : std::max(now, it->second);
    next_[host] = slot + std::chrono::duration_cast<SteadyClock::duration>(delay_);
  }
  std::this_thread::sleep_until(slot);
}

ScrapeOutcome ScrapeUrl(const std::string &url, const ScrapePolicy &policy, HostScheduler *scheduler,
                        const Clock &clock) {
  ScrapeOutcome outcome;
  DownloadResult dl;
  for (int attempt = 0; attempt <= policy.retries; ++attempt) {
    if (scheduler) scheduler->Acquire(UrlHost(url));
    dl = Download(url, policy);
    if (!dl.error) break;
  }
  outcome.download_date = clock();
  if (dl.error) {
    outcome.status = ScrapeStatus::kDownloadError;
    outcome.error_message = dl.error;
    return outcome;
  }
  outcome.content_type = dl.content_type;
  outcome.num_chars = dl.num_chars;
  if (dl.status >= 400) {
    outcome.status = ScrapeStatus::kExtractError;
    outcome.error_message = "HTTP " + std::to_string(dl.status) + ": " + dl.reason;
    return outcome;
  }
  ExtractResult extracted = ExtractText(dl.content, dl.content_type);
  if (extracted.error) {
    outcome.status = ScrapeStatus::kExtractError;
    outcome.error_message = extracted.error;
    return outcome;
  }
  if (auto short_text = TokenFilter(*extracted.text, policy.min_tokens)) {
    outcome.status = ScrapeStatus::kExtractError;
    outcome.error_message = short_text;
    return outcome;
  }
  outcome.status = ScrapeStatus::kSuccess;
  outcome.text = std::move(extracted.text);
  return outcome;
}

void ApplyOutcome(Citation &c, const ScrapeOutcome &outcome) {
  c.source_text.reset();
  c.source_download_error.reset();
  c.source_extract_error.reset();
  c.source_quality_label.reset();
  c.source_quality_raw_score.reset();
  c.source_code_num_bytes.reset();
  c.source_code_content_type = outcome.content_type;
  c.source_code_num_chars = outcome.num_chars;
  c.source_download_date = outcome.download_date;
  switch (outcome.status) {
    case ScrapeStatus::kSuccess:
      c.source_text = outcome.text;
      break;
    case ScrapeStatus::kDownloadError:
      c.source_download_error = outcome.error_message;
      break;
    case ScrapeStatus::kExtractError:
      c.source_extract_error = outcome.error_message;
      break;
  }
}

void ScrapeCitation(Citation &citation, const ScrapePolicy &policy, HostScheduler *scheduler,
                    const Clock &clock) {
  if (!citation.url) return;
  ApplyOutcome(citation, ScrapeUrl(*citation.url, policy, scheduler, clock));
}

size_t ScrapeCitations(const std::vector<Citation *> &citations, const ScrapePolicy &policy,
                       const Clock &clock) {
  std::vector<Citation *> todo;
  for (Citation *c : citations) {
    if (c->url && !c->source_download_date) todo.push_back(c);
  }
  if (todo.empty()) return 0;
  HostScheduler scheduler(std::chrono::duration<double>(policy.per_host_delay_seconds));
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next++; i < todo.size(); i = next++) {
      ScrapeCitation(*todo[i], policy, &scheduler, clock);
    }
  };
  const size_t n = std::min<size_t>(static_cast<size_t>(policy.max_concurrent), todo.size());
  std::vector<std::thread> threads;
  for (size_t k = 1; k < n; ++k) threads.emplace_back(worker);
  worker();
  for (auto &t : threads) t.join();
  return todo.size();
}

size_t ScrapeArticles(std::vector<Article> &articles, const ScrapePolicy &policy, const Clock &clock) {
  std::vector<Citation *> citations;
  for (auto &article : articles) {
    ForEachElementCitation(article.elements, [&](Citation &c) { citations.push_back(&c); });
  }
  const size_t scraped = ScrapeCitations(citations, policy, clock);
  if (scraped > 0) {
    for (auto &article : articles) RefreshDerived(article);
  }
  return scraped;
}

ScrapeCategory Classify(const Citation &c) {
  if (c.source_text) return ScrapeCategory::kSuccess;
  if (const auto &e = c.source_download_error) {
    if (e->find("Max retries exceeded") != std::string::npos) return ScrapeCategory::kMaxRetries;
    if (e->rfind("ReadTimeoutError", 0) == 0) return ScrapeCategory::kReadTimeout;
    if (e->rfind("ConnectTimeoutError", 0) == 0) return ScrapeCategory::kConnectTimeout;
    if (e->rfind("Download is too large", 0) == 0) return ScrapeCategory::kTooLarge;
    return ScrapeCategory::kOtherDownloadError;
  }
  if (const auto &e = c.source_extract_error) {
    if (e->rfind("HTTP 403", 0) == 0) return ScrapeCategory::kHttp403;
    if (e->rfind("HTTP 404", 0) == 0) return ScrapeCategory::kHttp404;
    if (e->rfind("HTTP ", 0) == 0) return ScrapeCategory::kHttpOther;
    if (e->find("HTML skeleton only") != std::string::npos) return ScrapeCategory::kSkeleton;
    if (e->rfind("Text is too short", 0) == 0) return ScrapeCategory::kTooFewWords;
    if (e->find("unsupported content type") != std::string::npos) return ScrapeCategory::kUnsupported;
    return ScrapeCategory::kOtherExtractError;
  }
  return ScrapeCategory::kNotScraped;
}

std::string_view CategoryName(ScrapeCategory category) {
  switch (category) {
    case ScrapeCategory::kSuccess: return "success";
    case ScrapeCategory::kMaxRetries: return "max retries exceeded";
    case ScrapeCategory::kReadTimeout: return "read timeout";
    case ScrapeCategory::kConnectTimeout: return "connect timeout";
    case ScrapeCategory::kTooLarge: return "too large";
    case ScrapeCategory::kOtherDownloadError: return "other download error";
    case ScrapeCategory::kHttp403: return "HTTP 403 (forbidden)";
    case ScrapeCategory::kHttp404: return "HTTP 404 (not found)";
    case ScrapeCategory::kHttpOther: return "other HTTP status";
    case ScrapeCategory::kSkeleton: return "HTML skeleton only";
    case ScrapeCategory::kTooFewWords: return "HTML body w/ few words";
    case ScrapeCategory::kUnsupported: return "unsupported content type";
    case ScrapeCategory::kOtherExtractError: return "other extraction error";
    case ScrapeCategory::kNotScraped: return "not scraped";
  }
  return "unknown";
}

}  // namespace mwcorpus
