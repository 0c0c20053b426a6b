#include "mwcorpus/quality.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_set>

#include <boost/multiprecision/cpp_int.hpp>
#include <spdlog/spdlog.h>

#include "httplib.h"
#include "json.hpp"
#include "mwcorpus/errors.h"
#include "mwcorpus/excerpts.h"
#include "mwcorpus/utf8.h"

namespace mwcorpus {

namespace {

using Rational = boost::multiprecision::cpp_rational;

struct Frac {
  int64_t num = 0;
  int64_t den = 1;
  double Value() const { return static_cast<double>(num) / static_cast<double>(den); }
  Rational Exact() const { return Rational(num, den); }
};

// Counts over the sorted candidate grid with sentinel positions at both ends.
class FitTables {
 public:
  FitTables(const std::vector<double> &scores, const std::vector<int> &labels, const std::vector<double> &grid)
      : m_(grid.size()) {
    le_.assign(m_ + 2, 0);
    for (int k = 0; k < 5; ++k) le_class_[k].assign(m_ + 2, 0);
    for (size_t i = 0; i < scores.size(); ++i) {
      ++true_count_[labels[i] - 1];
      // Position p counts samples with score <= grid[p - 1].
      const size_t first = static_cast<size_t>(std::lower_bound(grid.begin(), grid.end(), scores[i]) - grid.begin());
      ++le_[first + 1];
      ++le_class_[labels[i] - 1][first + 1];
    }
    for (size_t p = 1; p <= m_ + 1; ++p) {
      le_[p] += le_[p - 1];
      for (int k = 0; k < 5; ++k) le_class_[k][p] += le_class_[k][p - 1];
    }
  }

  size_t m() const { return m_; }
  bool Present(int k) const { return true_count_[k] > 0; }

  // F1 of class k (0-based) predicted for scores in (pos a, pos b].
  Frac Term(int k, size_t a, size_t b) const {
    if (true_count_[k] == 0) return {};
    const int64_t tp = le_class_[k][b] - le_class_[k][a];
    const int64_t pred = le_[b] - le_[a];
    return {2 * tp, pred + true_count_[k]};
  }

 private:
  size_t m_;
  std::vector<int64_t> le_;
  std::array<std::vector<int64_t>, 5> le_class_;
  std::array<int64_t, 5> true_count_ = {0, 0, 0, 0, 0};
};

const std::vector<std::vector<std::string>> &Lexicon() {
  static const std::vector<std::vector<std::string>> kPhrases = [] {
    const char *phrases[] = {
        "404", "403", "not found", "page not found", "file not found", "access denied", "forbidden",
        "captcha", "recaptcha", "are you a robot", "verify you are human", "unusual traffic",
        "subscribe to read", "subscribe to continue", "subscribers only", "subscription required",
        "sign in to continue", "log in to continue", "login required", "paywall",
        "enable javascript", "javascript is disabled", "javascript is required", "accept cookies",
        "cookie policy", "this page doesn't exist", "page does not exist", "no longer available",
        "has been removed", "internal server error", "service unavailable", "bad gateway",
        "page introuvable", "accès refusé", "seite nicht gefunden", "zugriff verweigert",
        "página no encontrada", "acceso denegado", "страница не найдена", "доступ запрещён"};
    std::vector<std::vector<std::string>> out;
    for (const char *p : phrases) {
      std::vector<std::string> tokens;
      std::string_view rest(p);
      while (!rest.empty()) {
        const size_t sp = rest.find(' ');
        tokens.emplace_back(rest.substr(0, sp));
        rest = sp == std::string_view::npos ? std::string_view() : rest.substr(sp + 1);
      }
      out.push_back(std::move(tokens));
    }
    return out;
  }();
  return kPhrases;
}

bool IsWordChar(char32_t cp) { return utf8::IsLetter(cp) || utf8::IsDigit(cp) || cp == '\'' || cp == U'’'; }

// Case-folded tokens with leading and trailing punctuation removed.
std::vector<std::string> NormalizedTokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::u32string current;
  auto flush = [&] {
    size_t a = 0, b = current.size();
    while (a < b && !IsWordChar(current[a])) ++a;
    while (b > a && !IsWordChar(current[b - 1])) --b;
    std::string token;
    for (size_t k = a; k < b; ++k) {
      char32_t cp = utf8::FoldCase(current[k]);
      if (cp == U'’') cp = '\'';
      utf8::Append(token, cp);
    }
    tokens.push_back(std::move(token));
    current.clear();
  };
  size_t pos = 0;
  while (pos < text.size()) {
    const char32_t cp = utf8::Next(text, pos);
    if (utf8::IsSpace(cp)) {
      if (!current.empty()) flush();
    } else {
      current.push_back(cp);
    }
  }
  if (!current.empty()) flush();
  return tokens;
}

std::string_view TrimLine(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

size_t LinkChars(std::string_view text) {
  size_t total = 0;
  size_t i = 0;
  while ((i = text.find('[', i)) != std::string_view::npos) {
    const size_t close = text.find("](", i + 1);
    const size_t nl = text.find('\n', i + 1);
    if (close == std::string_view::npos || (nl != std::string_view::npos && nl < close)) {
      ++i;
      continue;
    }
    const size_t end = text.find(')', close + 2);
    if (end == std::string_view::npos) break;
    total += utf8::Length(text.substr(i, end + 1 - i));
    i = end + 1;
  }
  return total;
}

}  // namespace

void ValidateThresholds(const QualityThresholds &t) {
  for (size_t i = 0; i < t.cuts.size(); ++i) {
    if (!std::isfinite(t.cuts[i])) throw ConfigError("threshold cut is not finite");
    if (i > 0 && !(t.cuts[i] > t.cuts[i - 1])) throw ConfigError("threshold cuts must be strictly increasing");
  }
}

QualityThresholds ThresholdsFromJson(std::string_view json_text) {
  QualityThresholds t;
  try {
    const auto j = nlohmann::json::parse(json_text);
    if (!j.is_object() || !j.contains("cuts") || j.size() != 1) throw ConfigError("thresholds must be {\"cuts\": [...]}");
    const auto &cuts = j.at("cuts");
    if (!cuts.is_array() || cuts.size() != 4) throw ConfigError("thresholds need exactly 4 cuts");
    for (size_t i = 0; i < 4; ++i) {
      if (!cuts[i].is_number()) throw ConfigError("threshold cuts must be numbers");
      t.cuts[i] = cuts[i].get<double>();
    }
  } catch (const nlohmann::json::exception &e) {
    throw ConfigError(std::string("thresholds: ") + e.what());
  }
  ValidateThresholds(t);
  return t;
}

std::string ThresholdsToJson(const QualityThresholds &t) {
  nlohmann::ordered_json j;
  j["cuts"] = t.cuts;
  return j.dump();
}

int ApplyThresholds(double raw, const QualityThresholds &t) {
  int label = 1;
  for (double cut : t.cuts) {
    if (raw > cut) ++label;
  }
  return label;
}

int ContinuousScaleToLabel(int score) {
  if (score < 1 || score > 100) throw Error("continuous score outside 1..100: " + std::to_string(score));
  return (score - 1) / 20 + 1;
}

double MacroF1(const std::vector<int> &truth, const std::vector<int> &predicted) {
  if (truth.size() != predicted.size()) throw Error("MacroF1: length mismatch");
  std::map<int, std::array<int64_t, 3>> counts;  // tp, pred, true
  for (int t : truth) counts[t];
  for (size_t i = 0; i < truth.size(); ++i) {
    ++counts[truth[i]][2];
    auto it = counts.find(predicted[i]);
    if (it != counts.end()) {
      ++it->second[1];
      if (predicted[i] == truth[i]) ++it->second[0];
    }
  }
  if (counts.empty()) return 0.0;
  double sum = 0.0;
  for (const auto &[label, c] : counts) {
    sum += static_cast<double>(2 * c[0]) / static_cast<double>(c[1] + c[2]);
  }
  return sum / static_cast<double>(counts.size());
}

std::vector<double> CandidateCuts(const std::vector<double> &scores) {
  std::vector<double> unique(scores);
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  std::vector<double> grid;
  if (unique.empty()) return grid;
  grid.push_back(unique.front() - 0.05);
  for (size_t i = 0; i + 1 < unique.size(); ++i) grid.push_back((unique[i] + unique[i + 1]) / 2.0);
  grid.push_back(unique.back() + 0.05);
  return grid;
}

FitResult FitThresholdsDetailed(const std::vector<double> &scores, const std::vector<int> &labels) {
  if (scores.size() != labels.size()) throw Error("fit_thresholds: scores and labels differ in length");
  std::set<int> distinct;
  for (int l : labels) {
    if (l < 1 || l > 5) throw Error("fit_thresholds: label outside 1..5");
    distinct.insert(l);
  }
  for (double s : scores) {
    if (!std::isfinite(s)) throw Error("fit_thresholds: score is not finite");
  }
  if (distinct.size() < 2) throw Error("fit_thresholds: need at least two distinct labels");

  const std::vector<double> grid = CandidateCuts(scores);
  const FitTables tables(scores, labels, grid);
  const size_t m = tables.m();
  const size_t inf = m + 1;

  // best[k][p]: best sum of class terms k+1..4 (0-based) given cut k at p.
  std::array<std::vector<double>, 4> best;
  std::array<std::vector<size_t>, 4> next;
  for (auto &b : best) b.assign(m + 2, 0.0);
  for (auto &n : next) n.assign(m + 2, 0);

  auto exact_suffix = [&](int k, size_t p) {
    Rational total = 0;
    for (int layer = k; layer < 4; ++layer) {
      const size_t q = layer < 3 ? next[layer][p] : inf;
      total += tables.Term(layer + 1, p, q).Exact();
      p = q;
    }
    return total;
  };

  for (size_t p = 1; p <= m; ++p) best[3][p] = tables.Term(4, p, inf).Value();
  for (int k = 2; k >= 0; --k) {
    for (size_t p = 1; p <= m; ++p) {
      double best_value = -1.0;
      size_t best_q = 0;
      for (size_t q = p; q <= m; ++q) {
        const Frac term = tables.Term(k + 1, p, q);
        const double value = term.Value() + best[k + 1][q];
        bool better = value > best_value + 1e-9;
        if (!better && best_q != 0 && std::abs(value - best_value) <= 1e-9) {
          const Rational a = term.Exact() + exact_suffix(k + 1, q);
          const Rational b = tables.Term(k + 1, p, best_q).Exact() + exact_suffix(k + 1, best_q);
          better = a > b;
        }
        if (best_q == 0 || better) {
          best_value = value;
          best_q = q;
        }
      }
      best[k][p] = best_value;
      next[k][p] = best_q;
    }
  }

  double top = -1.0;
  size_t p1 = 0;
  for (size_t p = 1; p <= m; ++p) {
    const Frac term = tables.Term(0, 0, p);
    const double value = term.Value() + best[0][p];
    bool better = value > top + 1e-9;
    if (!better && p1 != 0 && std::abs(value - top) <= 1e-9) {
      better = term.Exact() + exact_suffix(0, p) > tables.Term(0, 0, p1).Exact() + exact_suffix(0, p1);
    }
    if (p1 == 0 || better) {
      top = value;
      p1 = p;
    }
  }

  std::array<size_t, 4> chosen = {p1, next[0][p1], 0, 0};
  chosen[2] = next[1][chosen[1]];
  chosen[3] = next[2][chosen[2]];

  FitResult result;
  for (int k = 0; k < 4; ++k) result.grid_cuts[k] = grid[chosen[k] - 1];

  std::vector<double> sorted(scores);
  std::sort(sorted.begin(), sorted.end());
  result.thresholds.cuts = result.grid_cuts;
  for (size_t a = 0; a < 4;) {
    size_t b = a;
    while (b + 1 < 4 && result.grid_cuts[b + 1] == result.grid_cuts[a]) ++b;
    const double v = result.grid_cuts[a];
    const auto above = std::upper_bound(sorted.begin(), sorted.end(), v);
    const double delta = above == sorted.end() ? 0.01 : (*above - v) / 10.0;
    for (size_t t = a; t <= b; ++t) result.thresholds.cuts[t] = v + static_cast<double>(t - a) * delta;
    a = b + 1;
  }

  const Rational total = tables.Term(0, 0, p1).Exact() + exact_suffix(0, p1);
  const Rational mean = total / static_cast<int>(distinct.size());
  result.macro_f1 = static_cast<double>(mean);
  return result;
}

QualityThresholds FitThresholds(const std::vector<double> &scores, const std::vector<int> &labels) {
  return FitThresholdsDetailed(scores, labels).thresholds;
}

HeuristicFeatures ComputeFeatures(std::string_view text) {
  HeuristicFeatures f;
  const std::vector<std::string> tokens = NormalizedTokens(text);
  f.tokens = tokens.size();
  if (tokens.empty()) return f;

  std::vector<bool> covered(tokens.size(), false);
  for (const auto &phrase : Lexicon()) {
    for (size_t i = 0; i + phrase.size() <= tokens.size(); ++i) {
      bool match = true;
      for (size_t k = 0; k < phrase.size() && match; ++k) match = tokens[i + k] == phrase[k];
      if (match) {
        for (size_t k = 0; k < phrase.size(); ++k) covered[i + k] = true;
      }
    }
  }
  f.lexicon_fraction = static_cast<double>(std::count(covered.begin(), covered.end(), true)) /
                       static_cast<double>(tokens.size());

  size_t total_chars = 0;
  size_t prose_chars = 0;
  size_t lines = 0;
  size_t repeated = 0;
  std::unordered_set<std::string> seen;
  std::map<int, size_t> buckets;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string_view line = TrimLine(text.substr(pos, nl - pos));
    pos = nl + 1;
    if (line.empty()) continue;
    ++lines;
    const size_t chars = utf8::Length(line);
    total_chars += chars;
    if (NormalizedTokens(line).size() >= 10) prose_chars += chars;
    if (!seen.insert(std::string(line)).second) ++repeated;
    ++buckets[static_cast<int>(std::log2(static_cast<double>(chars)))];
  }
  if (total_chars > 0) {
    f.prose_share = static_cast<double>(prose_chars) / static_cast<double>(total_chars);
    f.link_density = std::min(1.0, static_cast<double>(LinkChars(text)) / static_cast<double>(total_chars));
  }
  if (lines > 0) f.repetition = static_cast<double>(repeated) / static_cast<double>(lines);
  if (lines > 1 && buckets.size() > 1) {
    double h = 0.0;
    for (const auto &[bucket, count] : buckets) {
      const double p = static_cast<double>(count) / static_cast<double>(lines);
      h -= p * std::log2(p);
    }
    f.line_length_entropy = h / std::log2(static_cast<double>(std::min<size_t>(lines, 16)));
    f.line_length_entropy = std::min(1.0, f.line_length_entropy);
  }
  return f;
}

double ScoreFromFeatures(const HeuristicFeatures &f) {
  if (f.tokens == 0) return 0.0;
  constexpr double kLength = 0.30, kProse = 0.30, kLinks = 0.15, kRepetition = 0.15, kEntropy = 0.10;
  const double length = std::min(1.0, std::log1p(static_cast<double>(f.tokens)) / std::log1p(400.0));
  const double base = kLength * length + kProse * f.prose_share + kLinks * (1.0 - f.link_density) +
                      kRepetition * (1.0 - f.repetition) + kEntropy * (1.0 - f.line_length_entropy);
  const double penalty = std::max(0.0, 1.0 - 4.0 * f.lexicon_fraction);
  return std::clamp(base * penalty, 0.0, 1.0);
}

double HeuristicScore(std::string_view text) { return ScoreFromFeatures(ComputeFeatures(text)); }

std::vector<RemoteScore> ScoreRemote(const std::vector<std::string> &texts, const std::string &endpoint,
                                     const QualityThresholds &thresholds, size_t truncate_chars, bool *fallback,
                                     double timeout_seconds) {
  if (fallback) *fallback = false;
  if (texts.empty()) return {};
  nlohmann::json body;
  body["texts"] = nlohmann::json::array();
  for (const auto &t : texts) body["texts"].push_back(std::string(utf8::Truncate(t, truncate_chars)));

  std::string base = endpoint;
  while (!base.empty() && base.back() == '/') base.pop_back();
  const size_t scheme = base.find("://");
  const size_t path_start = scheme == std::string::npos ? std::string::npos : base.find('/', scheme + 3);
  const std::string origin = path_start == std::string::npos ? base : base.substr(0, path_start);
  const std::string prefix = path_start == std::string::npos ? "" : base.substr(path_start);

  httplib::Client client(origin);
  const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::duration<double>(timeout_seconds));
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  auto res = client.Post(prefix + "/score", body.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace),
                         "application/json");
  if (!res || res->status >= 500) {
    spdlog::warn("quality service unavailable at {} ({}); using heuristic scores for {} texts", endpoint,
                 res ? std::to_string(res->status) : httplib::to_string(res.error()), texts.size());
    if (fallback) *fallback = true;
    std::vector<RemoteScore> out;
    for (const auto &t : texts) {
      const double score = HeuristicScore(utf8::Truncate(t, truncate_chars));
      out.push_back({score, ApplyThresholds(score, thresholds)});
    }
    return out;
  }
  if (res->status != 200) throw ProtocolError("quality service returned HTTP " + std::to_string(res->status));
  nlohmann::json reply;
  try {
    reply = nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception &e) {
    throw ProtocolError(std::string("quality service reply is not JSON: ") + e.what());
  }
  if (!reply.is_object() || !reply.contains("scores") || !reply.contains("labels") ||
      !reply["scores"].is_array() || !reply["labels"].is_array() || reply["scores"].size() != texts.size() ||
      reply["labels"].size() != texts.size()) {
    throw ProtocolError("quality service reply must hold scores and labels arrays matching the request");
  }
  std::vector<RemoteScore> out;
  for (size_t i = 0; i < texts.size(); ++i) {
    const auto &s = reply["scores"][i];
    const auto &l = reply["labels"][i];
    if (!s.is_number() || !l.is_number_integer()) throw ProtocolError("quality service reply has wrong types");
    const int label = l.get<int>();
    if (label < 1 || label > 5) throw ProtocolError("quality service label outside 1..5");
    out.push_back({s.get<double>(), label});
  }
  return out;
}

QualityReport ScoreArticles(std::vector<Article> &articles, const QualityOptions &options) {
  QualityReport report;
  std::vector<Citation *> pending;
  for (auto &article : articles) {
    ForEachElementCitation(article.elements, [&](Citation &c) {
      if (c.source_text && !c.source_quality_label) pending.push_back(&c);
    });
  }
  if (pending.empty()) return report;
  const size_t batch = std::max<size_t>(1, options.batch_size);
  for (size_t start = 0; start < pending.size(); start += batch) {
    const size_t end = std::min(pending.size(), start + batch);
    std::vector<RemoteScore> scores;
    if (options.endpoint) {
      std::vector<std::string> texts;
      for (size_t i = start; i < end; ++i) texts.push_back(*pending[i]->source_text);
      bool fallback = false;
      scores = ScoreRemote(texts, *options.endpoint, options.thresholds, options.truncate_chars, &fallback);
      if (fallback) ++report.fallback_batches;
    } else {
      for (size_t i = start; i < end; ++i) {
        const double score = HeuristicScore(utf8::Truncate(*pending[i]->source_text, options.truncate_chars));
        scores.push_back({score, ApplyThresholds(score, options.thresholds)});
      }
    }
    for (size_t i = start; i < end; ++i) {
      pending[i]->source_quality_raw_score = scores[i - start].score;
      pending[i]->source_quality_label = scores[i - start].label;
    }
    report.scored += end - start;
  }
  for (auto &article : articles) RefreshDerived(article);
  return report;
}

}  // namespace mwcorpus
