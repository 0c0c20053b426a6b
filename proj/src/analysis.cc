#include "mwcorpus/analysis.h"

#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

#include "json.hpp"
#include "mwcorpus/chunk_io.h"
#include "mwcorpus/errors.h"
#include "mwcorpus/utf8.h"

namespace mwcorpus {

StatsTable &StatsTable::operator+=(const StatsTable &other) {
  articles += other.articles;
  headings += other.headings;
  paragraphs += other.paragraphs;
  sentences += other.sentences;
  citations += other.citations;
  web_citations += other.web_citations;
  sources += other.sources;
  web_archive_citations += other.web_archive_citations;
  return *this;
}

StatsTable operator+(StatsTable a, const StatsTable &b) { return a += b; }

bool IsWebArchiveUrl(std::string_view url) { return url.find("://web.archive.org/") != std::string_view::npos; }

StatsTable CountArticle(const Article &article) {
  StatsTable t;
  t.articles = 1;
  for (const auto &element : article.elements) {
    if (std::holds_alternative<Heading>(element)) {
      ++t.headings;
    } else if (const auto *paragraph = std::get_if<Paragraph>(&element)) {
      ++t.paragraphs;
      t.sentences += paragraph->sentences.size();
    }
  }
  ForEachElementCitation(article.elements, [&](const Citation &c) {
    ++t.citations;
    if (!c.url) return;
    ++t.web_citations;
    if (c.source_text && !c.source_text->empty()) ++t.sources;
    if (IsWebArchiveUrl(*c.url)) ++t.web_archive_citations;
  });
  return t;
}

StatsTable CorpusStats(const std::vector<Article> &articles) {
  StatsTable t;
  for (const auto &a : articles) t += CountArticle(a);
  return t;
}

StatsTable CorpusStats(const std::vector<std::filesystem::path> &chunks) {
  StatsTable t;
  for (const auto &path : chunks) t += CorpusStats(ReadChunk(path));
  return t;
}

const std::vector<std::string> &StatsColumns() {
  static const std::vector<std::string> kColumns = {
      "articles", "headings", "paragraphs", "sentences", "citations", "web_citations", "sources",
      "web_archive_citations"};
  return kColumns;
}

std::vector<uint64_t> StatsValues(const StatsTable &t) {
  return {t.articles, t.headings, t.paragraphs, t.sentences, t.citations, t.web_citations, t.sources,
          t.web_archive_citations};
}

std::string FormatStatsTable(const std::map<std::string, StatsTable> &by_language) {
  const auto &columns = StatsColumns();
  std::vector<std::string> header = {"language"};
  header.insert(header.end(), columns.begin(), columns.end());
  std::vector<std::vector<std::string>> rows = {header};
  for (const auto &[lang, t] : by_language) {
    std::vector<std::string> row = {lang};
    for (uint64_t v : StatsValues(t)) row.push_back(std::to_string(v));
    rows.push_back(std::move(row));
  }
  std::vector<size_t> width(header.size(), 0);
  for (const auto &row : rows) {
    for (size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  }
  std::ostringstream out;
  for (const auto &row : rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out << "  ";
      if (i == 0) {
        out << std::left << std::setw(static_cast<int>(width[i])) << row[i];
      } else {
        out << std::right << std::setw(static_cast<int>(width[i])) << row[i];
      }
    }
    out << "\n";
  }
  return out.str();
}

std::string FormatStatsCsv(const std::map<std::string, StatsTable> &by_language) {
  std::ostringstream out;
  out << "language";
  for (const auto &c : StatsColumns()) out << "," << c;
  out << "\n";
  for (const auto &[lang, t] : by_language) {
    out << lang;
    for (uint64_t v : StatsValues(t)) out << "," << v;
    out << "\n";
  }
  return out.str();
}

double PassageWeight(int64_t length, int64_t target) {
  if (target <= 0) throw Error("target length must be positive");
  return std::exp(-static_cast<double>(std::llabs(length - target)) / static_cast<double>(target));
}

std::vector<PassageCandidate> MakeCandidates(const std::vector<std::string> &texts, int64_t target) {
  std::vector<PassageCandidate> out;
  for (const auto &text : texts) {
    const auto length = static_cast<int64_t>(utf8::Length(text));
    if (length < kMinPassageLength || length > kMaxPassageLength) continue;
    out.push_back({text, length, PassageWeight(length, target)});
  }
  return out;
}

std::vector<std::string> ParagraphTexts(const std::vector<Article> &articles) {
  std::vector<std::string> out;
  for (const auto &article : articles) {
    for (const auto &element : article.elements) {
      if (const auto *paragraph = std::get_if<Paragraph>(&element)) out.push_back(paragraph->Text());
    }
  }
  return out;
}

std::vector<PassageCandidate> SamplePassages(const std::vector<PassageCandidate> &candidates, size_t n,
                                             int64_t target, uint64_t seed) {
  if (candidates.empty()) throw Error("no passage candidates to sample from");
  std::vector<double> weights;
  weights.reserve(candidates.size());
  for (const auto &c : candidates) {
    if (c.length_chars < kMinPassageLength || c.length_chars > kMaxPassageLength) {
      throw Error("passage candidate length " + std::to_string(c.length_chars) + " outside [15, 2500]");
    }
    weights.push_back(PassageWeight(c.length_chars, target));
  }
  std::mt19937_64 rng(seed);
  std::discrete_distribution<size_t> pick(weights.begin(), weights.end());
  std::vector<PassageCandidate> out;
  out.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    PassageCandidate c = candidates[pick(rng)];
    c.weight = PassageWeight(c.length_chars, target);
    out.push_back(std::move(c));
  }
  return out;
}

double GeometricMeanPerplexity(const std::vector<std::vector<double>> &passages) {
  if (passages.empty()) throw Error("no passages given");
  double sum_log_ppl = 0.0;
  for (size_t i = 0; i < passages.size(); ++i) {
    const auto &lls = passages[i];
    if (lls.empty()) throw Error("passage " + std::to_string(i) + " has no tokens");
    double sum = 0.0;
    for (double ll : lls) sum += ll;
    sum_log_ppl += -sum / static_cast<double>(lls.size());
  }
  return std::exp(sum_log_ppl / static_cast<double>(passages.size()));
}

std::vector<std::vector<double>> ReadLogLikelihoods(const std::filesystem::path &path) {
  std::vector<std::vector<double>> out;
  size_t line_no = 0;
  for (const auto &line : ReadLines(path)) {
    ++line_no;
    try {
      const auto j = nlohmann::json::parse(line);
      const auto &values = j.is_object() ? j.at("log_likelihoods") : j;
      out.push_back(values.get<std::vector<double>>());
    } catch (const nlohmann::json::exception &e) {
      throw Error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace mwcorpus
