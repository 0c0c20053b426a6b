#ifndef MWCORPUS_ANALYSIS_H_
#define MWCORPUS_ANALYSIS_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mwcorpus/schema.h"

namespace mwcorpus {

struct StatsTable {
  uint64_t articles = 0;
  uint64_t headings = 0;
  uint64_t paragraphs = 0;
  uint64_t sentences = 0;
  uint64_t citations = 0;
  uint64_t web_citations = 0;          // citations with a url
  uint64_t sources = 0;                // web citations with non-empty source_text
  uint64_t web_archive_citations = 0;  // url contains "://web.archive.org/"

  StatsTable &operator+=(const StatsTable &other);
  bool operator==(const StatsTable &) const = default;
};

StatsTable operator+(StatsTable a, const StatsTable &b);

bool IsWebArchiveUrl(std::string_view url);

StatsTable CountArticle(const Article &article);
StatsTable CorpusStats(const std::vector<Article> &articles);
StatsTable CorpusStats(const std::vector<std::filesystem::path> &chunks);

// Column headers in output order; the first seven follow the usual
// dataset-card row order.
const std::vector<std::string> &StatsColumns();
std::vector<uint64_t> StatsValues(const StatsTable &t);

// One row per language, right-aligned columns.
std::string FormatStatsTable(const std::map<std::string, StatsTable> &by_language);
std::string FormatStatsCsv(const std::map<std::string, StatsTable> &by_language);

inline constexpr int64_t kDefaultTargetLength = 150;
inline constexpr int64_t kMinPassageLength = 15;
inline constexpr int64_t kMaxPassageLength = 2500;

// exp(-|length - target| / target)
double PassageWeight(int64_t length, int64_t target);

struct PassageCandidate {
  std::string text;
  int64_t length_chars = 0;  // code points
  double weight = 0.0;

  bool operator==(const PassageCandidate &) const = default;
};

// Keeps texts whose code-point length lies in [15, 2500] and weights them.
std::vector<PassageCandidate> MakeCandidates(const std::vector<std::string> &texts,
                                             int64_t target = kDefaultTargetLength);

// Paragraph texts of the articles, in document order.
std::vector<std::string> ParagraphTexts(const std::vector<Article> &articles);

// Weighted sampling with replacement, deterministic for a seed. Throws Error
// for an empty candidate list or a candidate outside the length bounds.
std::vector<PassageCandidate> SamplePassages(const std::vector<PassageCandidate> &candidates, size_t n,
                                             int64_t target, uint64_t seed);

// exp of the mean over passages of ln(ppl), with ppl = exp(-mean token
// log-likelihood). Throws Error for an empty input or an empty passage.
double GeometricMeanPerplexity(const std::vector<std::vector<double>> &passages);

// Lines are either a JSON array of numbers or an object with a
// "log_likelihoods" array.
std::vector<std::vector<double>> ReadLogLikelihoods(const std::filesystem::path &path);

}  // namespace mwcorpus

#endif  // MWCORPUS_ANALYSIS_H_
