#ifndef MWCORPUS_QUALITY_H_
#define MWCORPUS_QUALITY_H_

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mwcorpus/schema.h"

namespace mwcorpus {

struct QualityThresholds {
  std::array<double, 4> cuts = {0.2, 0.4, 0.6, 0.8};

  bool operator==(const QualityThresholds &) const = default;
};

// Throws ConfigError unless the cuts are finite and strictly increasing.
void ValidateThresholds(const QualityThresholds &t);
QualityThresholds ThresholdsFromJson(std::string_view json_text);
std::string ThresholdsToJson(const QualityThresholds &t);

// 1 + number of cuts strictly below raw.
int ApplyThresholds(double raw, const QualityThresholds &t);

// 1-20 -> 1, 21-40 -> 2, ..., 81-100 -> 5. Throws Error outside 1..100.
int ContinuousScaleToLabel(int score);

// Mean F1 over the classes that occur in truth.
double MacroF1(const std::vector<int> &truth, const std::vector<int> &predicted);

// Sorted candidate cut values: midpoints between consecutive unique scores,
// plus one value 0.05 below the minimum and one 0.05 above the maximum.
std::vector<double> CandidateCuts(const std::vector<double> &scores);

struct FitResult {
  QualityThresholds thresholds;      // strictly increasing
  std::array<double, 4> grid_cuts;   // chosen candidates, non-decreasing
  double macro_f1 = 0.0;
};

// Exhaustive search over non-decreasing 4-tuples of candidate cuts for the
// maximum macro-F1, ties going to the lexicographically smallest tuple.
// Equal chosen cuts are then pulled apart by a tenth of the gap to the next
// score, which leaves every prediction unchanged. Throws Error when fewer
// than two distinct labels are given or the lengths differ.
FitResult FitThresholdsDetailed(const std::vector<double> &scores, const std::vector<int> &labels);
QualityThresholds FitThresholds(const std::vector<double> &scores, const std::vector<int> &labels);

struct HeuristicFeatures {
  size_t tokens = 0;
  double lexicon_fraction = 0.0;  // share of tokens inside error/paywall phrases
  double prose_share = 0.0;       // share of characters on lines of 10+ tokens
  double link_density = 0.0;      // share of characters inside [text](url) links
  double repetition = 0.0;        // share of non-empty lines that repeat an earlier line
  double line_length_entropy = 0.0;  // normalized entropy of bucketed line lengths
};

HeuristicFeatures ComputeFeatures(std::string_view text);
double ScoreFromFeatures(const HeuristicFeatures &f);

// Deterministic raw quality in [0, 1]; 0 for empty text.
double HeuristicScore(std::string_view text);

struct RemoteScore {
  double score = 0.0;
  int label = 1;
};

// POSTs {"texts": [...]} to endpoint + "/score", each text cut to
// truncate_chars code points. On transport failure or a 5xx reply the
// heuristic scorer and thresholds are used instead and *fallback is set.
// A malformed reply throws ProtocolError.
std::vector<RemoteScore> ScoreRemote(const std::vector<std::string> &texts, const std::string &endpoint,
                                     const QualityThresholds &thresholds, size_t truncate_chars = 2000,
                                     bool *fallback = nullptr, double timeout_seconds = 30.0);

struct QualityOptions {
  QualityThresholds thresholds;
  std::optional<std::string> endpoint;  // heuristic scoring when absent
  size_t truncate_chars = 2000;
  size_t batch_size = 32;
};

struct QualityReport {
  size_t scored = 0;
  size_t fallback_batches = 0;
};

// Labels every citation that has source_text and no label yet, then
// rebuilds excerpts.
QualityReport ScoreArticles(std::vector<Article> &articles, const QualityOptions &options);

}  // namespace mwcorpus

#endif  // MWCORPUS_QUALITY_H_
