#include "oracles.h"

#include <algorithm>
#include <set>
#include <string>

namespace mwcorpus::testing {

std::vector<ExcerptWithCitations> ExcerptOracle(const std::vector<Element> &elements) {
  std::vector<ExcerptWithCitations> out;
  for (const auto &e : elements) {
    const auto *p = std::get_if<Paragraph>(&e);
    if (!p) continue;
    const auto &ss = p->sentences;
    for (size_t i = 0; i < ss.size(); ++i) {
      if (ss[i].citations.empty()) continue;
      const std::vector<Sentence> window(ss.begin() + static_cast<long>(i >= 2 ? i - 2 : 0),
                                         ss.begin() + static_cast<long>(i) + 1);
      ExcerptWithCitations x;
      std::string translated;
      bool complete = true;
      for (size_t k = 0; k < window.size(); ++k) {
        const std::string ws = k + 1 < window.size() ? window[k].trailing_whitespace : "";
        x.text += window[k].text + ws;
        if (window[k].translated_text) {
          translated += *window[k].translated_text + ws;
        } else {
          complete = false;
        }
      }
      if (complete) x.translated_text = translated;
      x.citations = ss[i].citations;
      out.push_back(x);
    }
  }
  return out;
}

double OracleMacroF1(const std::vector<int> &truth, const std::vector<int> &predicted) {
  std::set<int> classes(truth.begin(), truth.end());
  double sum = 0;
  for (int c : classes) {
    int tp = 0, fp = 0, fn = 0;
    for (size_t i = 0; i < truth.size(); ++i) {
      tp += truth[i] == c && predicted[i] == c;
      fp += truth[i] != c && predicted[i] == c;
      fn += truth[i] == c && predicted[i] != c;
    }
    sum += tp == 0 ? 0.0 : 2.0 * tp / (2.0 * tp + fp + fn);
  }
  return sum / static_cast<double>(classes.size());
}

std::vector<double> OracleCandidates(std::vector<double> scores) {
  std::sort(scores.begin(), scores.end());
  scores.erase(std::unique(scores.begin(), scores.end()), scores.end());
  std::vector<double> out = {scores.front() - 0.05};
  for (size_t i = 1; i < scores.size(); ++i) out.push_back((scores[i - 1] + scores[i]) / 2);
  out.push_back(scores.back() + 0.05);
  return out;
}

int OracleLabel(double raw, const std::array<double, 4> &cuts) {
  int label = 1;
  for (double c : cuts) label += raw > c;
  return label;
}

FitOracleResult FitOracle(const std::vector<double> &scores, const std::vector<int> &labels, bool multiset) {
  const auto cand = OracleCandidates(scores);
  const size_t n = cand.size();
  const size_t step = multiset ? 0 : 1;
  FitOracleResult best;
  for (size_t a = 0; a < n; ++a) {
    for (size_t b = a + step; b < n; ++b) {
      for (size_t c = b + step; c < n; ++c) {
        for (size_t d = c + step; d < n; ++d) {
          const std::array<double, 4> cuts = {cand[a], cand[b], cand[c], cand[d]};
          std::vector<int> pred;
          for (double s : scores) pred.push_back(OracleLabel(s, cuts));
          const double f1 = OracleMacroF1(labels, pred);
          if (f1 > best.f1 + 1e-12) best = {cuts, f1};
        }
      }
    }
  }
  return best;
}

}  // namespace mwcorpus::testing
