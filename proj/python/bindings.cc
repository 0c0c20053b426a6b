#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "mwcorpus/analysis.h"
#include "mwcorpus/dump.h"
#include "mwcorpus/errors.h"
#include "mwcorpus/language_config.h"
#include "mwcorpus/pipeline.h"
#include "mwcorpus/quality.h"
#include "mwcorpus/schema.h"

namespace py = pybind11;
using namespace mwcorpus;

namespace {

QualityThresholds ThresholdsFrom(const std::array<double, 4> &cuts) {
  QualityThresholds t;
  t.cuts = cuts;
  ValidateThresholds(t);
  return t;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Wikipedia dump to citation corpus toolkit";

  auto error = py::register_exception<Error>(m, "Error");
  py::register_exception<SchemaError>(m, "SchemaError", error.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", error.ptr());
  py::register_exception<ProtocolError>(m, "ProtocolError", error.ptr());
  py::register_exception<XmlError>(m, "XmlError", error.ptr());
  py::register_exception<IoError>(m, "IoError", error.ptr());

  m.def(
      "parse_page",
      [](const std::string &title, const std::string &wikicode, const std::string &language,
         const std::string &last_revision) {
        std::vector<Article> articles = {SkeletonArticle({title, wikicode, last_revision, 0})};
        ParseArticles(articles, DefaultLanguageConfig(language));
        return SerializeArticle(articles.front());
      },
      py::arg("title"), py::arg("wikicode"), py::arg("language") = "en",
      py::arg("last_revision") = "2024-01-01T00:00:00Z",
      "Parse one page and return its article as a JSON line.");
  m.def(
      "normalize_line", [](const std::string &line) { return SerializeArticle(DeserializeArticle(line)); },
      py::arg("line"), "Validate an article line and return its canonical form.");
  m.def("compute_hash", &ComputeHash, py::arg("title"), py::arg("wikicode"));

  m.def(
      "apply_thresholds",
      [](double raw, const std::array<double, 4> &cuts) { return ApplyThresholds(raw, ThresholdsFrom(cuts)); },
      py::arg("raw"), py::arg("cuts") = QualityThresholds{}.cuts);
  m.def("continuous_scale_to_label", &ContinuousScaleToLabel, py::arg("score"));
  m.def("macro_f1", &MacroF1, py::arg("truth"), py::arg("predicted"));
  m.def(
      "fit_thresholds",
      [](const std::vector<double> &scores, const std::vector<int> &labels) {
        const FitResult fit = FitThresholdsDetailed(scores, labels);
        return py::make_tuple(fit.thresholds.cuts, fit.macro_f1);
      },
      py::arg("scores"), py::arg("labels"), "Return (cuts, macro_f1) maximizing macro-F1.");
  m.def("heuristic_score", [](const std::string &text) { return HeuristicScore(text); }, py::arg("text"));

  m.def("passage_weight", &PassageWeight, py::arg("length"), py::arg("target"));
  m.def("geometric_mean_perplexity", &GeometricMeanPerplexity, py::arg("passages"));
  m.def(
      "corpus_stats",
      [](const std::vector<std::filesystem::path> &chunks) {
        const StatsTable t = CorpusStats(chunks);
        const auto values = StatsValues(t);
        py::dict out;
        for (size_t i = 0; i < values.size(); ++i) out[py::str(StatsColumns()[i])] = values[i];
        return out;
      },
      py::arg("chunks"));

  m.def(
      "ingest_dump",
      [](const std::filesystem::path &dump, const std::filesystem::path &out_dir, const std::string &language,
         size_t chunk_size, bool overwrite) {
        ChunkOptions options;
        options.chunk_size = chunk_size;
        options.overwrite = overwrite;
        IngestReport r;
        {
          py::gil_scoped_release release;
          r = IngestDump(dump, out_dir, language, options);
        }
        py::dict out;
        out["chunks"] = r.manifest.chunk_paths;
        out["pages_read"] = r.pages_read;
        out["pages_filtered"] = r.pages_filtered;
        return out;
      },
      py::arg("dump"), py::arg("out_dir"), py::arg("language"), py::arg("chunk_size") = 1000,
      py::arg("overwrite") = false);
  m.def(
      "run_pipeline",
      [](const std::filesystem::path &config_path) {
        const RunConfig config = LoadRunConfig(config_path);
        py::gil_scoped_release release;
        return RunReportToJson(RunPipeline(config));
      },
      py::arg("config_path"), "Run the configured stages and return the run report as JSON.");
}
