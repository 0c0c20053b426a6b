#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "mwcorpus/analysis.h"
#include "mwcorpus/chunk_io.h"
#include "mwcorpus/dump.h"
#include "mwcorpus/enrich.h"
#include "mwcorpus/errors.h"
#include "mwcorpus/pipeline.h"
#include "mwcorpus/quality.h"
#include "mwcorpus/scraper.h"
#include "mwcorpus/translate.h"

namespace fs = std::filesystem;
using namespace mwcorpus;

namespace {

std::vector<fs::path> ExpandInputs(const std::vector<std::string> &inputs) {
  std::vector<fs::path> out;
  for (const auto &in : inputs) {
    for (auto &p : ListChunks(in)) out.push_back(std::move(p));
  }
  if (out.empty()) throw ConfigError("no chunk files found in the inputs");
  return out;
}

// Applies fn to every input chunk and writes the result under out_dir with
// the same file name.
template <typename Fn>
void MapChunks(const std::vector<std::string> &inputs, const std::string &out_dir, Fn &&fn) {
  fs::create_directories(out_dir);
  for (const auto &path : ExpandInputs(inputs)) {
    auto articles = ReadChunk(path);
    fn(articles);
    WriteChunkAtomic(fs::path(out_dir) / path.filename(), articles);
    spdlog::info("{} -> {}", path.string(), (fs::path(out_dir) / path.filename()).string());
  }
}

LanguageConfig LanguageConfigFor(const std::string &lang, const std::string &config_path) {
  return config_path.empty() ? DefaultLanguageConfig(lang) : LoadLanguageConfig(config_path);
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Wikipedia dump to citation corpus toolkit"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off");

  // ingest
  auto *ingest = app.add_subcommand("ingest", "Filter a dump and write article chunks");
  std::string ingest_dump, ingest_lang, ingest_out;
  size_t ingest_chunk = kChunkSize;
  bool ingest_overwrite = false;
  ingest->add_option("--dump", ingest_dump, "Dump XML (.xml, .bz2 or .gz)")->required();
  ingest->add_option("--lang", ingest_lang, "Language code")->required();
  ingest->add_option("--out", ingest_out, "Output directory")->required();
  ingest->add_option("--chunk-size", ingest_chunk, "Articles per chunk");
  ingest->add_flag("--overwrite", ingest_overwrite, "Replace existing chunks");

  // parse
  auto *parse = app.add_subcommand("parse", "Parse wikicode into elements");
  std::string parse_lang, parse_config, parse_out;
  std::vector<std::string> parse_in;
  parse->add_option("--lang", parse_lang, "Language code")->required();
  parse->add_option("--config", parse_config, "Language config JSON");
  parse->add_option("--out-dir", parse_out, "Output directory")->required();
  parse->add_option("inputs", parse_in, "Chunk files or directories")->required();

  // scrape
  auto *scrape = app.add_subcommand("scrape", "Download and extract citation sources");
  std::string scrape_policy, scrape_out;
  std::vector<std::string> scrape_in;
  scrape->add_option("--policy", scrape_policy, "Scrape policy JSON");
  scrape->add_option("--out-dir", scrape_out, "Output directory")->required();
  scrape->add_option("inputs", scrape_in, "Chunk files or directories")->required();

  // quality
  auto *quality = app.add_subcommand("quality", "Label scraped sources with quality classes");
  std::string quality_thresholds, quality_endpoint, quality_out;
  size_t quality_truncate = 2000, quality_batch = 32;
  std::vector<std::string> quality_in;
  quality->add_option("--thresholds", quality_thresholds, "Thresholds JSON");
  quality->add_option("--endpoint", quality_endpoint, "Scoring service base URL (heuristic when absent)");
  quality->add_option("--truncate", quality_truncate, "Characters sent per text");
  quality->add_option("--batch-size", quality_batch, "Texts per request");
  quality->add_option("--out-dir", quality_out, "Output directory")->required();
  quality->add_option("inputs", quality_in, "Chunk files or directories")->required();

  // fit-thresholds
  auto *fit = app.add_subcommand("fit-thresholds", "Fit class cut points to labeled scores");
  std::string fit_data, fit_out;
  fit->add_option("--data", fit_data, "JSON lines with score and label")->required();
  fit->add_option("--out", fit_out, "Thresholds JSON to write")->required();

  // enrich
  auto *enrich = app.add_subcommand("enrich", "Add cross-lingual links and first revision dates");
  std::string enrich_lang, enrich_endpoint, enrich_out;
  double enrich_rate = 1.0;
  std::vector<std::string> enrich_in;
  enrich->add_option("--lang", enrich_lang, "Language code")->required();
  enrich->add_option("--endpoint", enrich_endpoint, "Action API URL");
  enrich->add_option("--rate", enrich_rate, "Requests per second");
  enrich->add_option("--out-dir", enrich_out, "Output directory")->required();
  enrich->add_option("inputs", enrich_in, "Chunk files or directories")->required();

  // delta
  auto *delta = app.add_subcommand("delta", "Chunk a new dump, carrying unchanged articles forward");
  std::string delta_dump, delta_lang, delta_out;
  std::vector<std::string> delta_prev;
  size_t delta_chunk = kChunkSize;
  delta->add_option("--prev", delta_prev, "Previous processed chunks (files or directories)")->required();
  delta->add_option("--dump", delta_dump, "New dump")->required();
  delta->add_option("--lang", delta_lang, "Language code")->required();
  delta->add_option("--out", delta_out, "Output directory")->required();
  delta->add_option("--chunk-size", delta_chunk, "Articles per chunk");

  // translate-extract
  auto *textract = app.add_subcommand("translate-extract", "Write headings and sentences as translatable records");
  std::string textract_chunk, textract_out, textract_translator, textract_lang = "en";
  textract->add_option("chunk", textract_chunk, "Chunk file")->required();
  textract->add_option("--out", textract_out, "Records JSONL")->required();
  textract->add_option("--translator", textract_translator, "Fill translations with: identity, reverse");
  textract->add_option("--source-lang", textract_lang, "Source language passed to the translator");

  // translate-insert
  auto *tinsert = app.add_subcommand("translate-insert", "Write translated records back into a chunk");
  std::string tinsert_chunk, tinsert_records, tinsert_out;
  tinsert->add_option("chunk", tinsert_chunk, "Chunk file")->required();
  tinsert->add_option("--records", tinsert_records, "Records JSONL")->required();
  tinsert->add_option("--out", tinsert_out, "Output chunk file")->required();

  // stats
  auto *stats = app.add_subcommand("stats", "Count element types per language");
  std::vector<std::string> stats_in;
  std::string stats_csv;
  stats->add_option("inputs", stats_in, "[lang=]chunk file or directory")->required();
  stats->add_option("--csv", stats_csv, "Also write CSV here");

  // sample
  auto *sample = app.add_subcommand("sample", "Sample paragraphs weighted toward a target length");
  std::vector<std::string> sample_in;
  size_t sample_n = 1000;
  int64_t sample_target = kDefaultTargetLength;
  uint64_t sample_seed = 0;
  std::string sample_out;
  sample->add_option("inputs", sample_in, "Chunk files or directories")->required();
  sample->add_option("-n", sample_n, "Passages to draw");
  sample->add_option("--target", sample_target, "Target length in characters");
  sample->add_option("--seed", sample_seed, "Random seed");
  sample->add_option("--out", sample_out, "Output JSONL")->required();

  // perplexity
  auto *ppl = app.add_subcommand("perplexity", "Geometric mean perplexity of token log-likelihoods");
  std::string ppl_in;
  ppl->add_option("input", ppl_in, "Log-likelihood JSONL")->required();

  // run
  auto *run = app.add_subcommand("run", "Run the pipeline from a JSON run config");
  std::string run_config, run_stages;
  run->add_option("config", run_config, "Run config JSON")->required();
  run->add_option("--stages", run_stages, "Override the stage list, e.g. ingest,parse");

  // fetch
  auto *fetch = app.add_subcommand("fetch", "Download a dump by URL");
  std::string fetch_url, fetch_out;
  fetch->add_option("url", fetch_url, "URL")->required();
  fetch->add_option("out", fetch_out, "Destination file")->required();

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*ingest) {
      ChunkOptions options;
      options.chunk_size = ingest_chunk;
      options.overwrite = ingest_overwrite;
      const auto r = IngestDump(ingest_dump, ingest_out, ingest_lang, options);
      std::printf("%llu pages read, %llu filtered, %llu articles in %zu chunks\n",
                  static_cast<unsigned long long>(r.pages_read), static_cast<unsigned long long>(r.pages_filtered),
                  static_cast<unsigned long long>(r.manifest.article_count), r.manifest.chunk_paths.size());
    } else if (*parse) {
      const LanguageConfig config = LanguageConfigFor(parse_lang, parse_config);
      ValidateLanguageConfig(config);
      MapChunks(parse_in, parse_out, [&](std::vector<Article> &articles) { ParseArticles(articles, config); });
    } else if (*scrape) {
      const ScrapePolicy policy = scrape_policy.empty() ? ScrapePolicy{} : ScrapePolicyFromJson(ReadFile(scrape_policy));
      ValidateScrapePolicy(policy);
      MapChunks(scrape_in, scrape_out, [&](std::vector<Article> &articles) { ScrapeArticles(articles, policy); });
    } else if (*quality) {
      QualityOptions options;
      if (!quality_thresholds.empty()) options.thresholds = ThresholdsFromJson(ReadFile(quality_thresholds));
      if (!quality_endpoint.empty()) options.endpoint = quality_endpoint;
      options.truncate_chars = quality_truncate;
      options.batch_size = quality_batch;
      MapChunks(quality_in, quality_out, [&](std::vector<Article> &articles) { ScoreArticles(articles, options); });
    } else if (*fit) {
      std::vector<double> scores;
      std::vector<int> labels;
      for (const auto &line : ReadLines(fit_data)) {
        const auto j = nlohmann::json::parse(line);
        scores.push_back(j.at("score").get<double>());
        labels.push_back(j.at("label").get<int>());
      }
      const FitResult r = FitThresholdsDetailed(scores, labels);
      WriteFileAtomic(fit_out, ThresholdsToJson(r.thresholds) + "\n");
      std::printf("macro-F1 %.6f\n", r.macro_f1);
    } else if (*enrich) {
      EnrichOptions options;
      options.rate = enrich_rate;
      ActionApiClient client(enrich_endpoint.empty() ? DefaultApiEndpoint(enrich_lang) : enrich_endpoint, options);
      MapChunks(enrich_in, enrich_out,
                [&](std::vector<Article> &articles) { EnrichArticles(articles, enrich_lang, client); });
    } else if (*delta) {
      ChunkOptions options;
      options.chunk_size = delta_chunk;
      options.overwrite = true;
      const auto r = DeltaIngest(delta_dump, ExpandInputs(delta_prev), delta_out, delta_lang, options);
      std::printf("%zu to process, %zu carried forward\n", r.selection.to_process.size(),
                  r.selection.carried_forward.size());
      for (const auto &title : r.selection.to_process) std::printf("  %s\n", title.c_str());
    } else if (*textract) {
      auto records = ExtractTranslatables(fs::path(textract_chunk));
      if (!textract_translator.empty()) {
        TranslateRecords(records, TranslatorByName(textract_translator), textract_lang);
      }
      WriteTranslatables(textract_out, records);
      std::printf("%zu records\n", records.size());
    } else if (*tinsert) {
      InsertTranslations(fs::path(tinsert_chunk), ReadTranslatables(tinsert_records), tinsert_out);
    } else if (*stats) {
      std::map<std::string, StatsTable> by_language;
      for (const auto &arg : stats_in) {
        std::string lang, path = arg;
        if (const size_t eq = arg.find('='); eq != std::string::npos) {
          lang = arg.substr(0, eq);
          path = arg.substr(eq + 1);
        } else if (fs::is_directory(path)) {
          if (const auto manifest = LoadManifest(path)) lang = manifest->language;
        }
        if (lang.empty()) lang = "all";
        by_language[lang] += CorpusStats(ListChunks(path));
      }
      std::fputs(FormatStatsTable(by_language).c_str(), stdout);
      if (!stats_csv.empty()) WriteFileAtomic(stats_csv, FormatStatsCsv(by_language));
    } else if (*sample) {
      std::vector<std::string> texts;
      for (const auto &path : ExpandInputs(sample_in)) {
        for (auto &t : ParagraphTexts(ReadChunk(path))) texts.push_back(std::move(t));
      }
      const auto passages = SamplePassages(MakeCandidates(texts, sample_target), sample_n, sample_target, sample_seed);
      std::vector<std::string> lines;
      for (const auto &p : passages) {
        lines.push_back(nlohmann::ordered_json{{"text", p.text}, {"length_chars", p.length_chars}, {"weight", p.weight}}
                            .dump());
      }
      WriteLinesAtomic(sample_out, lines);
    } else if (*ppl) {
      std::printf("%.9g\n", GeometricMeanPerplexity(ReadLogLikelihoods(ppl_in)));
    } else if (*run) {
      RunConfig config = LoadRunConfig(run_config);
      if (!run_stages.empty()) config.stages = ParseStageList(run_stages);
      const RunReport report = RunPipeline(config);
      std::fputs(RunReportToJson(report).c_str(), stdout);
      return report.failed() == 0 ? 0 : 2;
    } else if (*fetch) {
      FetchToFile(fetch_url, fetch_out);
    }
  } catch (const std::exception &e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
