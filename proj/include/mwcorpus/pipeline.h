#ifndef MWCORPUS_PIPELINE_H_
#define MWCORPUS_PIPELINE_H_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mwcorpus/dump.h"
#include "mwcorpus/enrich.h"
#include "mwcorpus/language_config.h"
#include "mwcorpus/quality.h"
#include "mwcorpus/scraper.h"
#include "mwcorpus/timeutil.h"

namespace mwcorpus {

// title -> hash of the previously processed dump.
using DeltaState = std::unordered_map<std::string, std::string>;

DeltaState DeltaStateFromArticles(const std::vector<Article> &articles);
DeltaState DeltaStateFromChunks(const std::vector<std::filesystem::path> &chunks);

struct DeltaSelection {
  std::vector<std::string> to_process;
  std::vector<std::string> carried_forward;
};

// Filtered pages are ignored; each title counts once, at its first page.
DeltaSelection DeltaSelect(const DeltaState &prev, const std::vector<RawPage> &new_pages);

struct DeltaReport {
  ChunkManifest manifest;
  DeltaSelection selection;
  uint64_t pages_read = 0;
  uint64_t pages_filtered = 0;
};

// Chunks the new dump like IngestDump, except that unchanged titles reuse
// their prior processed line verbatim instead of a skeleton.
DeltaReport DeltaIngest(const std::filesystem::path &dump, const std::vector<std::filesystem::path> &prev_chunks,
                        const std::filesystem::path &out_dir, const std::string &language,
                        const ChunkOptions &options = {});

// Sorted chunk files of a directory (*.jsonl), or the path itself for a file.
std::vector<std::filesystem::path> ListChunks(const std::filesystem::path &path);

// Stage transforms on one chunk's articles. Each leaves already processed
// articles and citations alone, so reapplying them changes nothing.
struct ParseChunkStats {
  size_t parsed = 0;
  int warnings = 0;
};
ParseChunkStats ParseArticles(std::vector<Article> &articles, const LanguageConfig &config);

enum class Stage { kIngest, kParse, kScrape, kQuality, kEnrich };

const std::vector<Stage> &AllStages();
std::string_view StageName(Stage stage);
Stage StageFromName(std::string_view name);
// Comma-separated names, e.g. "ingest,parse".
std::vector<Stage> ParseStageList(std::string_view list);

struct RunConfig {
  std::filesystem::path dump;
  std::string language;
  std::filesystem::path work_dir;
  std::vector<Stage> stages = AllStages();
  std::optional<LanguageConfig> language_config;  // built-in config when absent
  ScrapePolicy scrape;
  QualityOptions quality;
  EnrichOptions enrich;
  std::string api_endpoint;  // DefaultApiEndpoint(language) when empty
  // Final chunks of a previous run; ingest then runs in delta mode.
  std::optional<std::filesystem::path> previous;
  size_t chunk_size = kChunkSize;
  size_t workers = 1;  // chunk-level parallelism for parse and quality
  Clock clock = UtcNowIso;
};

// Keys: dump, language, work_dir, stages (list or comma string),
// language_config (path), scrape (policy object), quality {thresholds
// (path or {"cuts"}), endpoint, truncate_chars, batch_size}, enrich
// {endpoint, rate, max_attempts, backoff_base_seconds, backoff_factor,
// backoff_cap_seconds, timeout_seconds}, previous, chunk_size, workers.
// Relative paths resolve against base_dir.
RunConfig RunConfigFromJson(std::string_view json_text, const std::filesystem::path &base_dir = {});
RunConfig LoadRunConfig(const std::filesystem::path &path);

struct ChunkFailure {
  std::string chunk;
  std::string error;
};

struct StageReport {
  Stage stage = Stage::kIngest;
  size_t completed = 0;  // targets produced by this run
  size_t skipped = 0;    // targets already present
  size_t failed = 0;
  uint64_t warnings = 0;
  std::vector<ChunkFailure> failures;
};

struct RunReport {
  std::vector<StageReport> stages;
  // Targets of the last stage run, in chunk order.
  std::vector<std::filesystem::path> final_chunks;
  std::optional<DeltaSelection> delta;

  const StageReport *Find(Stage stage) const;
  size_t failed() const;
};

std::string RunReportToJson(const RunReport &report);

std::filesystem::path StageDir(const RunConfig &config, Stage stage);

// Runs the requested stages in order over work_dir/<language>/<stage>/.
// Per-chunk targets are named chunk_NNNNN.<16 hex of input hash>.jsonl, the
// hash covering the input chunk bytes and the stage settings, so a rerun
// with unchanged inputs skips every target. A stage whose predecessor was
// not requested reads that predecessor's existing targets. The report is
// also written to work_dir/<language>/run_report.json.
RunReport RunPipeline(const RunConfig &config);

// Downloads url to path (following redirects), writing atomically.
void FetchToFile(const std::string &url, const std::filesystem::path &path, double timeout_seconds = 60.0);

}  // namespace mwcorpus

#endif  // MWCORPUS_PIPELINE_H_
