#include "mwcorpus/pipeline.h"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <functional>
#include <set>
#include <thread>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "httplib.h"
#include "json.hpp"
#include "mwcorpus/chunk_io.h"
#include "mwcorpus/errors.h"
#include "mwcorpus/excerpts.h"
#include "mwcorpus/translate.h"
#include "mwcorpus/utf8.h"
#include "mwcorpus/wikitext.h"

namespace mwcorpus {

namespace fs = std::filesystem;

namespace {

using json = nlohmann::json;

bool IsChunkFile(const fs::path &path) {
  const std::string name = path.filename().string();
  return name.rfind("chunk_", 0) == 0 && path.extension() == ".jsonl";
}

size_t CountErroredCitations(const std::vector<Article> &articles) {
  size_t n = 0;
  for (const auto &a : articles) {
    ForEachElementCitation(a.elements, [&](const Citation &c) {
      if (c.source_download_error || c.source_extract_error) ++n;
    });
  }
  return n;
}

// Runs job(i) for i in [0, n) on up to `workers` threads.
void ParallelFor(size_t n, size_t workers, const std::function<void(size_t)> &job) {
  workers = std::max<size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> threads;
  for (size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&]() {
      for (size_t i = next++; i < n; i = next++) job(i);
    });
  }
  for (auto &t : threads) t.join();
}

fs::path Resolve(const fs::path &base, const std::string &p) {
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace

DeltaState DeltaStateFromArticles(const std::vector<Article> &articles) {
  DeltaState state;
  for (const auto &a : articles) state.emplace(a.title, a.hash);
  return state;
}

DeltaState DeltaStateFromChunks(const std::vector<fs::path> &chunks) {
  DeltaState state;
  for (const auto &path : chunks) {
    for (const auto &a : ReadChunk(path)) state.emplace(a.title, a.hash);
  }
  return state;
}

DeltaSelection DeltaSelect(const DeltaState &prev, const std::vector<RawPage> &new_pages) {
  DeltaSelection out;
  std::unordered_set<std::string> seen;
  for (const auto &page : new_pages) {
    if (ShouldFilter(page)) continue;
    const Article skeleton = SkeletonArticle(page);
    if (!seen.insert(skeleton.title).second) continue;
    const auto it = prev.find(skeleton.title);
    if (it != prev.end() && it->second == skeleton.hash) {
      out.carried_forward.push_back(skeleton.title);
    } else {
      out.to_process.push_back(skeleton.title);
    }
  }
  return out;
}

DeltaReport DeltaIngest(const fs::path &dump, const std::vector<fs::path> &prev_chunks, const fs::path &out_dir,
                        const std::string &language, const ChunkOptions &options) {
  struct Prior {
    std::string hash;
    std::string line;
  };
  std::unordered_map<std::string, Prior> prior;
  for (const auto &path : prev_chunks) {
    for (auto &line : ReadLines(path)) {
      const Article a = DeserializeArticle(line);
      prior.emplace(a.title, Prior{a.hash, std::move(line)});
    }
  }

  ChunkOptions opts = options;
  if (opts.source_sha256.empty()) opts.source_sha256 = FileSha256(dump);
  DumpInput input(dump);
  PageReader reader(input.stream());
  DeltaReport report;
  std::unordered_set<std::string> seen;
  report.manifest = WriteChunkLines(
      [&]() -> std::optional<std::string> {
        while (auto page = reader.Next()) {
          ++report.pages_read;
          if (ShouldFilter(*page)) {
            ++report.pages_filtered;
            continue;
          }
          Article skeleton = SkeletonArticle(*page);
          const auto it = prior.find(skeleton.title);
          const bool carried = it != prior.end() && it->second.hash == skeleton.hash;
          if (seen.insert(skeleton.title).second) {
            (carried ? report.selection.carried_forward : report.selection.to_process).push_back(skeleton.title);
          }
          if (carried) return it->second.line;
          return SerializeArticle(skeleton);
        }
        return std::nullopt;
      },
      out_dir, language, opts);
  return report;
}

std::vector<fs::path> ListChunks(const fs::path &path) {
  if (!fs::is_directory(path)) {
    if (!fs::exists(path)) throw IoError("no such chunk file or directory: " + path.string());
    return {path};
  }
  std::vector<fs::path> out;
  for (const auto &entry : fs::directory_iterator(path)) {
    if (entry.is_regular_file() && IsChunkFile(entry.path())) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

ParseChunkStats ParseArticles(std::vector<Article> &articles, const LanguageConfig &config) {
  ParseChunkStats out;
  for (auto &article : articles) {
    if (!article.elements.empty()) continue;
    ParseStats stats;
    article.elements = ParseArticle(article.wikicode, config, &stats);
    RefreshDerived(article);
    out.warnings += stats.warnings + stats.degraded_blocks;
    ++out.parsed;
  }
  return out;
}

const std::vector<Stage> &AllStages() {
  static const std::vector<Stage> kStages = {Stage::kIngest, Stage::kParse, Stage::kScrape, Stage::kQuality,
                                             Stage::kEnrich};
  return kStages;
}

std::string_view StageName(Stage stage) {
  switch (stage) {
    case Stage::kIngest: return "ingest";
    case Stage::kParse: return "parse";
    case Stage::kScrape: return "scrape";
    case Stage::kQuality: return "quality";
    case Stage::kEnrich: return "enrich";
  }
  return "?";
}

Stage StageFromName(std::string_view name) {
  for (Stage s : AllStages()) {
    if (StageName(s) == name) return s;
  }
  throw ConfigError("unknown stage '" + std::string(name) + "'");
}

std::vector<Stage> ParseStageList(std::string_view list) {
  std::set<Stage> chosen;
  size_t start = 0;
  while (start <= list.size()) {
    size_t end = list.find(',', start);
    if (end == std::string_view::npos) end = list.size();
    std::string_view name = list.substr(start, end - start);
    while (!name.empty() && name.front() == ' ') name.remove_prefix(1);
    while (!name.empty() && name.back() == ' ') name.remove_suffix(1);
    if (!name.empty()) chosen.insert(StageFromName(name));
    start = end + 1;
  }
  if (chosen.empty()) throw ConfigError("empty stage list");
  return {chosen.begin(), chosen.end()};
}

RunConfig RunConfigFromJson(std::string_view json_text, const fs::path &base_dir) {
  RunConfig c;
  try {
    const json j = json::parse(json_text);
    if (!j.is_object()) throw ConfigError("run config must be a JSON object");
    c.language = j.at("language").get<std::string>();
    c.work_dir = Resolve(base_dir, j.at("work_dir").get<std::string>());
    if (j.contains("dump")) c.dump = Resolve(base_dir, j["dump"].get<std::string>());
    if (j.contains("stages")) {
      const auto &s = j["stages"];
      if (s.is_string()) {
        c.stages = ParseStageList(s.get<std::string>());
      } else {
        std::string joined;
        for (const auto &name : s) joined += name.get<std::string>() + ",";
        c.stages = ParseStageList(joined);
      }
    }
    if (j.contains("language_config")) {
      const auto &lc = j["language_config"];
      c.language_config = lc.is_string() ? LoadLanguageConfig(Resolve(base_dir, lc.get<std::string>()))
                                         : LanguageConfigFromJson(lc.dump());
    }
    if (j.contains("scrape")) c.scrape = ScrapePolicyFromJson(j["scrape"].dump());
    if (j.contains("quality")) {
      const auto &q = j["quality"];
      if (q.contains("thresholds")) {
        const auto &t = q["thresholds"];
        c.quality.thresholds = t.is_string() ? ThresholdsFromJson(ReadFile(Resolve(base_dir, t.get<std::string>())))
                                             : ThresholdsFromJson(t.dump());
      }
      if (q.contains("endpoint") && !q["endpoint"].is_null()) c.quality.endpoint = q["endpoint"].get<std::string>();
      c.quality.truncate_chars = q.value("truncate_chars", c.quality.truncate_chars);
      c.quality.batch_size = q.value("batch_size", c.quality.batch_size);
    }
    if (j.contains("enrich")) {
      const auto &e = j["enrich"];
      c.api_endpoint = e.value("endpoint", c.api_endpoint);
      c.enrich.rate = e.value("rate", c.enrich.rate);
      c.enrich.max_attempts = e.value("max_attempts", c.enrich.max_attempts);
      c.enrich.backoff_base_seconds = e.value("backoff_base_seconds", c.enrich.backoff_base_seconds);
      c.enrich.backoff_factor = e.value("backoff_factor", c.enrich.backoff_factor);
      c.enrich.backoff_cap_seconds = e.value("backoff_cap_seconds", c.enrich.backoff_cap_seconds);
      c.enrich.timeout_seconds = e.value("timeout_seconds", c.enrich.timeout_seconds);
    }
    if (j.contains("previous") && !j["previous"].is_null()) {
      c.previous = Resolve(base_dir, j["previous"].get<std::string>());
    }
    c.chunk_size = j.value("chunk_size", c.chunk_size);
    c.workers = j.value("workers", c.workers);
  } catch (const json::exception &e) {
    throw ConfigError(std::string("bad run config: ") + e.what());
  }
  if (c.chunk_size == 0) throw ConfigError("chunk_size must be positive");
  if (c.quality.batch_size == 0) throw ConfigError("quality batch_size must be positive");
  return c;
}

RunConfig LoadRunConfig(const fs::path &path) {
  return RunConfigFromJson(ReadFile(path), path.parent_path());
}

const StageReport *RunReport::Find(Stage stage) const {
  for (const auto &s : stages) {
    if (s.stage == stage) return &s;
  }
  return nullptr;
}

size_t RunReport::failed() const {
  size_t n = 0;
  for (const auto &s : stages) n += s.failed;
  return n;
}

std::string RunReportToJson(const RunReport &report) {
  nlohmann::ordered_json j;
  j["stages"] = nlohmann::ordered_json::array();
  for (const auto &s : report.stages) {
    nlohmann::ordered_json sj;
    sj["stage"] = StageName(s.stage);
    sj["completed"] = s.completed;
    sj["skipped"] = s.skipped;
    sj["failed"] = s.failed;
    sj["warnings"] = s.warnings;
    sj["failures"] = nlohmann::ordered_json::array();
    for (const auto &f : s.failures) sj["failures"].push_back({{"chunk", f.chunk}, {"error", f.error}});
    j["stages"].push_back(std::move(sj));
  }
  j["final_chunks"] = nlohmann::ordered_json::array();
  for (const auto &p : report.final_chunks) j["final_chunks"].push_back(p.string());
  if (report.delta) {
    j["delta"] = {{"to_process", report.delta->to_process},
                  {"carried_forward", report.delta->carried_forward.size()}};
  }
  return j.dump(2) + "\n";
}

fs::path StageDir(const RunConfig &config, Stage stage) {
  return config.work_dir / config.language / std::string(StageName(stage));
}

namespace {

class PipelineRunner {
 public:
  explicit PipelineRunner(const RunConfig &config)
      : config_(config),
        language_config_(config.language_config ? *config.language_config
                                                : DefaultLanguageConfig(config.language)),
        api_endpoint_(config.api_endpoint.empty() ? DefaultApiEndpoint(config.language) : config.api_endpoint) {}

  RunReport Run() {
    if (config_.language.empty()) throw ConfigError("run config needs a language");
    ValidateLanguageConfig(language_config_);
    ValidateScrapePolicy(config_.scrape);
    ValidateThresholds(config_.quality.thresholds);
    const std::set<Stage> requested(config_.stages.begin(), config_.stages.end());

    RunReport report;
    // Current per-chunk input paths; empty entries mark failed chunks.
    std::vector<std::pair<std::string, fs::path>> current;
    bool have_current = false;
    for (Stage stage : AllStages()) {
      if (!requested.count(stage)) {
        have_current = false;
        continue;
      }
      StageReport sr;
      sr.stage = stage;
      if (stage == Stage::kIngest) {
        current = RunIngest(sr, report);
      } else {
        if (!have_current) current = ExistingTargets(Previous(stage));
        current = RunChunkStage(stage, current, sr);
      }
      have_current = true;
      report.stages.push_back(std::move(sr));
      report.final_chunks.clear();
      for (const auto &[id, path] : current) {
        if (!path.empty()) report.final_chunks.push_back(path);
      }
    }
    const fs::path report_path = config_.work_dir / config_.language / "run_report.json";
    WriteFileAtomic(report_path, RunReportToJson(report));
    return report;
  }

 private:
  static Stage Previous(Stage stage) { return static_cast<Stage>(static_cast<int>(stage) - 1); }

  std::vector<std::pair<std::string, fs::path>> ExistingTargets(Stage stage) {
    const fs::path dir = StageDir(config_, stage);
    std::vector<std::pair<std::string, fs::path>> out;
    if (stage == Stage::kIngest) {
      const auto manifest = LoadManifest(dir);
      if (!manifest) throw IoError("no ingested chunks in " + dir.string() + "; include the ingest stage");
      for (const auto &p : manifest->chunk_paths) out.emplace_back(ChunkId(p), p);
      return out;
    }
    if (!fs::is_directory(dir)) {
      throw IoError("no " + std::string(StageName(stage)) + " outputs in " + dir.string() +
                    "; include that stage");
    }
    for (const auto &p : ListChunks(dir)) out.emplace_back(ChunkId(p), p);
    return out;
  }

  std::string IngestStamp(const std::vector<fs::path> &prev_chunks) {
    std::string material = "dump " + FileSha256(config_.dump) + "\nchunk_size " + std::to_string(config_.chunk_size);
    for (const auto &p : prev_chunks) material += "\nprevious " + FileSha256(p);
    return Sha256Hex(material);
  }

  std::vector<std::pair<std::string, fs::path>> RunIngest(StageReport &sr, RunReport &report) {
    const fs::path dir = StageDir(config_, Stage::kIngest);
    const fs::path stamp_path = dir / "stamp";
    std::vector<fs::path> prev_chunks;
    if (config_.previous) prev_chunks = ListChunks(*config_.previous);
    const std::string stamp = IngestStamp(prev_chunks);
    auto manifest = LoadManifest(dir);
    if (manifest && fs::exists(stamp_path) && ReadFile(stamp_path) == stamp) {
      sr.skipped = manifest->chunk_paths.size();
    } else {
      ChunkOptions options;
      options.chunk_size = config_.chunk_size;
      options.overwrite = true;
      if (config_.previous) {
        auto delta = DeltaIngest(config_.dump, prev_chunks, dir, config_.language, options);
        manifest = delta.manifest;
        report.delta = std::move(delta.selection);
      } else {
        manifest = IngestDump(config_.dump, dir, config_.language, options).manifest;
      }
      WriteFileAtomic(stamp_path, stamp);
      sr.completed = manifest->chunk_paths.size();
    }
    spdlog::info("ingest: {} chunks ({} skipped)", manifest->chunk_paths.size(), sr.skipped);
    std::vector<std::pair<std::string, fs::path>> out;
    for (const auto &p : manifest->chunk_paths) out.emplace_back(ChunkId(p), p);
    return out;
  }

  std::string Fingerprint(Stage stage) const {
    switch (stage) {
      case Stage::kParse: return "parse\n" + LanguageConfigToJson(language_config_);
      case Stage::kScrape: return "scrape\n" + ScrapePolicyToJson(config_.scrape);
      case Stage::kQuality:
        return "quality\n" + ThresholdsToJson(config_.quality.thresholds) + "\n" +
               config_.quality.endpoint.value_or("heuristic") + "\n" + std::to_string(config_.quality.truncate_chars);
      case Stage::kEnrich: return "enrich\n" + api_endpoint_ + "\n" + config_.language;
      case Stage::kIngest: break;
    }
    return "";
  }

  // Returns the stage warnings for one chunk.
  uint64_t Transform(Stage stage, std::vector<Article> &articles) {
    switch (stage) {
      case Stage::kParse: return static_cast<uint64_t>(ParseArticles(articles, language_config_).warnings);
      case Stage::kScrape: {
        const size_t before = CountErroredCitations(articles);
        ScrapeArticles(articles, config_.scrape, config_.clock);
        const size_t after = CountErroredCitations(articles);
        return after > before ? after - before : 0;
      }
      case Stage::kQuality: return ScoreArticles(articles, config_.quality).fallback_batches;
      case Stage::kEnrich: {
        if (!api_client_) api_client_ = std::make_unique<ActionApiClient>(api_endpoint_, config_.enrich, config_.clock);
        const EnrichReport r = EnrichArticles(articles, config_.language, *api_client_);
        if (r.failed > 0) throw Error(std::to_string(r.failed) + " articles could not be enriched");
        return 0;
      }
      case Stage::kIngest: break;
    }
    return 0;
  }

  std::vector<std::pair<std::string, fs::path>> RunChunkStage(
      Stage stage, const std::vector<std::pair<std::string, fs::path>> &inputs, StageReport &sr) {
    const fs::path dir = StageDir(config_, stage);
    fs::create_directories(dir);
    const std::string fingerprint = Fingerprint(stage);
    std::vector<std::pair<std::string, fs::path>> outputs(inputs.size());
    std::vector<uint64_t> warnings(inputs.size(), 0);
    std::vector<std::string> errors(inputs.size());
    std::vector<char> skipped(inputs.size(), 0);

    auto job = [&](size_t i) {
      const auto &[id, input] = inputs[i];
      outputs[i].first = id;
      if (input.empty()) {
        errors[i] = "input chunk missing after an earlier failure";
        return;
      }
      try {
        const std::string bytes = ReadFile(input);
        const std::string hash = Sha256Hex(bytes + "\n" + fingerprint).substr(0, 16);
        const fs::path target = dir / (id + "." + hash + ".jsonl");
        if (fs::exists(target)) {
          skipped[i] = 1;
          outputs[i].second = target;
          return;
        }
        auto articles = ReadChunk(input);
        warnings[i] = Transform(stage, articles);
        WriteChunkAtomic(target, articles);
        outputs[i].second = target;
      } catch (const std::exception &e) {
        errors[i] = e.what();
      }
    };
    const bool parallel = stage == Stage::kParse || stage == Stage::kQuality;
    ParallelFor(inputs.size(), parallel ? config_.workers : 1, job);

    std::set<fs::path> keep;
    for (size_t i = 0; i < inputs.size(); ++i) {
      sr.warnings += warnings[i];
      if (!errors[i].empty()) {
        ++sr.failed;
        sr.failures.push_back({inputs[i].first, errors[i]});
        spdlog::error("{} {}: {}", StageName(stage), inputs[i].first, errors[i]);
      } else if (skipped[i]) {
        ++sr.skipped;
        keep.insert(outputs[i].second);
      } else {
        ++sr.completed;
        keep.insert(outputs[i].second);
      }
    }
    for (const auto &entry : fs::directory_iterator(dir)) {
      if (IsChunkFile(entry.path()) && !keep.count(entry.path())) fs::remove(entry.path());
    }
    spdlog::info("{}: {} completed, {} skipped, {} failed, {} warnings", StageName(stage), sr.completed, sr.skipped,
                 sr.failed, sr.warnings);
    return outputs;
  }

  const RunConfig &config_;
  LanguageConfig language_config_;
  std::string api_endpoint_;
  std::unique_ptr<ActionApiClient> api_client_;
};

}  // namespace

RunReport RunPipeline(const RunConfig &config) { return PipelineRunner(config).Run(); }

void FetchToFile(const std::string &url, const fs::path &path, double timeout_seconds) {
  const size_t scheme = url.find("://");
  if (scheme == std::string::npos) throw ConfigError("not an absolute URL: " + url);
  const size_t path_start = url.find('/', scheme + 3);
  const std::string origin = path_start == std::string::npos ? url : url.substr(0, path_start);
  const std::string target = path_start == std::string::npos ? "/" : url.substr(path_start);
  httplib::Client client(origin);
  client.set_follow_location(true);
  const auto timeout =
      std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::duration<double>(timeout_seconds));
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);

  if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".part";
  std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + tmp.string());
  auto res = client.Get(target, [&](const char *data, size_t len) {
    out.write(data, static_cast<std::streamsize>(len));
    return static_cast<bool>(out);
  });
  out.close();
  if (!res || res->status != 200) {
    fs::remove(tmp);
    throw IoError("fetching " + url + " failed: " +
                  (res ? "HTTP " + std::to_string(res->status) : httplib::to_string(res.error())));
  }
  fs::rename(tmp, path);
}

}  // namespace mwcorpus
