#ifndef MWCORPUS_DUMP_H_
#define MWCORPUS_DUMP_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <istream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mwcorpus/schema.h"

namespace mwcorpus {

// One <page> of a pages-articles dump.
struct RawPage {
  std::string title;
  std::string wikicode;
  std::string last_revision;
  uint64_t dump_position = 0;

  bool operator==(const RawPage &) const = default;
};

// Streaming pull reader over uncompressed MediaWiki export XML. Memory use is
// bounded by the largest single page, not by the dump.
class PageReader {
 public:
  explicit PageReader(std::istream &xml);
  ~PageReader();
  PageReader(const PageReader &) = delete;
  PageReader &operator=(const PageReader &) = delete;

  // Next page in document order, or nullopt at the end of the document.
  // Throws XmlError carrying the byte offset of malformed input.
  std::optional<RawPage> Next();

  uint64_t bytes_consumed() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

enum class Compression { kNone, kGzip, kBzip2 };

Compression SniffCompression(const std::filesystem::path &path);

// Opens a dump file for reading, transparently decompressing gzip and bzip2
// (including multistream bzip2) according to the file's magic bytes.
class DumpInput {
 public:
  explicit DumpInput(const std::filesystem::path &path);
  ~DumpInput();
  DumpInput(const DumpInput &) = delete;
  DumpInput &operator=(const DumpInput &) = delete;

  std::istream &stream();
  Compression compression() const { return compression_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  Compression compression_;
};

// Redirects, website stubs and category pages are dropped before chunking.
bool ShouldFilter(const RawPage &page);

inline constexpr size_t kChunkSize = 1000;

struct ChunkManifest {
  std::string language;
  std::vector<std::filesystem::path> chunk_paths;
  uint64_t article_count = 0;
  // Sha256Hex of the dump file the chunks were produced from, if known.
  std::string source_sha256;

  bool operator==(const ChunkManifest &) const = default;
};

std::string ChunkFileName(size_t index);  // chunk_00000.jsonl

// Skeleton article for a page: title, wikicode, hash, last_revision.
Article SkeletonArticle(const RawPage &page);

using PageSource = std::function<std::optional<RawPage>()>;

struct ChunkOptions {
  size_t chunk_size = kChunkSize;
  bool overwrite = false;
  std::string source_sha256;
};

// Writes skeleton articles to out_dir/chunk_%05d.jsonl, chunk_size per file
// (the last one may be smaller), preserving order, followed by
// out_dir/manifest.json. Refuses to run when a manifest already exists
// unless options.overwrite is set.
ChunkManifest WriteChunks(const PageSource &pages, const std::filesystem::path &out_dir,
                          const std::string &language, const ChunkOptions &options = {});
ChunkManifest WriteChunks(const std::vector<RawPage> &pages, const std::filesystem::path &out_dir,
                          const std::string &language, const ChunkOptions &options = {});

// Same layout for already serialized article lines.
using LineSource = std::function<std::optional<std::string>()>;
ChunkManifest WriteChunkLines(const LineSource &lines, const std::filesystem::path &out_dir,
                              const std::string &language, const ChunkOptions &options = {});

std::filesystem::path ManifestPath(const std::filesystem::path &out_dir);
std::optional<ChunkManifest> LoadManifest(const std::filesystem::path &out_dir);

struct IngestReport {
  ChunkManifest manifest;
  uint64_t pages_read = 0;
  uint64_t pages_filtered = 0;
};

// Stream, filter and chunk a dump file in one pass.
IngestReport IngestDump(const std::filesystem::path &dump, const std::filesystem::path &out_dir,
                        const std::string &language, const ChunkOptions &options = {});

// Sha256Hex of a file's bytes, streamed.
std::string FileSha256(const std::filesystem::path &path);

}  // namespace mwcorpus

#endif  // MWCORPUS_DUMP_H_
