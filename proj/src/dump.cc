#include "mwcorpus/dump.h"

#include <expat.h>
#include <openssl/evp.h>

#include <array>
#include <boost/iostreams/filter/bzip2.hpp>
#include <boost/iostreams/filter/gzip.hpp>
#include <boost/iostreams/filtering_stream.hpp>
#include <cstdio>
#include <deque>
#include <fstream>

#include "json.hpp"
#include "mwcorpus/chunk_io.h"
#include "mwcorpus/errors.h"
#include "mwcorpus/utf8.h"

namespace mwcorpus {

namespace fs = std::filesystem;
namespace io = boost::iostreams;

// ---------------------------------------------------------------------------
// PageReader

struct PageReader::Impl {
  enum class Field { kNone, kTitle, kTimestamp, kText };

  std::istream &in;
  XML_Parser parser = nullptr;
  std::deque<RawPage> ready;
  bool finished = false;
  uint64_t consumed = 0;
  uint64_t next_position = 0;

  // Element path from the root, as local names.
  std::vector<std::string> stack;
  bool in_page = false;
  RawPage page;
  Field field = Field::kNone;
  std::string buffer;

  explicit Impl(std::istream &xml) : in(xml) {
    parser = XML_ParserCreate("UTF-8");
    XML_SetUserData(parser, this);
    XML_SetElementHandler(parser, &Impl::OnStart, &Impl::OnEnd);
    XML_SetCharacterDataHandler(parser, &Impl::OnText);
  }
  ~Impl() { XML_ParserFree(parser); }

  static std::string LocalName(const XML_Char *name) {
    std::string s(name);
    auto colon = s.rfind(':');
    return colon == std::string::npos ? s : s.substr(colon + 1);
  }

  const std::string &Parent() const {
    static const std::string kEmpty;
    return stack.size() >= 2 ? stack[stack.size() - 2] : kEmpty;
  }

  static void XMLCALL OnStart(void *data, const XML_Char *name, const XML_Char **) {
    auto *self = static_cast<Impl *>(data);
    self->stack.push_back(LocalName(name));
    const std::string &tag = self->stack.back();
    const std::string &parent = self->Parent();
    if (tag == "page") {
      self->in_page = true;
      self->page = RawPage{};
      return;
    }
    if (!self->in_page) return;
    if (tag == "title" && parent == "page") {
      self->field = Field::kTitle;
    } else if (tag == "timestamp" && parent == "revision") {
      self->field = Field::kTimestamp;
    } else if (tag == "text" && parent == "revision") {
      self->field = Field::kText;
    } else {
      return;
    }
    self->buffer.clear();
  }

  static void XMLCALL OnEnd(void *data, const XML_Char *) {
    auto *self = static_cast<Impl *>(data);
    const std::string tag = self->stack.back();
    if (self->in_page) {
      if (tag == "page") {
        self->page.dump_position = self->next_position++;
        self->ready.push_back(std::move(self->page));
        self->page = RawPage{};
        self->in_page = false;
      } else if (self->field != Field::kNone) {
        switch (self->field) {
          case Field::kTitle: self->page.title = std::move(self->buffer); break;
          case Field::kTimestamp: self->page.last_revision = std::move(self->buffer); break;
          case Field::kText: self->page.wikicode = std::move(self->buffer); break;
          case Field::kNone: break;
        }
        self->buffer.clear();
        self->field = Field::kNone;
      }
    }
    self->stack.pop_back();
  }

  static void XMLCALL OnText(void *data, const XML_Char *text, int len) {
    auto *self = static_cast<Impl *>(data);
    if (self->field != Field::kNone) self->buffer.append(text, static_cast<size_t>(len));
  }

  void Fail() {
    throw XmlError(static_cast<uint64_t>(XML_GetCurrentByteIndex(parser)),
                   XML_ErrorString(XML_GetErrorCode(parser)));
  }

  // Feeds one block of input; returns false once the document is complete.
  bool Feed() {
    std::array<char, 1 << 16> block{};
    in.read(block.data(), block.size());
    const std::streamsize got = in.gcount();
    const bool last = got < static_cast<std::streamsize>(block.size());
    consumed += static_cast<uint64_t>(got);
    if (XML_Parse(parser, block.data(), static_cast<int>(got), last ? 1 : 0) == XML_STATUS_ERROR) {
      Fail();
    }
    return !last;
  }
};

PageReader::PageReader(std::istream &xml) : impl_(std::make_unique<Impl>(xml)) {}
PageReader::~PageReader() = default;

std::optional<RawPage> PageReader::Next() {
  while (impl_->ready.empty() && !impl_->finished) {
    if (!impl_->Feed()) impl_->finished = true;
  }
  if (impl_->ready.empty()) return std::nullopt;
  RawPage page = std::move(impl_->ready.front());
  impl_->ready.pop_front();
  return page;
}

uint64_t PageReader::bytes_consumed() const { return impl_->consumed; }

// ---------------------------------------------------------------------------
// Compressed input

Compression SniffCompression(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dump " + path.string());
  unsigned char magic[3] = {0, 0, 0};
  in.read(reinterpret_cast<char *>(magic), 3);
  const auto n = in.gcount();
  if (n >= 2 && magic[0] == 0x1F && magic[1] == 0x8B) return Compression::kGzip;
  if (n >= 3 && magic[0] == 'B' && magic[1] == 'Z' && magic[2] == 'h') return Compression::kBzip2;
  return Compression::kNone;
}

struct DumpInput::Impl {
  std::ifstream file;
  io::filtering_istream filtered;
};

DumpInput::DumpInput(const fs::path &path)
    : impl_(std::make_unique<Impl>()), compression_(SniffCompression(path)) {
  impl_->file.open(path, std::ios::binary);
  if (!impl_->file) throw IoError("cannot open dump " + path.string());
  switch (compression_) {
    case Compression::kGzip: impl_->filtered.push(io::gzip_decompressor()); break;
    case Compression::kBzip2: impl_->filtered.push(io::bzip2_decompressor()); break;
    case Compression::kNone: break;
  }
  impl_->filtered.push(impl_->file);
}

DumpInput::~DumpInput() = default;

std::istream &DumpInput::stream() { return impl_->filtered; }

// ---------------------------------------------------------------------------
// Filtering

namespace {

bool ContainsFolded(std::string_view haystack, std::string_view needle) {
  auto lower = [](char c) { return static_cast<char>(c >= 'A' && c <= 'Z' ? c + 32 : c); };
  if (needle.size() > haystack.size()) return false;
  for (size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
    size_t j = 0;
    while (j < needle.size() && lower(haystack[i + j]) == needle[j]) ++j;
    if (j == needle.size()) return true;
  }
  return false;
}

}  // namespace

bool ShouldFilter(const RawPage &page) {
  return ContainsFolded(page.wikicode, "#redirect") ||
         ContainsFolded(page.wikicode, "{{website-stub}}") ||
         page.title.find("Category:") != std::string::npos;
}

// ---------------------------------------------------------------------------
// Chunk writing

std::string ChunkFileName(size_t index) {
  char name[32];
  std::snprintf(name, sizeof(name), "chunk_%05zu.jsonl", index);
  return name;
}

Article SkeletonArticle(const RawPage &page) {
  Article a;
  a.title = utf8::Sanitize(page.title);
  a.wikicode = utf8::Sanitize(page.wikicode);
  a.hash = ComputeHash(a.title, a.wikicode);
  a.last_revision = page.last_revision;
  return a;
}

fs::path ManifestPath(const fs::path &out_dir) { return out_dir / "manifest.json"; }

namespace {

void SaveManifest(const fs::path &out_dir, const ChunkManifest &manifest) {
  nlohmann::ordered_json j;
  j["language"] = manifest.language;
  j["article_count"] = manifest.article_count;
  j["chunk_paths"] = nlohmann::ordered_json::array();
  for (const auto &p : manifest.chunk_paths) j["chunk_paths"].push_back(p.filename().string());
  j["source_sha256"] = manifest.source_sha256;
  WriteFileAtomic(ManifestPath(out_dir), j.dump(2) + "\n");
}

}  // namespace

std::optional<ChunkManifest> LoadManifest(const fs::path &out_dir) {
  const fs::path path = ManifestPath(out_dir);
  if (!fs::exists(path)) return std::nullopt;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ReadFile(path));
    ChunkManifest m;
    m.language = j.at("language").get<std::string>();
    m.article_count = j.at("article_count").get<uint64_t>();
    for (const auto &name : j.at("chunk_paths")) m.chunk_paths.push_back(out_dir / name.get<std::string>());
    m.source_sha256 = j.value("source_sha256", "");
    return m;
  } catch (const nlohmann::json::exception &e) {
    throw IoError("corrupt manifest " + path.string() + ": " + e.what());
  }
}

ChunkManifest WriteChunkLines(const LineSource &lines_in, const fs::path &out_dir,
                              const std::string &language, const ChunkOptions &options) {
  if (options.chunk_size == 0) throw ConfigError("chunk_size must be positive");
  if (fs::exists(ManifestPath(out_dir)) && !options.overwrite) {
    throw IoError("chunks already written to " + out_dir.string() + " (manifest exists)");
  }
  fs::create_directories(out_dir);
  if (options.overwrite) {
    for (const auto &entry : fs::directory_iterator(out_dir)) {
      const auto name = entry.path().filename().string();
      if (name.rfind("chunk_", 0) == 0 && entry.path().extension() == ".jsonl") fs::remove(entry.path());
    }
  }

  ChunkManifest manifest;
  manifest.language = language;
  manifest.source_sha256 = options.source_sha256;
  std::vector<std::string> lines;
  auto flush = [&]() {
    if (lines.empty()) return;
    const fs::path path = out_dir / ChunkFileName(manifest.chunk_paths.size());
    WriteLinesAtomic(path, lines);
    manifest.chunk_paths.push_back(path);
    lines.clear();
  };
  while (auto line = lines_in()) {
    lines.push_back(std::move(*line));
    ++manifest.article_count;
    if (lines.size() == options.chunk_size) flush();
  }
  flush();
  SaveManifest(out_dir, manifest);
  return manifest;
}

ChunkManifest WriteChunks(const PageSource &pages, const fs::path &out_dir,
                          const std::string &language, const ChunkOptions &options) {
  return WriteChunkLines(
      [&]() -> std::optional<std::string> {
        auto page = pages();
        if (!page) return std::nullopt;
        return SerializeArticle(SkeletonArticle(*page));
      },
      out_dir, language, options);
}

ChunkManifest WriteChunks(const std::vector<RawPage> &pages, const fs::path &out_dir,
                          const std::string &language, const ChunkOptions &options) {
  size_t next = 0;
  return WriteChunks(
      [&]() -> std::optional<RawPage> {
        if (next >= pages.size()) return std::nullopt;
        return pages[next++];
      },
      out_dir, language, options);
}

std::string FileSha256(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  EVP_MD_CTX *ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::array<char, 1 << 16> block{};
  while (in) {
    in.read(block.data(), block.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, block.data(), static_cast<size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest.data(), &len);
  EVP_MD_CTX_free(ctx);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

IngestReport IngestDump(const fs::path &dump, const fs::path &out_dir, const std::string &language,
                        const ChunkOptions &options) {
  ChunkOptions opts = options;
  if (opts.source_sha256.empty()) opts.source_sha256 = FileSha256(dump);
  DumpInput input(dump);
  PageReader reader(input.stream());
  IngestReport report;
  report.manifest = WriteChunks(
      [&]() -> std::optional<RawPage> {
        while (auto page = reader.Next()) {
          ++report.pages_read;
          if (ShouldFilter(*page)) {
            ++report.pages_filtered;
            continue;
          }
          return page;
        }
        return std::nullopt;
      },
      out_dir, language, opts);
  return report;
}

}  // namespace mwcorpus
