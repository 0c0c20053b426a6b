#include "mwcorpus/chunk_io.h"

#include <fstream>
#include <sstream>

#include "mwcorpus/errors.h"

namespace mwcorpus {

namespace fs = std::filesystem;

std::vector<std::string> ReadLines(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(std::move(line));
  }
  return lines;
}

std::vector<Article> ReadChunk(const fs::path &path) {
  std::vector<Article> articles;
  const auto lines = ReadLines(path);
  articles.reserve(lines.size());
  for (size_t i = 0; i < lines.size(); ++i) {
    try {
      articles.push_back(DeserializeArticle(lines[i]));
    } catch (const SchemaError &e) {
      throw SchemaError(path.filename().string() + ":" + std::to_string(i + 1) +
                            (e.path().empty() ? "" : ":" + e.path()),
                        e.what());
    }
  }
  return articles;
}

std::string ReadFile(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteFileAtomic(const fs::path &path, std::string_view contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

void WriteLinesAtomic(const fs::path &path, const std::vector<std::string> &lines) {
  std::string contents;
  for (const auto &line : lines) {
    contents += line;
    contents.push_back('\n');
  }
  WriteFileAtomic(path, contents);
}

void WriteChunkAtomic(const fs::path &path, const std::vector<Article> &articles) {
  std::vector<std::string> lines;
  lines.reserve(articles.size());
  for (const auto &a : articles) lines.push_back(SerializeArticle(a));
  WriteLinesAtomic(path, lines);
}

}  // namespace mwcorpus
