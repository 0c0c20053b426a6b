#ifndef MWCORPUS_CHUNK_IO_H_
#define MWCORPUS_CHUNK_IO_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mwcorpus/schema.h"

namespace mwcorpus {

// Reads a JSON-lines chunk. Schema errors are rethrown with the file name
// and 1-based line number prepended to the field path.
std::vector<Article> ReadChunk(const std::filesystem::path &path);

std::vector<std::string> ReadLines(const std::filesystem::path &path);

// Writes via a temporary sibling file and rename, so readers never observe a
// partially written chunk.
void WriteChunkAtomic(const std::filesystem::path &path, const std::vector<Article> &articles);
void WriteLinesAtomic(const std::filesystem::path &path, const std::vector<std::string> &lines);
void WriteFileAtomic(const std::filesystem::path &path, std::string_view contents);

std::string ReadFile(const std::filesystem::path &path);

}  // namespace mwcorpus

#endif  // MWCORPUS_CHUNK_IO_H_
