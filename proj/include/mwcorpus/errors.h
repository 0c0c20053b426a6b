#ifndef MWCORPUS_ERRORS_H_
#define MWCORPUS_ERRORS_H_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mwcorpus {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A chunk line that does not conform to the article schema. path() names the
// offending field, e.g. "elements[2].sentences[0].citations[1].char_index".
class SchemaError : public Error {
 public:
  SchemaError(std::string path, const std::string &what)
      : Error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}
  const std::string &path() const { return path_; }

 private:
  std::string path_;
};

class XmlError : public Error {
 public:
  XmlError(uint64_t byte_offset, const std::string &what)
      : Error("malformed XML at byte " + std::to_string(byte_offset) + ": " + what),
        byte_offset_(byte_offset) {}
  uint64_t byte_offset() const { return byte_offset_; }

 private:
  uint64_t byte_offset_;
};

// A remote service answered with something we cannot interpret.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace mwcorpus

#endif  // MWCORPUS_ERRORS_H_
