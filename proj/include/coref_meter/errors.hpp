#pragma once

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace corefmeter {

/// Bad or missing input. The CLI maps this to exit code 1.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed file content, located by file, line and column (both 1-based;
/// column 0 means "whole line").
class ParseError : public InputError {
 public:
  ParseError(std::string file, std::size_t line, std::size_t column, const std::string& message);

  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  const std::string& message() const { return message_; }

 private:
  std::string file_;
  std::size_t line_;
  std::size_t column_;
  std::string message_;
};

/// An internal invariant did not hold. The CLI maps this to exit code 2.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Collects non-fatal warnings and named counters produced while parsing or
/// scoring. Not thread-safe; give each worker its own and merge.
struct Diagnostics {
  std::vector<std::string> warnings;
  std::map<std::string, std::size_t> counters;

  void warn(std::string message) { warnings.push_back(std::move(message)); }
  void count(const std::string& key, std::size_t n = 1) { counters[key] += n; }
  void merge(const Diagnostics& other);
};

}  // namespace corefmeter
