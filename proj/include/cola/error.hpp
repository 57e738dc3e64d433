#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cola {

/// Malformed input file. Carries the 1-based line that failed, 0 when the
/// failure is not tied to a line (truncated binary cache, bad header).
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : std::runtime_error(path + (line ? ":" + std::to_string(line) : std::string()) + ": " + what),
        path_(path), line_(line) {}

  const std::string& path() const noexcept { return path_; }
  std::size_t line() const noexcept { return line_; }

private:
  std::string path_;
  std::size_t line_;
};

class IoError : public std::runtime_error {
public:
  IoError(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(path) {}

  const std::string& path() const noexcept { return path_; }

private:
  std::string path_;
};

/// A NaN or infinity showed up during training or scoring.
class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace cola
