#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vaad {

/// Caller violated a documented precondition (bad dimensions, empty sets,
/// protocol misuse such as starting a node twice).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed wire bytes. `offset()` is the position where decoding stopped.
class DecodeError : public std::runtime_error {
 public:
  DecodeError(std::size_t offset, const std::string& what)
      : std::runtime_error("decode error at byte " + std::to_string(offset) + ": " + what),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Invalid scenario or simulator configuration. `path()` names the offending
/// field as a JSON pointer-like path (e.g. "/adversaries/0/strategy").
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace vaad
