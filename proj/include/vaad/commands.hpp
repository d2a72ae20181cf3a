#pragma once

// Command-line front end. Exit codes: 0 success, 1 a monitor or expectation
// failed, 2 usage or configuration error.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>

namespace vaad::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

struct RunOptions {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::optional<double> epsilon;
  std::optional<std::string> broadcast;
  std::optional<std::string> out;
  std::optional<bool> trace;
};

struct SweepOptions {
  std::string scenario;
  std::string seeds;  // "A..B", inclusive
  std::optional<std::string> out;
  unsigned workers = 0;
};

struct DemoOptions {
  std::size_t n = 3;
  std::size_t t = 1;
  std::size_t m = 2;
  double epsilon = 0.5;
  std::uint64_t seed = 1;
  std::optional<std::string> out;
};

/// Parses "A..B" (A <= B). Throws UsageError.
std::pair<std::uint64_t, std::uint64_t> parse_seed_range(const std::string& text);

int run_command(const RunOptions& options, std::ostream& out, std::ostream& err);
int sweep_command(const SweepOptions& options, std::ostream& out, std::ostream& err);
int demo_lower_bound_command(const DemoOptions& options, std::ostream& out, std::ostream& err);

/// Full command line dispatch.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace vaad::cli
