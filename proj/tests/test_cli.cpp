#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "vaad/commands.hpp"

namespace vaad {
namespace {

namespace fs = std::filesystem;

const fs::path kSource = VAAD_SOURCE_DIR;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "vaad");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

/// Runs the installed binary through the shell and returns its exit status.
int shell_status(const std::string& args) {
  const std::string cmd = std::string(VAAD_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("vaad_cli_test_" + name);
  fs::remove_all(dir);
  return dir;
}

fs::path write_scenario(const std::string& name, const std::string& body) {
  const fs::path p = fs::temp_directory_path() / ("vaad_cli_" + name + ".json");
  std::ofstream(p) << body;
  return p;
}

const std::string kBasic = (kSource / "scenarios" / "basic_n4.json").string();
const std::string kMixed = (kSource / "scenarios" / "mixed_n7_box.json").string();

TEST(CliExit, BinaryReportsStatusCodes) {
  EXPECT_EQ(shell_status("run --scenario " + kBasic), 0);
  EXPECT_EQ(shell_status("run"), 2);
  EXPECT_EQ(shell_status("--help"), 0);
  EXPECT_EQ(shell_status("sweep --scenario " + kBasic + " --seeds 5..1"), 2);
}

TEST(CliRun, PrintsSummaryAndWritesFiles) {
  const fs::path dir = temp_dir("run");
  const Outcome o = invoke({"run", "--scenario", kBasic, "--out", dir.string(), "--trace", "on"});
  ASSERT_EQ(o.code, cli::kExitOk) << o.err;
  const auto summary = nlohmann::json::parse(o.out);
  EXPECT_TRUE(summary.at("passed").get<bool>());
  EXPECT_TRUE(fs::exists(dir / "summary.json"));
  EXPECT_TRUE(fs::exists(dir / "metrics.csv"));
  EXPECT_TRUE(fs::exists(dir / "trace.jsonl"));
}

TEST(CliRun, ResilienceViolationIsUsageError) {
  const fs::path p = write_scenario("n3", R"({"n":3,"t":1,"m":1,"epsilon":1,"seed":1,"inputs":[[0],[1],[2]]})");
  const Outcome o = invoke({"run", "--scenario", p.string()});
  EXPECT_EQ(o.code, cli::kExitUsage);
  EXPECT_FALSE(o.err.empty());
}

TEST(CliRun, UnknownKeyNamesPath) {
  const fs::path p = write_scenario(
      "unknown", R"({"n":4,"t":1,"m":1,"epsilon":1,"seed":1,"inputs":[[0],[1],[2],[3]],"scheduler":{"kind":"fifo","speed":2}})");
  const Outcome o = invoke({"run", "--scenario", p.string()});
  EXPECT_EQ(o.code, cli::kExitUsage);
  EXPECT_NE(o.err.find("/scheduler/speed"), std::string::npos) << o.err;
}

TEST(CliRun, SeedOverrideChangesTraceNotVerdict) {
  const auto a = nlohmann::json::parse(invoke({"run", "--scenario", kMixed}).out);
  const auto b = nlohmann::json::parse(invoke({"run", "--scenario", kMixed, "--seed", "99"}).out);
  EXPECT_NE(a.at("trace_digest"), b.at("trace_digest"));
  EXPECT_EQ(a.at("passed"), b.at("passed"));
  EXPECT_EQ(b.at("seed").get<int>(), 99);
}

TEST(CliRun, RerunsAreByteIdentical) {
  const fs::path a = temp_dir("rerun_a");
  const fs::path b = temp_dir("rerun_b");
  ASSERT_EQ(invoke({"run", "--scenario", kMixed, "--out", a.string(), "--trace", "on"}).code, 0);
  ASSERT_EQ(invoke({"run", "--scenario", kMixed, "--out", b.string(), "--trace", "on"}).code, 0);
  for (const char* f : {"summary.json", "metrics.csv", "trace.jsonl"}) EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
}

TEST(CliSeeds, RangeParsing) {
  EXPECT_EQ(cli::parse_seed_range("1..20"), (std::pair<std::uint64_t, std::uint64_t>{1, 20}));
  EXPECT_EQ(cli::parse_seed_range("7..7"), (std::pair<std::uint64_t, std::uint64_t>{7, 7}));
  for (const char* bad : {"5..1", "1-20", "..3", "a..b", "1..", ""}) {
    EXPECT_THROW(cli::parse_seed_range(bad), std::exception) << bad;
  }
}

TEST(CliSweep, WritesOneRowPerSeed) {
  const fs::path dir = temp_dir("sweep");
  const Outcome o = invoke({"sweep", "--scenario", kMixed, "--seeds", "1..20", "--out", dir.string()});
  ASSERT_EQ(o.code, 0) << o.err;
  const std::string csv = slurp(dir / "sweep.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 21);
}

std::vector<std::string> pass_column(const std::string& csv) {
  std::vector<std::string> col;
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) col.push_back(line.substr(line.rfind(',') + 1));
  return col;
}

TEST(CliSweep, BroadcastModesAgreeOnVerdicts) {
  const fs::path base = (kSource / "scenarios" / "mixed_n7_box.json");
  auto doc = nlohmann::json::parse(slurp(base));
  doc["broadcast"] = "bracha";
  const fs::path bracha = write_scenario("bracha_mixed", doc.dump());
  const fs::path a = temp_dir("sweep_ideal");
  const fs::path b = temp_dir("sweep_bracha");
  ASSERT_EQ(invoke({"sweep", "--scenario", base.string(), "--seeds", "1..10", "--out", a.string()}).code, 0);
  ASSERT_EQ(invoke({"sweep", "--scenario", bracha.string(), "--seeds", "1..10", "--out", b.string()}).code, 0);
  EXPECT_EQ(pass_column(slurp(a / "sweep.csv")), pass_column(slurp(b / "sweep.csv")));
}

TEST(CliDemo, LowerBoundDemoIsDeterministic) {
  const Outcome a = invoke({"demo-lower-bound", "--n", "3", "--t", "1"});
  const Outcome b = invoke({"demo-lower-bound", "--n", "3", "--t", "1"});
  EXPECT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
}

}  // namespace
}  // namespace vaad
