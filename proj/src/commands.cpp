#include "vaad/commands.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "vaad/errors.hpp"
#include "vaad/scenario.hpp"
#include "vaad/sim.hpp"

namespace vaad::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

json point_json(const Point& p) { return std::vector<double>(p.coords().begin(), p.coords().end()); }

json violations_json(const SimResult& r) {
  json list = json::array();
  for (const Violation& v : r.violations) list.push_back({{"monitor", v.monitor}, {"detail", v.detail}});
  return list;
}

json summary_json(const SimConfig& config, const SimResult& r) {
  json outputs = json::object();
  for (const auto& [id, p] : r.outputs) outputs[std::to_string(id)] = point_json(p);
  json rounds = json::object();
  for (const auto& [id, round] : r.final_rounds) rounds[std::to_string(id)] = round;
  return {{"seed", config.seed},
          {"n", config.params.n},
          {"t", config.params.t},
          {"m", config.params.m},
          {"epsilon", config.params.epsilon},
          {"broadcast", to_string(config.broadcast)},
          {"outputs", outputs},
          {"final_rounds", rounds},
          {"max_pairwise_output", r.max_pairwise_output()},
          {"events", r.events},
          {"end_time", r.end_time},
          {"trace_digest", r.trace_digest},
          {"violations", violations_json(r)},
          {"passed", r.passed()}};
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("/output/dir", "cannot write " + path.string());
  f << content;
}

fs::path prepare_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("/output/dir", "cannot create " + dir + ": " + ec.message());
  return fs::path(dir);
}

/// VAAD_MAX_EVENTS, when set, replaces the scenario's event cap.
void apply_environment(SimConfig& config) {
  const char* cap = std::getenv("VAAD_MAX_EVENTS");
  if (cap == nullptr) return;
  const std::string text(cap);
  std::uint64_t value = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size() || value == 0) {
    throw ConfigError("/max_events", "VAAD_MAX_EVENTS must be a positive integer, got '" + text + "'");
  }
  config.max_events = value;
}

template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "error: configuration " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace

std::pair<std::uint64_t, std::uint64_t> parse_seed_range(const std::string& text) {
  const auto dots = text.find("..");
  if (dots == std::string::npos) throw UsageError("seed range must look like A..B, got '" + text + "'");
  auto parse = [&](std::string_view part) {
    std::uint64_t v = 0;
    auto [end, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (part.empty() || ec != std::errc() || end != part.data() + part.size()) {
      throw UsageError("invalid seed '" + std::string(part) + "' in range '" + text + "'");
    }
    return v;
  };
  const std::string_view view(text);
  const std::uint64_t lo = parse(view.substr(0, dots));
  const std::uint64_t hi = parse(view.substr(dots + 2));
  if (lo > hi) throw UsageError("seed range '" + text + "' is empty");
  return {lo, hi};
}

int run_command(const RunOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    Scenario scenario = load_scenario(options.scenario);
    SimConfig& config = scenario.config;
    if (options.seed) config.seed = *options.seed;
    if (options.epsilon) config.params.epsilon = *options.epsilon;
    if (options.broadcast) config.broadcast = *options.broadcast == "bracha" ? BroadcastMode::Bracha : BroadcastMode::Ideal;
    if (options.out) scenario.output_dir = options.out;
    if (options.trace) scenario.trace = *options.trace;
    apply_environment(config);
    config.record_trace = scenario.trace && scenario.output_dir.has_value();

    const SimResult result = run(config);
    const json summary = summary_json(config, result);
    if (scenario.output_dir) {
      const fs::path dir = prepare_dir(*scenario.output_dir);
      write_file(dir / "summary.json", summary.dump(2) + "\n");
      write_file(dir / "metrics.csv", metrics_csv(result));
      if (scenario.trace) {
        std::string lines;
        for (const std::string& line : result.trace) lines += line + "\n";
        write_file(dir / "trace.jsonl", lines);
      }
    }
    out << summary.dump(2) << '\n';
    for (const Violation& v : result.violations) err << "monitor failed: " << v.monitor << ": " << v.detail << '\n';
    return result.passed() ? kExitOk : kExitFailure;
  });
}

int sweep_command(const SweepOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto [lo, hi] = parse_seed_range(options.seeds);
    Scenario scenario = load_scenario(options.scenario);
    apply_environment(scenario.config);
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t s = lo;; ++s) {
      seeds.push_back(s);
      if (s == hi) break;
    }
    const SweepReport report = run_sweep(scenario.config, seeds, options.workers);
    const std::string csv = sweep_csv(report);
    const std::optional<std::string> dir = options.out ? options.out : scenario.output_dir;
    if (dir) write_file(prepare_dir(*dir) / "sweep.csv", csv);
    out << csv;
    for (const SweepRun& run : report.runs) {
      if (!run.error.empty()) err << "run failed: " << run.error << '\n';
      if (run.result) {
        for (const Violation& v : run.result->violations) {
          err << "seed " << run.seed << ": monitor failed: " << v.monitor << ": " << v.detail << '\n';
        }
      }
    }
    return report.all_passed() ? kExitOk : kExitFailure;
  });
}

int demo_lower_bound_command(const DemoOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    auto describe = [](const LowerBoundScenario& s, const SimResult& r, double epsilon) {
      json clusters = json::array();
      for (const auto& c : output_clusters(r, epsilon)) clusters.push_back(c);
      json outputs = json::object();
      for (const auto& [id, p] : r.outputs) outputs[std::to_string(id)] = point_json(p);
      return json{{"n", s.config.params.n},
                  {"t", s.config.params.t},
                  {"v1", point_json(s.v1)},
                  {"v2", point_json(s.v2)},
                  {"group_a", s.group_a},
                  {"group_b", s.group_b},
                  {"byzantine", s.byzantine},
                  {"outputs", outputs},
                  {"clusters", clusters},
                  {"max_pairwise_output", r.max_pairwise_output()},
                  {"violations", violations_json(r)}};
    };

    const LowerBoundScenario demo =
        lower_bound_scenario(options.n, options.t, options.m, options.epsilon, options.seed);
    const SimResult result = run(demo.config);
    json report = describe(demo, result, options.epsilon);
    report["epsilon"] = options.epsilon;
    report["seed"] = options.seed;

    bool expected = false;
    if (options.n <= 3 * options.t) {
      expected = result.all_terminated && result.max_pairwise_output() > options.epsilon;
      report["expectation"] = "outputs separated by more than epsilon";

      const LowerBoundScenario contrast =
          lower_bound_scenario(3 * options.t + 1, options.t, options.m, options.epsilon, options.seed);
      const SimResult contrast_result = run(contrast.config);
      report["contrast"] = describe(contrast, contrast_result, options.epsilon);
      report["contrast"]["passed"] = contrast_result.passed();
      expected = expected && contrast_result.passed();
    } else {
      expected = result.passed();
      report["expectation"] = "all monitors pass";
    }
    report["as_expected"] = expected;

    if (options.out) write_file(prepare_dir(*options.out) / "lower_bound.json", report.dump(2) + "\n");
    out << report.dump(2) << '\n';
    if (!expected) err << "lower-bound demonstration did not behave as expected\n";
    return expected ? kExitOk : kExitFailure;
  });
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Byzantine asynchronous multidimensional approximate agreement simulator", "vaad"};
  app.require_subcommand(1);

  RunOptions run_opts;
  std::string broadcast;
  std::string trace;
  auto* run_cmd = app.add_subcommand("run", "Run one scenario");
  run_cmd->add_option("--scenario", run_opts.scenario, "Scenario JSON file")->required();
  run_cmd->add_option("--seed", run_opts.seed, "Override the scenario seed");
  run_cmd->add_option("--epsilon", run_opts.epsilon, "Override the agreement distance")
      ->check(CLI::PositiveNumber);
  run_cmd->add_option("--broadcast", broadcast, "ideal or bracha")->check(CLI::IsMember({"ideal", "bracha"}));
  run_cmd->add_option("--out", run_opts.out, "Directory for summary, metrics and trace");
  run_cmd->add_option("--trace", trace, "on or off")->check(CLI::IsMember({"on", "off"}));

  SweepOptions sweep_opts;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a scenario over a range of seeds");
  sweep_cmd->add_option("--scenario", sweep_opts.scenario, "Scenario JSON file")->required();
  sweep_cmd->add_option("--seeds", sweep_opts.seeds, "Inclusive range A..B")->required();
  sweep_cmd->add_option("--out", sweep_opts.out, "Directory for sweep.csv");
  sweep_cmd->add_option("--workers", sweep_opts.workers, "Worker threads (0: all cores)");

  DemoOptions demo_opts;
  auto* demo_cmd = app.add_subcommand("demo-lower-bound", "Show that n <= 3t admits no solution");
  demo_cmd->add_option("--n", demo_opts.n, "Number of nodes")->capture_default_str();
  demo_cmd->add_option("--t", demo_opts.t, "Byzantine bound")->capture_default_str();
  demo_cmd->add_option("--m", demo_opts.m, "Dimension")->capture_default_str();
  demo_cmd->add_option("--epsilon", demo_opts.epsilon, "Agreement distance")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  demo_cmd->add_option("--seed", demo_opts.seed, "Seed for the sampled inputs")->capture_default_str();
  demo_cmd->add_option("--out", demo_opts.out, "Directory for lower_bound.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  if (*run_cmd) {
    if (!broadcast.empty()) run_opts.broadcast = broadcast;
    if (!trace.empty()) run_opts.trace = trace == "on";
    return run_command(run_opts, out, err);
  }
  if (*sweep_cmd) {
    try {
      parse_seed_range(sweep_opts.seeds);
    } catch (const UsageError& e) {
      err << "error: " << e.what() << '\n';
      return kExitUsage;
    }
    return sweep_command(sweep_opts, out, err);
  }
  return demo_lower_bound_command(demo_opts, out, err);
}

}  // namespace vaad::cli
