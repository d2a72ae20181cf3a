#pragma once

// Deterministic discrete-event simulator of the asynchronous network, with
// invariant monitors evaluated over the correct nodes.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "vaad/adversary.hpp"
#include "vaad/broadcast.hpp"
#include "vaad/protocol.hpp"

namespace vaad {

enum class BroadcastMode { Ideal, Bracha };

const char* to_string(BroadcastMode mode);

namespace inputs {

/// Independent uniform samples from the box [lo, hi].
struct UniformBox {
  std::vector<double> lo;
  std::vector<double> hi;
};

/// Uniform samples from the probability simplex.
struct UniformSimplex {};

}  // namespace inputs

/// Either one explicit point per node or a generator driven by the run seed.
using InputSpec = std::variant<std::vector<Point>, inputs::UniformBox, inputs::UniformSimplex>;

struct MonitorToggles {
  bool shrinking_diameter = true;
  bool viewpoint_intersection = true;
  bool initial_diameter = true;
  bool validity = true;
  bool delta_validity = true;
  bool correctness = true;
  bool round_bound = true;
  bool halt_monotonic = true;
  bool liveness = true;
  bool broadcast = true;
};

struct SimConfig {
  ProtocolParams params;
  std::uint64_t seed = 0;
  BroadcastMode broadcast = BroadcastMode::Ideal;
  InputSpec inputs = std::vector<Point>{};
  std::map<NodeId, AdversaryStrategy> adversaries;
  SchedulerPolicy scheduler = sched::Fifo{};
  ValidityPredicate validity = ValidityPredicate::always_true();
  std::uint64_t max_events = 10'000'000;
  /// Allows n <= 3t and raw (non-unique) targeted sends on the ideal channel.
  bool lower_bound_demo = false;
  /// Keep delivering after every correct node has terminated.
  bool run_to_quiescence = false;
  /// Keep the JSONL trace lines in the result (the digest is always computed).
  bool record_trace = false;
  MonitorToggles monitors;
};

struct Violation {
  std::string monitor;
  std::string detail;
};

struct RoundMetrics {
  Round round = 0;
  double diameter_union = 0.0;
  double max_pairwise_output = 0.0;
  std::size_t nodes_terminated = 0;
};

struct SimResult {
  std::vector<Point> inputs;
  std::vector<NodeId> correct;
  std::map<NodeId, Point> outputs;
  std::map<NodeId, Round> final_rounds;
  std::map<NodeId, NodeState> states;  // correct nodes only
  /// Points correct nodes broadcast per round (inputs at round 0, votes after).
  std::map<Round, std::map<NodeId, Point>> correct_votes;
  /// Diameter of everything correct nodes accepted or broadcast for round r, indexed by r.
  std::vector<double> union_diameters;
  std::uint64_t events = 0;
  Time end_time = 0;
  std::string trace_digest;
  std::vector<std::string> trace;
  std::vector<Violation> violations;
  DeliveryLedger deliveries;
  bool all_terminated = false;

  bool passed() const noexcept { return violations.empty(); }
  Round max_round() const;
  double max_pairwise_output() const;
  std::vector<RoundMetrics> metrics() const;
};

/// Checks the configuration without running it. Throws ConfigError.
void validate(const SimConfig& config);

/// The per-node inputs the run will use (explicit or generated from the seed).
std::vector<Point> resolve_inputs(const SimConfig& config);

/// Runs one simulation. Configuration problems throw ConfigError; invariant
/// and liveness failures are reported in SimResult::violations.
SimResult run(const SimConfig& config);

class MonitorFailure : public std::runtime_error {
 public:
  explicit MonitorFailure(const Violation& v) : std::runtime_error(v.monitor + ": " + v.detail), violation_(v) {}
  const Violation& violation() const noexcept { return violation_; }

 private:
  Violation violation_;
};

/// Throws MonitorFailure for the first violation, if any.
void require_passed(const SimResult& result);

std::string metrics_csv(const SimResult& result);

struct SweepRun {
  std::uint64_t seed = 0;
  std::optional<SimResult> result;
  std::string error;  // set when the run threw
};

struct SweepReport {
  std::vector<SweepRun> runs;  // in seed order
  std::map<Round, std::size_t> round_histogram;
  std::vector<double> mean_union_diameter;  // by round, over runs reaching it

  bool all_passed() const;
};

/// Runs `base` once per seed on `workers` threads (0: hardware concurrency).
SweepReport run_sweep(const SimConfig& base, const std::vector<std::uint64_t>& seeds, unsigned workers = 0);

std::string sweep_csv(const SweepReport& report);

/// Scenario separating correct nodes when n <= 3t: two groups with far-apart
/// valid inputs and a two-faced coalition, with cross-group traffic held back.
struct LowerBoundScenario {
  SimConfig config;
  Point v1;
  Point v2;
  std::vector<NodeId> group_a;
  std::vector<NodeId> group_b;
  std::vector<NodeId> byzantine;
};

LowerBoundScenario lower_bound_scenario(std::size_t n, std::size_t t, std::size_t m, double epsilon,
                                        std::uint64_t seed);

/// Groups of correct outputs linked by distance <= epsilon (single linkage).
std::vector<std::vector<NodeId>> output_clusters(const SimResult& result, double epsilon);

/// Shortest round-trip decimal rendering of a double.
std::string format_double(double x);

}  // namespace vaad
