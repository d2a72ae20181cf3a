#pragma once

// Participants hosted by the simulator (honest nodes and Byzantine strategies)
// and the adversarial message scheduler.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "vaad/protocol.hpp"

namespace vaad {

using Time = std::uint64_t;

/// A message a participant wants to put on the channel.
struct Emission {
  ProtocolMessage msg;
  /// Empty: broadcast to everyone. Otherwise the intended recipients; an ideal
  /// channel that enforces uniqueness still delivers the first payload per slot to all.
  std::optional<std::vector<NodeId>> recipients;
  /// Sender slot; empty means the emitting participant. A Byzantine coalition
  /// may emit on behalf of any of its members.
  std::optional<NodeId> sender;
};

struct Reaction {
  std::vector<Emission> emissions;
  std::vector<NodeEvent> events;
  std::optional<Point> output;
};

class Participant {
 public:
  virtual ~Participant() = default;

  virtual Reaction start() = 0;
  virtual Reaction deliver(NodeId from, const ProtocolMessage& msg) = 0;

  virtual bool correct() const noexcept { return false; }
  /// Whether the node takes part in echo/ready relaying of the Bracha layer.
  virtual bool relays() const noexcept { return true; }
  /// The protocol state machine for honest participants, null otherwise.
  virtual const Node* node() const noexcept { return nullptr; }
  virtual std::string describe() const = 0;
};

class HonestParticipant final : public Participant {
 public:
  HonestParticipant(Node node, Point input) : node_(std::move(node)), input_(std::move(input)) {}

  Reaction start() override;
  Reaction deliver(NodeId from, const ProtocolMessage& msg) override;
  bool correct() const noexcept override { return true; }
  const Node* node() const noexcept override { return &node_; }
  std::string describe() const override { return "honest"; }

 private:
  Node node_;
  Point input_;
};

namespace strategy {

/// Sends nothing, relays nothing.
struct Silent {};
/// Honest up to and including `after_round`, then silent.
struct Crash {
  Round after_round = 0;
};
/// Honest protocol started from a chosen (valid) extreme input.
struct ExtremeHonest {
  Point target;
};
/// Broadcasts an init value failing ex_val, then follows the protocol.
struct InvalidInput {
  Point v;
};
/// Follows the protocol but shifts every broadcast vote by `perturbation`.
struct ForgedVote {
  Point perturbation;
};
/// Legal worst case: picks the reports and values it cites (and its round-1
/// vote) to maximize the vote's projection on `bias`.
struct SkewedSubset {
  Point bias;
};
/// Sends `first` to the lower half of the nodes and `second` to the upper
/// half; both must share a broadcast tag. Silent otherwise.
struct Equivocator {
  ProtocolMessage first;
  ProtocolMessage second;
};
/// Two-faced coalition member: behaves as an honest node with `input_a`
/// towards `group_a` and as one with `input_b` towards `group_b`.
struct Mirror {
  std::vector<NodeId> group_a;
  std::vector<NodeId> group_b;
  Point input_a;
  Point input_b;
};

}  // namespace strategy

using AdversaryStrategy = std::variant<strategy::Silent, strategy::Crash, strategy::ExtremeHonest,
                                       strategy::InvalidInput, strategy::ForgedVote, strategy::SkewedSubset,
                                       strategy::Equivocator, strategy::Mirror>;

std::string strategy_name(const AdversaryStrategy& s);

struct ParticipantSetup {
  ProtocolParams params;
  ValidityPredicate predicate;
  std::vector<Point> inputs;  // one per node; Byzantine slots use theirs as the honest baseline
  std::map<NodeId, AdversaryStrategy> adversaries;
  Resilience resilience = Resilience::Enforced;
};

/// Builds one participant per node. Mirror nodes share a single coalition.
/// Throws UsageError on inconsistent strategies (wrong dimensions, mismatched
/// equivocation tags).
std::vector<std::unique_ptr<Participant>> make_participants(const ParticipantSetup& setup);

namespace sched {

/// Delivery one tick after sending.
struct Fifo {};
/// Uniform delay in [1, max_delay].
struct RandomDelay {
  std::uint64_t max_delay = 10;
};
/// Messages from or to a victim take `delay_factor` ticks, others one tick.
struct TargetedDelay {
  std::set<NodeId> victims;
  std::uint64_t delay_factor = 10;
};
/// Messages between different groups arrive exactly at `release_time` (or one
/// tick after sending, if later). Nodes outside every group are unaffected.
struct PartitionUntil {
  std::vector<std::vector<NodeId>> groups;
  Time release_time = 100;
};

}  // namespace sched

using SchedulerPolicy = std::variant<sched::Fifo, sched::RandomDelay, sched::TargetedDelay, sched::PartitionUntil>;

std::string policy_name(const SchedulerPolicy& p);

struct SendEvent {
  Time send_time = 0;
  NodeId src = 0;
  NodeId dst = 0;
  std::uint64_t seq = 0;
};

/// Assigns finite delivery times. Deterministic given the policy, the seed and
/// the order of calls.
class Scheduler {
 public:
  Scheduler(SchedulerPolicy policy, std::uint64_t seed);

  Time delivery_time(const SendEvent& event);
  const SchedulerPolicy& policy() const noexcept { return policy_; }

 private:
  SchedulerPolicy policy_;
  std::mt19937_64 rng_;
  std::map<NodeId, std::size_t> group_of_;
};

}  // namespace vaad
