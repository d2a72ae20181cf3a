#pragma once

// Per-node state machine of the validated asynchronous approximate agreement
// protocol. The blocking main loop is recast as transitions: every delivered
// message is handled and then the waiting queues are drained to a fixpoint.
//
// Round structure (witness technique):
//   round 0   init values are validated with ex_val; once n - t reports of
//             round-0 views are covered the node computes its first vote
//             (mean of the view after eliminating t furthest pairs) and an
//             estimate of the rounds needed, broadcast as "enough".
//   round r   broadcast (vote, values[r-1], reports[r-1]); accept others'
//             votes only if they are provably computed from accepted data;
//             report the first n - t accepted votes; advance when n - t
//             reports are covered.
// A node terminates once r >= halt, the (t+1)-th smallest received estimate.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "vaad/geometry.hpp"
#include "vaad/messages.hpp"
#include "vaad/validity.hpp"

namespace vaad {

struct ProtocolParams {
  std::size_t n = 4;
  std::size_t t = 1;
  std::size_t m = 1;
  double epsilon = 1.0;
};

/// Whether the node constructor insists on n >= 3t + 1. Only the lower-bound
/// demonstration runs with Unchecked.
enum class Resilience { Enforced, Unchecked };

enum class Phase { Init, Running, Terminated };

const char* to_string(Phase phase);

struct PendingValue {
  NodeId sender;
  ValueMsg msg;
};

struct PendingReport {
  NodeId sender;
  ReportMsg msg;
};

struct NodeState {
  NodeId id = 0;
  ProtocolParams params;
  Round r = 0;
  std::map<Round, AttributedSet> values;
  std::map<Round, ReportSet> reports;
  std::vector<PendingValue> waiting_values;
  std::vector<PendingReport> waiting_reports;
  std::multiset<std::uint64_t> termination_times;
  std::set<NodeId> enough_senders;
  std::optional<std::uint64_t> halt;  // unset means infinity
  std::optional<Point> current_vote;
  Phase phase = Phase::Init;
  std::set<Round> report_sent;
  std::optional<Point> output;
  bool started = false;

  // Observations kept for the simulator's invariant monitors.
  std::optional<std::uint64_t> enough;      // own round estimate
  std::optional<double> init_diameter;      // diameter(values[0]) when the estimate was made
  std::vector<std::uint64_t> halt_history;  // every value halt took, in order
  /// rec_vals of every accepted Value message, by round then sender.
  std::map<Round, std::map<NodeId, AttributedSet>> value_views;

  /// values[round], or an empty set.
  const AttributedSet& values_at(Round round) const;
  const ReportSet& reports_at(Round round) const;
};

enum class NodeEventKind { AcceptValue, AcceptReport, Reject, Send, RoundAdvance, HaltUpdate, Terminate };

const char* to_string(NodeEventKind kind);

/// Trace record emitted by a transition.
struct NodeEvent {
  NodeEventKind kind;
  Round round = 0;
  /// Sender of an accepted/rejected message; the node itself otherwise.
  NodeId subject = 0;
  MessageKind message_kind = MessageKind::InitValue;
  /// diameter(values[round]) after an acceptance.
  std::optional<double> diameter;
  std::optional<std::uint64_t> halt;
};

struct StepOutput {
  std::vector<ProtocolMessage> outgoing;
  std::optional<Point> delivered_output;
  bool state_changed = false;
  std::vector<NodeEvent> events;
};

/// max(1, ceil(log2(3 * diameter / epsilon)) + 1); 1 when diameter is 0.
std::uint64_t enough_estimate(double diameter, double epsilon);

/// Number of furthest pairs to eliminate from a set of `size` points: t, reduced
/// only when fewer than 2t + 1 points exist (possible only with n <= 3t).
std::size_t elimination_count(std::size_t t, std::size_t size);

/// Tolerance of the round-1 hull check: 1e-9 * max(1, diameter(rec_vals)).
double hull_tolerance(const AttributedSet& rec_vals);

/// Checks that depend only on the message: size guards, reports covered by
/// rec_vals, and the vote check (hull membership for round 1, bit-exact mean
/// otherwise). A message failing these can never become ready.
bool value_message_consistent(const ProtocolParams& params, const ValueMsg& msg);

bool value_message_ready(const NodeState& state, const ValueMsg& msg, NodeId sender);
bool report_message_ready(const NodeState& state, const ReportMsg& msg, NodeId sender);

/// One honest node. Single owner; every call is a deterministic transition.
class Node {
 public:
  /// Throws UsageError on invalid parameters, including n < 3t + 1 when
  /// resilience is enforced.
  Node(NodeId id, ProtocolParams params, ValidityPredicate ex_val,
       Resilience resilience = Resilience::Enforced);

  const NodeState& state() const noexcept { return state_; }
  const ValidityPredicate& predicate() const noexcept { return ex_val_; }

  /// Broadcasts the init value. Throws UsageError if called twice or if the
  /// input has the wrong dimension.
  StepOutput start(const Point& input);

  /// Dispatches a delivered broadcast. Terminated nodes ignore everything.
  StepOutput deliver(NodeId sender, const ProtocolMessage& msg);

  StepOutput on_init_value(NodeId sender, const Point& v);
  StepOutput on_enough(NodeId sender, std::uint64_t e);
  StepOutput on_value(NodeId sender, ValueMsg msg);
  StepOutput on_report(NodeId sender, ReportMsg msg);
  StepOutput drain_waiting();

 private:
  void drain(StepOutput& out);
  void broadcast(StepOutput& out, ProtocolMessage msg);
  void maybe_report(StepOutput& out, Round round);
  void maybe_estimate(StepOutput& out);
  bool maybe_leave_init(StepOutput& out);
  bool maybe_advance(StepOutput& out);
  bool maybe_terminate(StepOutput& out);

  NodeState state_;
  ValidityPredicate ex_val_;
};

}  // namespace vaad
