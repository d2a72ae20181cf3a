#include "vaad/protocol.hpp"

#include <cmath>
#include <iterator>
#include <limits>
#include <string>

#include "vaad/errors.hpp"

namespace vaad {

namespace {

const AttributedSet kEmptyValues{};
const ReportSet kEmptyReports{};

bool value_message_current(const NodeState& state, const ValueMsg& msg) {
  return state.r >= msg.round && msg.rec_vals.is_subset_of(state.values_at(msg.round - 1)) &&
         msg.rec_reps.is_subset_of(state.reports_at(msg.round - 1));
}

}  // namespace

const char* to_string(Phase phase) {
  switch (phase) {
    case Phase::Init: return "init";
    case Phase::Running: return "running";
    case Phase::Terminated: return "terminated";
  }
  return "unknown";
}

const char* to_string(NodeEventKind kind) {
  switch (kind) {
    case NodeEventKind::AcceptValue: return "accept_value";
    case NodeEventKind::AcceptReport: return "accept_report";
    case NodeEventKind::Reject: return "reject";
    case NodeEventKind::Send: return "send";
    case NodeEventKind::RoundAdvance: return "round_advance";
    case NodeEventKind::HaltUpdate: return "halt_update";
    case NodeEventKind::Terminate: return "terminate";
  }
  return "unknown";
}

const AttributedSet& NodeState::values_at(Round round) const {
  auto it = values.find(round);
  return it == values.end() ? kEmptyValues : it->second;
}

const ReportSet& NodeState::reports_at(Round round) const {
  auto it = reports.find(round);
  return it == reports.end() ? kEmptyReports : it->second;
}

std::uint64_t enough_estimate(double diameter, double epsilon) {
  if (!(diameter > 0.0)) return 1;
  const double rounds = std::ceil(std::log2(3.0 * diameter / epsilon)) + 1.0;
  if (!(rounds >= 1.0)) return 1;
  if (rounds >= static_cast<double>(std::numeric_limits<std::uint32_t>::max())) {
    return std::numeric_limits<std::uint32_t>::max();
  }
  return static_cast<std::uint64_t>(rounds);
}

std::size_t elimination_count(std::size_t t, std::size_t size) {
  if (size == 0) return 0;
  return std::min(t, (size - 1) / 2);
}

double hull_tolerance(const AttributedSet& rec_vals) {
  return 1e-9 * std::max(1.0, diameter(rec_vals));
}

bool value_message_consistent(const ProtocolParams& params, const ValueMsg& msg) {
  const std::size_t quorum = params.n - params.t;
  if (msg.round == 0 || msg.v.dimension() != params.m) return false;
  if (msg.rec_vals.size() < quorum || msg.rec_reps.size() < quorum) return false;
  if (msg.rec_vals.dimension() != params.m) return false;
  for (const auto& [reporter, report] : msg.rec_reps) {
    if (!report.is_subset_of(msg.rec_vals)) return false;
  }
  if (msg.round == 1) {
    const AttributedSet core = elim(elimination_count(params.t, msg.rec_vals.size()), msg.rec_vals);
    return in_hull(msg.v, core, hull_tolerance(msg.rec_vals));
  }
  return msg.v == vote_mean(msg.rec_vals);
}

bool value_message_ready(const NodeState& state, const ValueMsg& msg, NodeId sender) {
  if (sender >= state.params.n) return false;
  if (!value_message_consistent(state.params, msg)) return false;
  return value_message_current(state, msg);
}

bool report_message_ready(const NodeState& state, const ReportMsg& msg, NodeId sender) {
  if (sender >= state.params.n) return false;
  return state.r >= msg.round && msg.rec_vals.size() >= state.params.n - state.params.t &&
         msg.rec_vals.is_subset_of(state.values_at(msg.round));
}

Node::Node(NodeId id, ProtocolParams params, ValidityPredicate ex_val, Resilience resilience)
    : ex_val_(std::move(ex_val)) {
  if (params.n == 0 || params.m == 0) throw UsageError("n and m must be positive");
  if (id >= params.n) throw UsageError("node id out of range");
  if (params.t >= params.n) throw UsageError("t must be smaller than n");
  if (resilience == Resilience::Enforced && params.n < 3 * params.t + 1) {
    throw UsageError("n = " + std::to_string(params.n) + " is below 3t + 1 = " +
                     std::to_string(3 * params.t + 1));
  }
  if (!(params.epsilon > 0.0) || !std::isfinite(params.epsilon)) {
    throw UsageError("epsilon must be a positive finite number");
  }
  if (ex_val_.dimension() != 0 && ex_val_.dimension() != params.m) {
    throw UsageError("validity predicate dimension does not match m");
  }
  state_.id = id;
  state_.params = params;
}

StepOutput Node::start(const Point& input) {
  if (state_.started) throw UsageError("node already started");
  if (input.dimension() != state_.params.m) throw UsageError("input dimension does not match m");
  state_.started = true;
  StepOutput out;
  broadcast(out, InitValueMsg{input});
  out.state_changed = true;
  return out;
}

StepOutput Node::deliver(NodeId sender, const ProtocolMessage& msg) {
  if (state_.phase == Phase::Terminated) return {};
  return std::visit(
      [&](const auto& m) -> StepOutput {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, InitValueMsg>) {
          return on_init_value(sender, m.v);
        } else if constexpr (std::is_same_v<T, ValueMsg>) {
          return on_value(sender, m);
        } else if constexpr (std::is_same_v<T, ReportMsg>) {
          return on_report(sender, m);
        } else {
          return on_enough(sender, m.e);
        }
      },
      msg);
}

StepOutput Node::on_init_value(NodeId sender, const Point& v) {
  StepOutput out;
  if (state_.phase == Phase::Terminated || sender >= state_.params.n) return out;
  if (state_.values_at(0).contains(sender)) return out;
  if (v.dimension() != state_.params.m || !ex_val_(v)) {
    out.events.push_back({NodeEventKind::Reject, 0, sender, MessageKind::InitValue, {}, {}});
    return out;
  }
  AttributedSet& vals = state_.values[0];
  vals.insert(sender, v);
  out.events.push_back({NodeEventKind::AcceptValue, 0, sender, MessageKind::InitValue, diameter(vals), {}});
  out.state_changed = true;
  maybe_report(out, 0);
  drain(out);
  return out;
}

StepOutput Node::on_enough(NodeId sender, std::uint64_t e) {
  StepOutput out;
  if (state_.phase == Phase::Terminated || sender >= state_.params.n || e == 0) return out;
  if (!state_.enough_senders.insert(sender).second) return out;
  state_.termination_times.insert(e);
  out.state_changed = true;
  if (state_.termination_times.size() >= state_.params.n - state_.params.t) {
    auto it = state_.termination_times.begin();
    std::advance(it, static_cast<std::ptrdiff_t>(state_.params.t));
    if (!state_.halt || *state_.halt != *it) {
      state_.halt = *it;
      state_.halt_history.push_back(*it);
      out.events.push_back({NodeEventKind::HaltUpdate, state_.r, state_.id, MessageKind::Enough, {}, *it});
    }
  }
  drain(out);
  return out;
}

StepOutput Node::on_value(NodeId sender, ValueMsg msg) {
  StepOutput out;
  if (state_.phase == Phase::Terminated || sender >= state_.params.n) return out;
  if (state_.values_at(msg.round).contains(sender)) return out;
  if (!value_message_consistent(state_.params, msg)) {
    out.events.push_back({NodeEventKind::Reject, msg.round, sender, MessageKind::Value, {}, {}});
    return out;
  }
  state_.waiting_values.push_back({sender, std::move(msg)});
  out.state_changed = true;
  drain(out);
  return out;
}

StepOutput Node::on_report(NodeId sender, ReportMsg msg) {
  StepOutput out;
  if (state_.phase == Phase::Terminated || sender >= state_.params.n) return out;
  if (state_.reports_at(msg.round).contains(sender)) return out;
  if (msg.rec_vals.size() < state_.params.n - state_.params.t) {
    out.events.push_back({NodeEventKind::Reject, msg.round, sender, MessageKind::Report, {}, {}});
    return out;
  }
  state_.waiting_reports.push_back({sender, std::move(msg)});
  out.state_changed = true;
  drain(out);
  return out;
}

StepOutput Node::drain_waiting() {
  StepOutput out;
  if (state_.phase != Phase::Terminated) drain(out);
  return out;
}

void Node::drain(StepOutput& out) {
  for (;;) {
    bool progress = false;

    auto& waiting_values = state_.waiting_values;
    for (std::size_t i = 0; i < waiting_values.size();) {
      const NodeId sender = waiting_values[i].sender;
      const ValueMsg& msg = waiting_values[i].msg;
      if (state_.values_at(msg.round).contains(sender)) {
        waiting_values.erase(waiting_values.begin() + static_cast<std::ptrdiff_t>(i));
        continue;
      }
      if (!value_message_current(state_, msg)) {
        ++i;
        continue;
      }
      const Round round = msg.round;
      AttributedSet& vals = state_.values[round];
      vals.insert(sender, msg.v);
      state_.value_views[round].emplace(sender, msg.rec_vals);
      out.events.push_back({NodeEventKind::AcceptValue, round, sender, MessageKind::Value, diameter(vals), {}});
      waiting_values.erase(waiting_values.begin() + static_cast<std::ptrdiff_t>(i));
      progress = true;
      maybe_report(out, round);
    }

    auto& waiting_reports = state_.waiting_reports;
    for (std::size_t i = 0; i < waiting_reports.size();) {
      const NodeId sender = waiting_reports[i].sender;
      const ReportMsg& msg = waiting_reports[i].msg;
      if (state_.reports_at(msg.round).contains(sender)) {
        waiting_reports.erase(waiting_reports.begin() + static_cast<std::ptrdiff_t>(i));
        continue;
      }
      if (!report_message_ready(state_, msg, sender)) {
        ++i;
        continue;
      }
      const Round round = msg.round;
      state_.reports[round].insert(sender, msg.rec_vals);
      out.events.push_back({NodeEventKind::AcceptReport, round, sender, MessageKind::Report, {}, {}});
      waiting_reports.erase(waiting_reports.begin() + static_cast<std::ptrdiff_t>(i));
      progress = true;
    }

    maybe_estimate(out);
    if (maybe_leave_init(out)) progress = true;
    if (maybe_terminate(out)) return;
    if (maybe_advance(out)) progress = true;
    if (maybe_terminate(out)) return;
    if (!progress) break;
  }
}

void Node::broadcast(StepOutput& out, ProtocolMessage msg) {
  const MessageTag tag = tag_of(msg);
  out.events.push_back({NodeEventKind::Send, tag.round, state_.id, tag.kind, {}, {}});
  out.outgoing.push_back(std::move(msg));
}

void Node::maybe_report(StepOutput& out, Round round) {
  if (round != 0 && round != state_.r) return;
  if (state_.report_sent.contains(round)) return;
  const AttributedSet& vals = state_.values_at(round);
  if (vals.size() < state_.params.n - state_.params.t) return;
  state_.report_sent.insert(round);
  broadcast(out, ReportMsg{vals, round});
}

void Node::maybe_estimate(StepOutput& out) {
  if (state_.phase != Phase::Init || state_.enough) return;
  if (state_.reports_at(0).size() < state_.params.n - state_.params.t) return;
  const AttributedSet& vals = state_.values_at(0);
  state_.current_vote = vote_mean(elim(elimination_count(state_.params.t, vals.size()), vals));
  state_.init_diameter = diameter(vals);
  state_.enough = enough_estimate(*state_.init_diameter, state_.params.epsilon);
  broadcast(out, EnoughMsg{*state_.enough});
}

bool Node::maybe_leave_init(StepOutput& out) {
  if (state_.phase != Phase::Init || !state_.enough) return false;
  if (state_.termination_times.size() < state_.params.n - state_.params.t) return false;
  state_.phase = Phase::Running;
  state_.r = 1;
  out.events.push_back({NodeEventKind::RoundAdvance, 1, state_.id, MessageKind::Value, {}, {}});
  broadcast(out, ValueMsg{*state_.current_vote, state_.values_at(0), state_.reports_at(0), 1});
  maybe_report(out, 1);
  return true;
}

bool Node::maybe_advance(StepOutput& out) {
  if (state_.phase != Phase::Running) return false;
  if (state_.halt && state_.r >= *state_.halt) return false;
  if (state_.reports_at(state_.r).size() < state_.params.n - state_.params.t) return false;
  state_.r += 1;
  const Round r = state_.r;
  state_.current_vote = vote_mean(state_.values_at(r - 1));
  out.events.push_back({NodeEventKind::RoundAdvance, r, state_.id, MessageKind::Value, {}, {}});
  broadcast(out, ValueMsg{*state_.current_vote, state_.values_at(r - 1), state_.reports_at(r - 1), r});
  maybe_report(out, r);
  return true;
}

bool Node::maybe_terminate(StepOutput& out) {
  if (state_.phase != Phase::Running || !state_.halt || state_.r < *state_.halt) return false;
  state_.phase = Phase::Terminated;
  state_.output = state_.current_vote;
  out.delivered_output = state_.output;
  out.events.push_back({NodeEventKind::Terminate, state_.r, state_.id, MessageKind::Value, {}, state_.halt});
  out.state_changed = true;
  return true;
}

}  // namespace vaad
