#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "vaad/broadcast.hpp"

namespace vaad::testing {

// Exhaustive exploration of every delivery order for one equivocated
// instance at n = 4, t = 1. Node 3 is the Byzantine sender; correct nodes
// 0..2 run the state machine and their messages go to every correct node.
class RbcExplorer {
 public:
  struct InFlight {
    NodeId from;
    NodeId to;
    LinkMessage msg;
  };

  RbcExplorer(BroadcastInstanceId instance, std::vector<InFlight> initial)
      : instance_(instance), initial_(std::move(initial)) {}

  void run() {
    std::vector<RbcState> nodes;
    for (NodeId i = 0; i < 3; ++i) nodes.emplace_back(i, 4, 1);
    std::vector<std::optional<Digest>> delivered(3);
    dfs(nodes, initial_, delivered);
  }

  std::size_t states() const { return visited_.size(); }
  std::size_t terminals() const { return terminals_; }
  std::size_t violations() const { return violations_; }
  std::set<std::optional<Digest>> outcomes() const { return outcomes_; }

 private:
  char tag(const Digest& d) const {
    auto it = std::find(digests_.begin(), digests_.end(), d);
    if (it == digests_.end()) {
      digests_.push_back(d);
      it = digests_.end() - 1;
    }
    return static_cast<char>('a' + (it - digests_.begin()));
  }

  /// Everything the future behaviour of a node depends on, plus the in-flight multiset.
  std::string key(const std::vector<RbcState>& nodes, const std::vector<InFlight>& flight) const {
    std::string k;
    for (const RbcState& node : nodes) {
      const RbcInstance* inst = node.find(instance_);
      if (inst == nullptr) {
        k += '-';
        continue;
      }
      k += static_cast<char>('0' + inst->echoed + 2 * inst->readied + 4 * inst->delivered);
      k += inst->delivered_digest ? tag(*inst->delivered_digest) : '.';
      if (finished(node)) {
        k += '|';
        continue;
      }
      for (const auto& [d, s] : inst->echo_counts) {
        k += 'e';
        k += tag(d);
        for (NodeId id : s) k += static_cast<char>('0' + id);
      }
      for (const auto& [d, s] : inst->ready_counts) {
        k += 'r';
        k += tag(d);
        for (NodeId id : s) k += static_cast<char>('0' + id);
      }
      for (const auto& [d, p] : inst->payloads) {
        k += 'p';
        k += tag(d);
      }
      k += '|';
    }
    std::vector<std::string> msgs;
    msgs.reserve(flight.size());
    for (const InFlight& f : flight) msgs.push_back(message_key(f));
    std::sort(msgs.begin(), msgs.end());
    for (const auto& m : msgs) k += m;
    return k;
  }

  std::string message_key(const InFlight& f) const {
    return {static_cast<char>('0' + f.from), static_cast<char>('0' + f.to),
            static_cast<char>('0' + static_cast<int>(f.msg.kind)), tag(f.msg.digest)};
  }

  /// A node that has echoed, readied and delivered never sends again, so
  /// messages addressed to it cannot influence anything.
  bool finished(const RbcState& node) const {
    const RbcInstance* inst = node.find(instance_);
    return inst != nullptr && inst->echoed && inst->readied && inst->delivered;
  }

  void dfs(std::vector<RbcState>& nodes, std::vector<InFlight> flight, std::vector<std::optional<Digest>> delivered) {
    std::erase_if(flight, [&](const InFlight& f) { return finished(nodes[f.to]); });
    if (!visited_.insert(key(nodes, flight)).second) return;

    std::set<Digest> distinct;
    for (const auto& d : delivered) {
      if (d) distinct.insert(*d);
    }
    if (distinct.size() > 1) ++violations_;

    if (flight.empty()) {
      ++terminals_;
      const bool some = !distinct.empty();
      const bool all = std::all_of(delivered.begin(), delivered.end(), [](const auto& d) { return d.has_value(); });
      if (some && !all) ++violations_;
      outcomes_.insert(some ? std::optional<Digest>(*distinct.begin()) : std::nullopt);
      return;
    }

    std::set<std::string> tried;
    for (std::size_t i = 0; i < flight.size(); ++i) {
      if (!tried.insert(message_key(flight[i])).second) continue;
      std::vector<RbcState> next_nodes = nodes;
      std::vector<InFlight> next_flight = flight;
      std::vector<std::optional<Digest>> next_delivered = delivered;
      const InFlight f = next_flight[i];
      next_flight.erase(next_flight.begin() + static_cast<std::ptrdiff_t>(i));
      RbcOutput out = rbc_step(next_nodes[f.to], f.from, f.msg);
      for (const LinkMessage& m : out.outgoing) {
        for (NodeId j = 0; j < 3; ++j) next_flight.push_back({f.to, j, m});
      }
      if (out.delivery) {
        if (next_delivered[f.to]) ++violations_;
        next_delivered[f.to] = out.delivery->digest;
      }
      dfs(next_nodes, std::move(next_flight), std::move(next_delivered));
    }
  }

  BroadcastInstanceId instance_;
  std::vector<InFlight> initial_;
  mutable std::vector<Digest> digests_;
  std::unordered_set<std::string> visited_;
  std::size_t terminals_ = 0;
  std::size_t violations_ = 0;
  std::set<std::optional<Digest>> outcomes_;
};

}  // namespace vaad::testing
