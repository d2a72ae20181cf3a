#include "vaad/broadcast.hpp"

#include "vaad/digest.hpp"
#include "vaad/errors.hpp"

namespace vaad {

namespace {

bool payload_matches(const LinkMessage& msg) {
  return msg.payload != nullptr && sha256_hex(*msg.payload) == msg.digest;
}

LinkMessage make_echo(const BroadcastInstanceId& id, const Digest& digest, SharedBytes payload) {
  return LinkMessage{LinkKind::Echo, id, digest, std::move(payload)};
}

LinkMessage make_ready(const BroadcastInstanceId& id, const Digest& digest) {
  return LinkMessage{LinkKind::Ready, id, digest, nullptr};
}

}  // namespace

const char* to_string(LinkKind kind) {
  switch (kind) {
    case LinkKind::Send: return "send";
    case LinkKind::Echo: return "echo";
    case LinkKind::Ready: return "ready";
  }
  return "unknown";
}

LinkMessage make_send(BroadcastInstanceId instance, SharedBytes payload) {
  if (payload == nullptr) throw UsageError("send requires a payload");
  Digest digest = sha256_hex(*payload);
  return LinkMessage{LinkKind::Send, instance, std::move(digest), std::move(payload)};
}

RbcPhase RbcInstance::phase() const noexcept {
  if (delivered) return RbcPhase::Delivered;
  if (readied) return RbcPhase::Readied;
  if (echoed) return RbcPhase::Echoed;
  return RbcPhase::Idle;
}

RbcState::RbcState(NodeId self, std::size_t n, std::size_t t) : self_(self), n_(n), t_(t) {
  if (n == 0 || self >= n) throw UsageError("rbc node id out of range");
}

const RbcInstance* RbcState::find(const BroadcastInstanceId& id) const {
  auto it = instances_.find(id);
  return it == instances_.end() ? nullptr : &it->second;
}

RbcOutput rbc_step(RbcState& state, NodeId from, const LinkMessage& msg) {
  RbcOutput out;
  if (from >= state.n_ || msg.instance.sender >= state.n_) return out;
  RbcInstance& inst = state.instances_[msg.instance];
  const std::size_t echo_threshold = state.n_ - state.t_;
  const std::size_t ready_amplify = state.t_ + 1;
  const std::size_t deliver_threshold = 2 * state.t_ + 1;

  switch (msg.kind) {
    case LinkKind::Send:
      if (from != msg.instance.sender || inst.echoed || !payload_matches(msg)) return out;
      inst.payloads.try_emplace(msg.digest, msg.payload);
      inst.echoed = true;
      out.outgoing.push_back(make_echo(msg.instance, msg.digest, msg.payload));
      break;
    case LinkKind::Echo:
      if (!inst.echoed_by.insert(from).second) return out;
      if (!payload_matches(msg)) return out;
      inst.payloads.try_emplace(msg.digest, msg.payload);
      inst.echo_counts[msg.digest].insert(from);
      break;
    case LinkKind::Ready:
      if (!inst.readied_by.insert(from).second) return out;
      inst.ready_counts[msg.digest].insert(from);
      break;
  }

  if (!inst.readied) {
    for (const auto& [digest, senders] : inst.echo_counts) {
      if (senders.size() >= echo_threshold) {
        inst.readied = true;
        out.outgoing.push_back(make_ready(msg.instance, digest));
        break;
      }
    }
  }
  if (!inst.readied) {
    for (const auto& [digest, senders] : inst.ready_counts) {
      if (senders.size() >= ready_amplify) {
        inst.readied = true;
        out.outgoing.push_back(make_ready(msg.instance, digest));
        break;
      }
    }
  }
  if (!inst.delivered) {
    for (const auto& [digest, senders] : inst.ready_counts) {
      if (senders.size() < deliver_threshold) continue;
      auto payload = inst.payloads.find(digest);
      if (payload == inst.payloads.end()) continue;
      inst.delivered = true;
      inst.delivered_digest = digest;
      out.delivery = RbcDelivery{msg.instance, digest, payload->second};
      break;
    }
  }
  return out;
}

bool IdealChannel::admit(const BroadcastInstanceId& id) {
  const bool fresh = used_.insert(id).second;
  return fresh || !enforce_;
}

void DeliveryLedger::record(NodeId receiver, const BroadcastInstanceId& id, const Digest& digest) {
  auto& by_node = deliveries_[id];
  auto [it, inserted] = by_node.try_emplace(receiver, digest);
  if (!inserted) {
    ++duplicates_;
    if (it->second != digest) conflicting_.insert(id);
  }
}

std::vector<BroadcastInstanceId> DeliveryLedger::uniqueness_violations() const {
  std::vector<BroadcastInstanceId> out;
  for (const auto& [id, by_node] : deliveries_) {
    std::set<Digest> distinct;
    for (const auto& [node, digest] : by_node) distinct.insert(digest);
    if (distinct.size() > 1 || conflicting_.contains(id)) out.push_back(id);
  }
  return out;
}

std::vector<BroadcastInstanceId> DeliveryLedger::agreement_gaps(const std::set<NodeId>& correct) const {
  std::vector<BroadcastInstanceId> out;
  for (const auto& [id, by_node] : deliveries_) {
    for (NodeId node : correct) {
      if (!by_node.contains(node)) {
        out.push_back(id);
        break;
      }
    }
  }
  return out;
}

std::map<NodeId, std::set<std::pair<BroadcastInstanceId, Digest>>> DeliveryLedger::per_node() const {
  std::map<NodeId, std::set<std::pair<BroadcastInstanceId, Digest>>> out;
  for (const auto& [id, by_node] : deliveries_) {
    for (const auto& [node, digest] : by_node) out[node].emplace(id, digest);
  }
  return out;
}

}  // namespace vaad
