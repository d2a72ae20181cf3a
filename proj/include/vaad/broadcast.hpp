#pragma once

// Broadcast channels with Validity / Liveness / Uniqueness per (sender, tag).
//
// Two realizations:
//   * IdealChannel: the simulator delivers every broadcast to all nodes and
//     refuses a second payload for an already-used (sender, tag) slot.
//   * RbcState: Bracha reliable broadcast over point-to-point links. Thresholds:
//     n - t matching echoes or t + 1 matching readies trigger our ready,
//     2t + 1 matching readies deliver.

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "vaad/messages.hpp"

namespace vaad {

struct BroadcastInstanceId {
  NodeId sender = 0;
  MessageTag tag;

  friend auto operator<=>(const BroadcastInstanceId&, const BroadcastInstanceId&) = default;
};

/// Lowercase hex SHA-256 of the encoded payload.
using Digest = std::string;

using SharedBytes = std::shared_ptr<const Bytes>;

enum class LinkKind : std::uint8_t { Send, Echo, Ready };

const char* to_string(LinkKind kind);

/// Point-to-point message of the Bracha layer. Send and Echo carry the
/// payload; Ready carries only the digest.
struct LinkMessage {
  LinkKind kind = LinkKind::Send;
  BroadcastInstanceId instance;
  Digest digest;
  SharedBytes payload;
};

LinkMessage make_send(BroadcastInstanceId instance, SharedBytes payload);

enum class RbcPhase { Idle, Echoed, Readied, Delivered };

/// Per-instance bookkeeping of one node.
struct RbcInstance {
  bool echoed = false;
  bool readied = false;
  bool delivered = false;
  std::map<Digest, std::set<NodeId>> echo_counts;
  std::map<Digest, std::set<NodeId>> ready_counts;
  std::set<NodeId> echoed_by;  // first echo from each node counts, later ones are dropped
  std::set<NodeId> readied_by;
  std::map<Digest, SharedBytes> payloads;
  std::optional<Digest> delivered_digest;

  RbcPhase phase() const noexcept;
};

struct RbcDelivery {
  BroadcastInstanceId instance;
  Digest digest;
  SharedBytes payload;
};

struct RbcOutput {
  /// Each outgoing message goes to all n nodes (including this one).
  std::vector<LinkMessage> outgoing;
  std::optional<RbcDelivery> delivery;
};

/// Bracha state of one node across all broadcast instances. Single owner.
class RbcState {
 public:
  RbcState(NodeId self, std::size_t n, std::size_t t);

  NodeId self() const noexcept { return self_; }
  std::size_t n() const noexcept { return n_; }
  std::size_t t() const noexcept { return t_; }

  const std::map<BroadcastInstanceId, RbcInstance>& instances() const noexcept { return instances_; }
  const RbcInstance* find(const BroadcastInstanceId& id) const;

  friend RbcOutput rbc_step(RbcState& state, NodeId from, const LinkMessage& msg);

 private:
  NodeId self_;
  std::size_t n_;
  std::size_t t_;
  std::map<BroadcastInstanceId, RbcInstance> instances_;
};

/// Applies one incoming link message. Deterministic; malformed or
/// out-of-protocol messages (a Send not from the instance's sender, a payload
/// whose digest does not match) are ignored.
RbcOutput rbc_step(RbcState& state, NodeId from, const LinkMessage& msg);

/// Ideal channel bookkeeping: which (sender, tag) slots have been used.
class IdealChannel {
 public:
  explicit IdealChannel(bool enforce_uniqueness = true) : enforce_(enforce_uniqueness) {}

  /// True if the broadcast may proceed. With uniqueness enforced, a second
  /// broadcast on a used slot is refused.
  bool admit(const BroadcastInstanceId& id);

  bool enforces_uniqueness() const noexcept { return enforce_; }

 private:
  bool enforce_;
  std::set<BroadcastInstanceId> used_;
};

/// Records which payload each correct node delivered per instance.
class DeliveryLedger {
 public:
  void record(NodeId receiver, const BroadcastInstanceId& id, const Digest& digest);

  /// Instances for which correct nodes delivered more than one distinct payload.
  std::vector<BroadcastInstanceId> uniqueness_violations() const;

  /// Instances delivered by some but not all of `correct` (meaningful at quiescence).
  std::vector<BroadcastInstanceId> agreement_gaps(const std::set<NodeId>& correct) const;

  /// Per receiver, the set of (instance, digest) it delivered.
  std::map<NodeId, std::set<std::pair<BroadcastInstanceId, Digest>>> per_node() const;

  /// Receivers that got the same instance twice.
  std::size_t duplicate_deliveries() const noexcept { return duplicates_; }

 private:
  std::map<BroadcastInstanceId, std::map<NodeId, Digest>> deliveries_;
  std::set<BroadcastInstanceId> conflicting_;
  std::size_t duplicates_ = 0;
};

}  // namespace vaad
