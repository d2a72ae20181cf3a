#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "vaad/geometry.hpp"

namespace vaad {

using Round = std::uint64_t;
using Bytes = std::vector<std::uint8_t>;

enum class MessageKind : std::uint8_t { InitValue = 1, Value = 2, Report = 3, Enough = 4 };

const char* to_string(MessageKind kind);

/// Broadcast slot label. InitValue and Enough always carry round 0.
struct MessageTag {
  Round round = 0;
  MessageKind kind = MessageKind::InitValue;

  friend auto operator<=>(const MessageTag&, const MessageTag&) = default;
};

/// Reports keyed by reporter: each reporter contributes at most one value set per round.
class ReportSet {
 public:
  using Map = std::map<NodeId, AttributedSet>;
  using const_iterator = Map::const_iterator;

  ReportSet() = default;
  ReportSet(std::initializer_list<std::pair<const NodeId, AttributedSet>> entries);

  bool insert(NodeId reporter, AttributedSet report);
  bool contains(NodeId reporter) const { return entries_.contains(reporter); }
  const AttributedSet* find(NodeId reporter) const;
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  const_iterator begin() const noexcept { return entries_.begin(); }
  const_iterator end() const noexcept { return entries_.end(); }

  /// Every reporter here is present in `other` with an identical report.
  bool is_subset_of(const ReportSet& other) const;

  friend bool operator==(const ReportSet&, const ReportSet&) = default;

 private:
  Map entries_;
};

struct InitValueMsg {
  Point v;
  friend bool operator==(const InitValueMsg&, const InitValueMsg&) = default;
};

struct ValueMsg {
  Point v;
  AttributedSet rec_vals;
  ReportSet rec_reps;
  Round round = 1;
  friend bool operator==(const ValueMsg&, const ValueMsg&) = default;
};

struct ReportMsg {
  AttributedSet rec_vals;
  Round round = 0;
  friend bool operator==(const ReportMsg&, const ReportMsg&) = default;
};

struct EnoughMsg {
  std::uint64_t e = 1;
  friend bool operator==(const EnoughMsg&, const EnoughMsg&) = default;
};

using ProtocolMessage = std::variant<InitValueMsg, ValueMsg, ReportMsg, EnoughMsg>;

MessageTag tag_of(const ProtocolMessage& msg);

/// Canonical encoding. Layout (all integers and doubles big-endian):
///
///   kind:u8, then per kind
///     InitValue: point
///     Value:     round:u64 point attributed_set report_set
///     Report:    round:u64 attributed_set
///     Enough:    e:u64
///   point          = dim:u32 coord:f64 * dim
///   attributed_set = count:u32 (sender:u32 point) * count, ascending sender
///   report_set     = count:u32 (reporter:u32 attributed_set) * count, ascending reporter
///
/// Throws UsageError on ill-formed messages (Value round 0, Enough 0, mixed dimensions).
Bytes encode(const ProtocolMessage& msg);

/// Inverse of encode. Rejects non-canonical input (unsorted keys, trailing
/// bytes, non-finite coordinates) with a DecodeError carrying the byte offset.
ProtocolMessage decode(std::span<const std::uint8_t> bytes);

std::string to_hex(std::span<const std::uint8_t> bytes);

}  // namespace vaad
