#include "vaad/messages.hpp"

#include <bit>
#include <cmath>
#include <limits>

#include "vaad/errors.hpp"

namespace vaad {

namespace {

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }

  void u32(std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8) out_.push_back(static_cast<std::uint8_t>(v >> shift));
  }

  void u64(std::uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8) out_.push_back(static_cast<std::uint8_t>(v >> shift));
  }

  void point(const Point& p) {
    u32(static_cast<std::uint32_t>(p.dimension()));
    for (double c : p.coords()) u64(std::bit_cast<std::uint64_t>(c));
  }

  void attributed_set(const AttributedSet& set) {
    u32(static_cast<std::uint32_t>(set.size()));
    for (const auto& [sender, p] : set) {
      u32(sender);
      point(p);
    }
  }

  void report_set(const ReportSet& reports) {
    u32(static_cast<std::uint32_t>(reports.size()));
    for (const auto& [reporter, set] : reports) {
      u32(reporter);
      attributed_set(set);
    }
  }

  Bytes take() { return std::move(out_); }

 private:
  Bytes out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::size_t offset() const { return pos_; }
  bool done() const { return pos_ == in_.size(); }

  [[noreturn]] void fail(const std::string& what) const { throw DecodeError(pos_, what); }

  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) fail("truncated input (need " + std::to_string(n) + " bytes)");
  }

  std::uint8_t u8() {
    need(1);
    return in_[pos_++];
  }

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | in_[pos_++];
    return v;
  }

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | in_[pos_++];
    return v;
  }

  // `expected_dim` of 0 accepts any dimension and records it.
  Point point(std::size_t& expected_dim) {
    const std::size_t at = pos_;
    const std::uint32_t dim = u32();
    if (dim == 0) throw DecodeError(at, "point with zero dimension");
    if (expected_dim != 0 && dim != expected_dim) throw DecodeError(at, "inconsistent point dimension");
    need(static_cast<std::size_t>(dim) * 8);
    std::vector<double> coords(dim);
    for (auto& c : coords) {
      const std::size_t coord_at = pos_;
      c = std::bit_cast<double>(u64());
      if (!std::isfinite(c)) throw DecodeError(coord_at, "non-finite coordinate");
    }
    expected_dim = dim;
    return Point(std::move(coords));
  }

  AttributedSet attributed_set(std::size_t& dim) {
    const std::uint32_t count = u32();
    // Each entry is at least sender(4) + dim(4) + one coordinate(8).
    if (count > (in_.size() - pos_) / 16) fail("entry count exceeds remaining input");
    AttributedSet set;
    std::int64_t previous = -1;
    for (std::uint32_t i = 0; i < count; ++i) {
      const std::size_t at = pos_;
      const std::uint32_t sender = u32();
      if (static_cast<std::int64_t>(sender) <= previous) throw DecodeError(at, "sender ids not strictly ascending");
      previous = sender;
      set.insert(sender, point(dim));
    }
    return set;
  }

  ReportSet report_set(std::size_t& dim) {
    const std::uint32_t count = u32();
    if (count > (in_.size() - pos_) / 8) fail("report count exceeds remaining input");
    ReportSet reports;
    std::int64_t previous = -1;
    for (std::uint32_t i = 0; i < count; ++i) {
      const std::size_t at = pos_;
      const std::uint32_t reporter = u32();
      if (static_cast<std::int64_t>(reporter) <= previous) {
        throw DecodeError(at, "reporter ids not strictly ascending");
      }
      previous = reporter;
      reports.insert(reporter, attributed_set(dim));
    }
    return reports;
  }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

void require_dimension(std::size_t& dim, const AttributedSet& set) {
  if (set.empty()) return;
  if (dim == 0) dim = set.dimension();
  if (set.dimension() != dim) throw UsageError("message mixes point dimensions");
}

}  // namespace

const char* to_string(MessageKind kind) {
  switch (kind) {
    case MessageKind::InitValue: return "init_value";
    case MessageKind::Value: return "value";
    case MessageKind::Report: return "report";
    case MessageKind::Enough: return "enough";
  }
  return "unknown";
}

ReportSet::ReportSet(std::initializer_list<std::pair<const NodeId, AttributedSet>> entries) {
  for (const auto& [reporter, set] : entries) {
    if (!insert(reporter, set)) throw UsageError("duplicate reporter " + std::to_string(reporter));
  }
}

bool ReportSet::insert(NodeId reporter, AttributedSet report) {
  return entries_.try_emplace(reporter, std::move(report)).second;
}

const AttributedSet* ReportSet::find(NodeId reporter) const {
  auto it = entries_.find(reporter);
  return it == entries_.end() ? nullptr : &it->second;
}

bool ReportSet::is_subset_of(const ReportSet& other) const {
  if (size() > other.size()) return false;
  for (const auto& [reporter, set] : entries_) {
    const AttributedSet* theirs = other.find(reporter);
    if (theirs == nullptr || !(*theirs == set)) return false;
  }
  return true;
}

MessageTag tag_of(const ProtocolMessage& msg) {
  struct Visitor {
    MessageTag operator()(const InitValueMsg&) const { return {0, MessageKind::InitValue}; }
    MessageTag operator()(const ValueMsg& m) const { return {m.round, MessageKind::Value}; }
    MessageTag operator()(const ReportMsg& m) const { return {m.round, MessageKind::Report}; }
    MessageTag operator()(const EnoughMsg&) const { return {0, MessageKind::Enough}; }
  };
  return std::visit(Visitor{}, msg);
}

Bytes encode(const ProtocolMessage& msg) {
  Writer w;
  std::visit(
      [&w](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, InitValueMsg>) {
          w.u8(static_cast<std::uint8_t>(MessageKind::InitValue));
          w.point(m.v);
        } else if constexpr (std::is_same_v<T, ValueMsg>) {
          if (m.round == 0) throw UsageError("value message round must be >= 1");
          std::size_t dim = m.v.dimension();
          require_dimension(dim, m.rec_vals);
          for (const auto& [reporter, set] : m.rec_reps) require_dimension(dim, set);
          w.u8(static_cast<std::uint8_t>(MessageKind::Value));
          w.u64(m.round);
          w.point(m.v);
          w.attributed_set(m.rec_vals);
          w.report_set(m.rec_reps);
        } else if constexpr (std::is_same_v<T, ReportMsg>) {
          w.u8(static_cast<std::uint8_t>(MessageKind::Report));
          w.u64(m.round);
          w.attributed_set(m.rec_vals);
        } else {
          if (m.e == 0) throw UsageError("enough estimate must be >= 1");
          w.u8(static_cast<std::uint8_t>(MessageKind::Enough));
          w.u64(m.e);
        }
      },
      msg);
  return w.take();
}

ProtocolMessage decode(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  if (bytes.empty()) r.fail("empty input");
  const std::uint8_t kind = r.u8();
  std::size_t dim = 0;
  ProtocolMessage msg = EnoughMsg{};
  switch (static_cast<MessageKind>(kind)) {
    case MessageKind::InitValue:
      msg = InitValueMsg{r.point(dim)};
      break;
    case MessageKind::Value: {
      const std::size_t at = r.offset();
      const Round round = r.u64();
      if (round == 0) throw DecodeError(at, "value message round must be >= 1");
      Point v = r.point(dim);
      AttributedSet vals = r.attributed_set(dim);
      ReportSet reps = r.report_set(dim);
      msg = ValueMsg{std::move(v), std::move(vals), std::move(reps), round};
      break;
    }
    case MessageKind::Report: {
      const Round round = r.u64();
      msg = ReportMsg{r.attributed_set(dim), round};
      break;
    }
    case MessageKind::Enough: {
      const std::size_t at = r.offset();
      const std::uint64_t e = r.u64();
      if (e == 0) throw DecodeError(at, "enough estimate must be >= 1");
      msg = EnoughMsg{e};
      break;
    }
    default:
      throw DecodeError(0, "unknown message kind " + std::to_string(kind));
  }
  if (!r.done()) r.fail("trailing bytes");
  return msg;
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0xf]);
  }
  return out;
}

}  // namespace vaad
