#include "vaad/adversary.hpp"

#include <algorithm>
#include <deque>
#include <numeric>

#include "vaad/errors.hpp"

namespace vaad {

namespace {

Reaction to_reaction(StepOutput step) {
  Reaction out;
  for (auto& msg : step.outgoing) out.emissions.push_back({std::move(msg), std::nullopt, std::nullopt});
  out.events = std::move(step.events);
  out.output = std::move(step.delivered_output);
  return out;
}

void require_dimension(const Point& p, std::size_t m, const char* what) {
  if (p.dimension() != m) {
    throw UsageError(std::string(what) + " has dimension " + std::to_string(p.dimension()) + ", expected " +
                     std::to_string(m));
  }
}

double dot(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.dimension(); ++i) s += a[i] * b[i];
  return s;
}

double mean_projection(const AttributedSet& set, const Point& bias) {
  double s = 0.0;
  for (const auto& [id, p] : set) s += dot(p, bias);
  return set.empty() ? 0.0 : s / static_cast<double>(set.size());
}

/// Base for strategies that run an honest state machine and tamper with its output.
class WrappedNode : public Participant {
 public:
  WrappedNode(Node node, Point input) : node_(std::move(node)), input_(std::move(input)) {}

  Reaction start() override { return filter(to_reaction(node_.start(input_))); }
  Reaction deliver(NodeId from, const ProtocolMessage& msg) override {
    return filter(to_reaction(node_.deliver(from, msg)));
  }

 protected:
  virtual Reaction filter(Reaction r) { return r; }
  const NodeState& inner() const { return node_.state(); }

 private:
  Node node_;
  Point input_;
};

class SilentParticipant final : public Participant {
 public:
  Reaction start() override { return {}; }
  Reaction deliver(NodeId, const ProtocolMessage&) override { return {}; }
  bool relays() const noexcept override { return false; }
  std::string describe() const override { return "silent"; }
};

class CrashParticipant final : public WrappedNode {
 public:
  CrashParticipant(Node node, Point input, Round after_round)
      : WrappedNode(std::move(node), std::move(input)), after_round_(after_round) {}

  Reaction deliver(NodeId from, const ProtocolMessage& msg) override {
    if (crashed_) return {};
    return WrappedNode::deliver(from, msg);
  }
  bool relays() const noexcept override { return !crashed_; }
  std::string describe() const override { return "crash(after_round=" + std::to_string(after_round_) + ")"; }

 protected:
  Reaction filter(Reaction r) override {
    Reaction out;
    for (auto& e : r.emissions) {
      if (crashed_) break;
      if (tag_of(e.msg).round > after_round_) {
        crashed_ = true;
        break;
      }
      out.emissions.push_back(std::move(e));
    }
    return out;
  }

 private:
  Round after_round_;
  bool crashed_ = false;
};

class ExtremeHonestParticipant final : public WrappedNode {
 public:
  using WrappedNode::WrappedNode;
  std::string describe() const override { return "extreme_honest"; }
};

class InvalidInputParticipant final : public WrappedNode {
 public:
  using WrappedNode::WrappedNode;
  std::string describe() const override { return "invalid_input"; }
};

class ForgedVoteParticipant final : public WrappedNode {
 public:
  ForgedVoteParticipant(Node node, Point input, Point perturbation)
      : WrappedNode(std::move(node), std::move(input)), perturbation_(std::move(perturbation)) {}
  std::string describe() const override { return "forged_vote"; }

 protected:
  Reaction filter(Reaction r) override {
    for (auto& e : r.emissions) {
      auto* value = std::get_if<ValueMsg>(&e.msg);
      if (value == nullptr) continue;
      std::vector<double> shifted(value->v.coords().begin(), value->v.coords().end());
      for (std::size_t i = 0; i < shifted.size(); ++i) shifted[i] += perturbation_[i];
      value->v = Point(std::move(shifted));
    }
    r.output.reset();
    r.events.clear();
    return r;
  }

 private:
  Point perturbation_;
};

class SkewedSubsetParticipant final : public WrappedNode {
 public:
  static constexpr std::size_t kMaxCombinations = 4096;

  SkewedSubsetParticipant(Node node, Point input, Point bias)
      : WrappedNode(std::move(node), std::move(input)), bias_(std::move(bias)) {}
  std::string describe() const override { return "skewed_subset"; }

 protected:
  Reaction filter(Reaction r) override {
    for (auto& e : r.emissions) {
      if (auto* report = std::get_if<ReportMsg>(&e.msg)) {
        report->rec_vals = top_values(inner().values_at(report->round));
      } else if (auto* value = std::get_if<ValueMsg>(&e.msg)) {
        skew(*value);
      }
    }
    r.output.reset();
    r.events.clear();
    return r;
  }

 private:
  std::size_t quorum() const { return inner().params.n - inner().params.t; }

  AttributedSet top_values(const AttributedSet& vals) const {
    std::vector<std::pair<double, NodeId>> ranked;
    for (const auto& [id, p] : vals) ranked.emplace_back(-dot(p, bias_), id);
    std::sort(ranked.begin(), ranked.end());
    AttributedSet out;
    for (std::size_t i = 0; i < ranked.size() && i < quorum(); ++i) {
      out.insert(ranked[i].second, *vals.find(ranked[i].second));
    }
    return out;
  }

  /// Score of citing `rec_vals`: the projection of the vote it justifies.
  double score(const AttributedSet& rec_vals, Round round) const {
    if (round == 1) {
      const AttributedSet core = elim(elimination_count(inner().params.t, rec_vals.size()), rec_vals);
      double best = -std::numeric_limits<double>::infinity();
      for (const auto& [id, p] : core) best = std::max(best, dot(p, bias_));
      return best;
    }
    return mean_projection(rec_vals, bias_);
  }

  /// Adds uncited values from `pool` while that raises the score.
  AttributedSet extend(AttributedSet base, const AttributedSet& pool, Round round) const {
    std::vector<std::pair<double, NodeId>> extras;
    for (const auto& [id, p] : pool) {
      if (!base.contains(id)) extras.emplace_back(-dot(p, bias_), id);
    }
    std::sort(extras.begin(), extras.end());
    double current = score(base, round);
    for (const auto& [neg, id] : extras) {
      AttributedSet candidate = base;
      candidate.insert(id, *pool.find(id));
      const double s = score(candidate, round);
      if (s <= current) break;
      base = std::move(candidate);
      current = s;
    }
    return base;
  }

  void skew(ValueMsg& msg) const {
    const AttributedSet& pool = inner().values_at(msg.round - 1);
    std::vector<std::pair<NodeId, const AttributedSet*>> reports;
    for (const auto& [id, set] : inner().reports_at(msg.round - 1)) reports.emplace_back(id, &set);
    const std::size_t k = quorum();
    if (reports.size() < k) return;

    std::vector<std::vector<std::size_t>> combos;
    if (binomial(reports.size(), k) <= kMaxCombinations) {
      std::vector<bool> mask(reports.size(), false);
      std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(k), true);
      do {
        std::vector<std::size_t> combo;
        for (std::size_t i = 0; i < mask.size(); ++i) {
          if (mask[i]) combo.push_back(i);
        }
        combos.push_back(std::move(combo));
      } while (std::prev_permutation(mask.begin(), mask.end()));
    } else {
      std::vector<std::size_t> order(reports.size());
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return mean_projection(*reports[a].second, bias_) > mean_projection(*reports[b].second, bias_);
      });
      order.resize(k);
      combos.push_back(std::move(order));
    }

    double best_score = -std::numeric_limits<double>::infinity();
    for (const auto& combo : combos) {
      AttributedSet cited;
      ReportSet cited_reports;
      for (std::size_t i : combo) {
        cited_reports.insert(reports[i].first, *reports[i].second);
        for (const auto& [id, p] : *reports[i].second) cited.insert(id, p);
      }
      for (const AttributedSet& candidate : {cited, extend(cited, pool, msg.round)}) {
        const double s = score(candidate, msg.round);
        if (s > best_score) {
          best_score = s;
          msg.rec_vals = candidate;
          msg.rec_reps = cited_reports;
        }
      }
    }
    msg.v = msg.round == 1 ? extreme_vertex(msg.rec_vals) : vote_mean(msg.rec_vals);
  }

  Point extreme_vertex(const AttributedSet& rec_vals) const {
    const AttributedSet core = elim(elimination_count(inner().params.t, rec_vals.size()), rec_vals);
    const Point* best = nullptr;
    for (const auto& [id, p] : core) {
      if (best == nullptr || dot(p, bias_) > dot(*best, bias_)) best = &p;
    }
    return *best;
  }

  static std::size_t binomial(std::size_t n, std::size_t k) {
    std::size_t result = 1;
    for (std::size_t i = 1; i <= k; ++i) {
      result = result * (n - k + i) / i;
      if (result > kMaxCombinations) return result;
    }
    return result;
  }

  Point bias_;
};

class EquivocatorParticipant final : public Participant {
 public:
  EquivocatorParticipant(std::size_t n, ProtocolMessage first, ProtocolMessage second)
      : n_(n), first_(std::move(first)), second_(std::move(second)) {}

  Reaction start() override {
    std::vector<NodeId> lower;
    std::vector<NodeId> upper;
    for (NodeId i = 0; i < n_; ++i) (i < n_ / 2 ? lower : upper).push_back(i);
    Reaction out;
    out.emissions.push_back({first_, lower, std::nullopt});
    out.emissions.push_back({second_, upper, std::nullopt});
    return out;
  }
  Reaction deliver(NodeId, const ProtocolMessage&) override { return {}; }
  std::string describe() const override { return "equivocator"; }

 private:
  std::size_t n_;
  ProtocolMessage first_;
  ProtocolMessage second_;
};

/// All mirror nodes act as one coalition running two shadow copies of every
/// member. Traffic between shadows of the same side stays inside the coalition.
class MirrorCoalition {
 public:
  MirrorCoalition(const strategy::Mirror& spec, const std::vector<NodeId>& members, const ProtocolParams& params,
                  const ValidityPredicate& predicate, Resilience resilience)
      : spec_(spec), members_(members.begin(), members.end()) {
    sides_[0].group = spec.group_a;
    sides_[0].input = spec.input_a;
    sides_[1].group = spec.group_b;
    sides_[1].input = spec.input_b;
    for (auto& side : sides_) {
      side.group_set.insert(side.group.begin(), side.group.end());
      for (NodeId id : members_) side.shadows.emplace(id, Node(id, params, predicate, resilience));
    }
  }

  const strategy::Mirror& spec() const { return spec_; }

  Reaction start(NodeId member) {
    Reaction out;
    for (std::size_t s = 0; s < 2; ++s) {
      Side& side = sides_[s];
      run(out, s, member, side.shadows.at(member).start(side.input));
    }
    return out;
  }

  Reaction deliver(NodeId member, NodeId from, const ProtocolMessage& msg) {
    Reaction out;
    if (members_.contains(from)) return out;
    for (std::size_t s = 0; s < 2; ++s) {
      Side& side = sides_[s];
      const Side& other = sides_[1 - s];
      if (other.group_set.contains(from) && !side.group_set.contains(from)) continue;
      run(out, s, member, side.shadows.at(member).deliver(from, msg));
    }
    return out;
  }

 private:
  struct Side {
    std::vector<NodeId> group;
    std::set<NodeId> group_set;
    Point input{0.0};
    std::map<NodeId, Node> shadows;
  };

  void run(Reaction& out, std::size_t s, NodeId member, StepOutput first) {
    Side& side = sides_[s];
    std::deque<std::pair<NodeId, ProtocolMessage>> pending;
    for (auto& msg : first.outgoing) pending.emplace_back(member, std::move(msg));
    while (!pending.empty()) {
      auto [sender, msg] = std::move(pending.front());
      pending.pop_front();
      out.emissions.push_back({msg, side.group, sender});
      for (NodeId peer : members_) {
        StepOutput step = side.shadows.at(peer).deliver(sender, msg);
        for (auto& next : step.outgoing) pending.emplace_back(peer, std::move(next));
      }
    }
  }

  strategy::Mirror spec_;
  std::set<NodeId> members_;
  Side sides_[2];
};

class MirrorParticipant final : public Participant {
 public:
  MirrorParticipant(NodeId id, std::shared_ptr<MirrorCoalition> coalition)
      : id_(id), coalition_(std::move(coalition)) {}

  Reaction start() override { return coalition_->start(id_); }
  Reaction deliver(NodeId from, const ProtocolMessage& msg) override { return coalition_->deliver(id_, from, msg); }
  std::string describe() const override { return "mirror"; }

 private:
  NodeId id_;
  std::shared_ptr<MirrorCoalition> coalition_;
};

bool same_mirror(const strategy::Mirror& a, const strategy::Mirror& b) {
  return a.group_a == b.group_a && a.group_b == b.group_b && a.input_a == b.input_a && a.input_b == b.input_b;
}

}  // namespace

Reaction HonestParticipant::start() { return to_reaction(node_.start(input_)); }

Reaction HonestParticipant::deliver(NodeId from, const ProtocolMessage& msg) {
  return to_reaction(node_.deliver(from, msg));
}

std::string strategy_name(const AdversaryStrategy& s) {
  struct Visitor {
    std::string operator()(const strategy::Silent&) const { return "silent"; }
    std::string operator()(const strategy::Crash&) const { return "crash"; }
    std::string operator()(const strategy::ExtremeHonest&) const { return "extreme_honest"; }
    std::string operator()(const strategy::InvalidInput&) const { return "invalid_input"; }
    std::string operator()(const strategy::ForgedVote&) const { return "forged_vote"; }
    std::string operator()(const strategy::SkewedSubset&) const { return "skewed_subset"; }
    std::string operator()(const strategy::Equivocator&) const { return "equivocator"; }
    std::string operator()(const strategy::Mirror&) const { return "mirror"; }
  };
  return std::visit(Visitor{}, s);
}

std::vector<std::unique_ptr<Participant>> make_participants(const ParticipantSetup& setup) {
  const ProtocolParams& params = setup.params;
  if (setup.inputs.size() != params.n) {
    throw UsageError("expected " + std::to_string(params.n) + " inputs, got " + std::to_string(setup.inputs.size()));
  }
  if (setup.adversaries.size() > params.t) throw UsageError("more adversaries than t");

  std::shared_ptr<MirrorCoalition> coalition;
  std::vector<NodeId> mirror_members;
  for (const auto& [id, s] : setup.adversaries) {
    if (id >= params.n) throw UsageError("adversary node " + std::to_string(id) + " out of range");
    if (std::holds_alternative<strategy::Mirror>(s)) mirror_members.push_back(id);
  }
  if (!mirror_members.empty()) {
    const auto& spec = std::get<strategy::Mirror>(setup.adversaries.at(mirror_members.front()));
    require_dimension(spec.input_a, params.m, "mirror input_a");
    require_dimension(spec.input_b, params.m, "mirror input_b");
    for (NodeId id : mirror_members) {
      if (!same_mirror(spec, std::get<strategy::Mirror>(setup.adversaries.at(id)))) {
        throw UsageError("all mirror adversaries must share groups and inputs");
      }
    }
    for (const auto* group : {&spec.group_a, &spec.group_b}) {
      for (NodeId g : *group) {
        if (g >= params.n) throw UsageError("mirror group member out of range");
      }
    }
    coalition = std::make_shared<MirrorCoalition>(spec, mirror_members, params, setup.predicate, setup.resilience);
  }

  std::vector<std::unique_ptr<Participant>> out;
  out.reserve(params.n);
  for (NodeId id = 0; id < params.n; ++id) {
    const Point& input = setup.inputs[id];
    auto node = [&] { return Node(id, params, setup.predicate, setup.resilience); };
    auto it = setup.adversaries.find(id);
    if (it == setup.adversaries.end()) {
      out.push_back(std::make_unique<HonestParticipant>(node(), input));
      continue;
    }
    struct Builder {
      NodeId id;
      const ProtocolParams& params;
      const Point& input;
      decltype(node)& make_node;
      const std::shared_ptr<MirrorCoalition>& coalition;

      std::unique_ptr<Participant> operator()(const strategy::Silent&) const {
        return std::make_unique<SilentParticipant>();
      }
      std::unique_ptr<Participant> operator()(const strategy::Crash& s) const {
        return std::make_unique<CrashParticipant>(make_node(), input, s.after_round);
      }
      std::unique_ptr<Participant> operator()(const strategy::ExtremeHonest& s) const {
        require_dimension(s.target, params.m, "extreme_honest target");
        return std::make_unique<ExtremeHonestParticipant>(make_node(), s.target);
      }
      std::unique_ptr<Participant> operator()(const strategy::InvalidInput& s) const {
        require_dimension(s.v, params.m, "invalid_input value");
        return std::make_unique<InvalidInputParticipant>(make_node(), s.v);
      }
      std::unique_ptr<Participant> operator()(const strategy::ForgedVote& s) const {
        require_dimension(s.perturbation, params.m, "forged_vote perturbation");
        return std::make_unique<ForgedVoteParticipant>(make_node(), input, s.perturbation);
      }
      std::unique_ptr<Participant> operator()(const strategy::SkewedSubset& s) const {
        require_dimension(s.bias, params.m, "skewed_subset bias");
        return std::make_unique<SkewedSubsetParticipant>(make_node(), input, s.bias);
      }
      std::unique_ptr<Participant> operator()(const strategy::Equivocator& s) const {
        if (tag_of(s.first) != tag_of(s.second)) throw UsageError("equivocated messages must share a tag");
        encode(s.first);
        encode(s.second);
        return std::make_unique<EquivocatorParticipant>(params.n, s.first, s.second);
      }
      std::unique_ptr<Participant> operator()(const strategy::Mirror&) const {
        return std::make_unique<MirrorParticipant>(id, coalition);
      }
    };
    out.push_back(std::visit(Builder{id, params, input, node, coalition}, it->second));
  }
  return out;
}

std::string policy_name(const SchedulerPolicy& p) {
  struct Visitor {
    std::string operator()(const sched::Fifo&) const { return "fifo"; }
    std::string operator()(const sched::RandomDelay&) const { return "random_delay"; }
    std::string operator()(const sched::TargetedDelay&) const { return "targeted_delay"; }
    std::string operator()(const sched::PartitionUntil&) const { return "partition_until"; }
  };
  return std::visit(Visitor{}, p);
}

Scheduler::Scheduler(SchedulerPolicy policy, std::uint64_t seed) : policy_(std::move(policy)), rng_(seed) {
  if (const auto* rd = std::get_if<sched::RandomDelay>(&policy_); rd && rd->max_delay == 0) {
    throw UsageError("random_delay max_delay must be at least 1");
  }
  if (const auto* td = std::get_if<sched::TargetedDelay>(&policy_); td && td->delay_factor == 0) {
    throw UsageError("targeted_delay delay_factor must be at least 1");
  }
  if (const auto* pu = std::get_if<sched::PartitionUntil>(&policy_)) {
    for (std::size_t g = 0; g < pu->groups.size(); ++g) {
      for (NodeId id : pu->groups[g]) {
        if (!group_of_.emplace(id, g).second) throw UsageError("partition groups overlap");
      }
    }
  }
}

Time Scheduler::delivery_time(const SendEvent& event) {
  const Time next = event.send_time + 1;
  if (std::holds_alternative<sched::Fifo>(policy_)) return next;
  if (const auto* rd = std::get_if<sched::RandomDelay>(&policy_)) {
    return event.send_time + 1 + rng_() % rd->max_delay;
  }
  if (const auto* td = std::get_if<sched::TargetedDelay>(&policy_)) {
    const bool hit = td->victims.contains(event.src) || td->victims.contains(event.dst);
    return event.send_time + (hit ? td->delay_factor : 1);
  }
  const auto& pu = std::get<sched::PartitionUntil>(policy_);
  auto src = group_of_.find(event.src);
  auto dst = group_of_.find(event.dst);
  if (src != group_of_.end() && dst != group_of_.end() && src->second != dst->second) {
    return std::max(pu.release_time, next);
  }
  return next;
}

}  // namespace vaad
