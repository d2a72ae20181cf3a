#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>

#include "random.hpp"
#include "vaad/errors.hpp"
#include "vaad/protocol.hpp"

namespace vaad {
namespace {

const ProtocolParams kParams{4, 1, 1, 1.0};
const AttributedSet kThree{{0, Point{0}}, {1, Point{1}}, {2, Point{2}}};

std::size_t count_kind(const StepOutput& out, MessageKind kind) {
  return static_cast<std::size_t>(std::count_if(out.outgoing.begin(), out.outgoing.end(),
                                                 [&](const ProtocolMessage& m) { return tag_of(m).kind == kind; }));
}

/// Node 0 after init values {0, 1, 2} and three matching round-0 reports.
Node estimated_node() {
  Node node(0, kParams, ValidityPredicate::always_true());
  node.start(Point{0});
  for (NodeId s = 0; s < 3; ++s) node.on_init_value(s, *kThree.find(s));
  for (NodeId s = 0; s < 3; ++s) node.on_report(s, ReportMsg{kThree, 0});
  return node;
}

/// Node 0 in round 1 after three estimates of 1.
Node running_node(std::uint64_t estimate = 5) {
  Node node = estimated_node();
  for (NodeId s = 0; s < 3; ++s) node.on_enough(s, estimate);
  return node;
}

ReportSet round0_reports() { return ReportSet{{0, kThree}, {1, kThree}, {2, kThree}}; }

TEST(Estimate, MatchesLogarithmOracle) {
  EXPECT_EQ(enough_estimate(0.0, 1.0), 1u);
  // Smallest k with 2^k >= 3D/eps, plus one.
  for (double d : {0.1, 1.0, 9.0, 100.0, 12345.6}) {
    for (double eps : {1.0, 0.1, 0.01, 0.003}) {
      std::uint64_t k = 0;
      while (std::ldexp(1.0, static_cast<int>(k)) < 3.0 * d / eps) ++k;
      EXPECT_EQ(enough_estimate(d, eps), std::max<std::uint64_t>(1, k + 1)) << d << " " << eps;
    }
  }
}

TEST(Estimate, EliminationCountShrinksOnlyForSmallSets) {
  EXPECT_EQ(elimination_count(1, 3), 1u);
  EXPECT_EQ(elimination_count(2, 5), 2u);
  EXPECT_EQ(elimination_count(2, 4), 1u);
  EXPECT_EQ(elimination_count(1, 1), 0u);
  EXPECT_EQ(elimination_count(3, 0), 0u);
}

TEST(Node, ConstructorValidation) {
  EXPECT_THROW(Node(0, {3, 1, 1, 1.0}, ValidityPredicate()), UsageError);
  EXPECT_NO_THROW(Node(0, {3, 1, 1, 1.0}, ValidityPredicate(), Resilience::Unchecked));
  EXPECT_THROW(Node(4, kParams, ValidityPredicate()), UsageError);
  EXPECT_THROW(Node(0, {4, 1, 1, 0.0}, ValidityPredicate()), UsageError);
  EXPECT_THROW(Node(0, {4, 1, 2, 1.0}, ValidityPredicate::simplex(3)), UsageError);
}

TEST(Node, StartBroadcastsInitValueOnce) {
  Node node(0, kParams, ValidityPredicate());
  const StepOutput out = node.start(Point{3});
  ASSERT_EQ(out.outgoing.size(), 1u);
  EXPECT_EQ(out.outgoing[0], ProtocolMessage(InitValueMsg{Point{3}}));
  EXPECT_THROW(node.start(Point{3}), UsageError);
  Node other(1, kParams, ValidityPredicate());
  EXPECT_THROW(other.start(Point{1, 2}), UsageError);
}

TEST(Node, ReportsAfterThresholdInitValues) {
  Node node(0, kParams, ValidityPredicate());
  node.start(Point{0});
  EXPECT_EQ(count_kind(node.on_init_value(0, Point{0}), MessageKind::Report), 0u);
  EXPECT_EQ(count_kind(node.on_init_value(1, Point{1}), MessageKind::Report), 0u);
  const StepOutput out = node.on_init_value(2, Point{2});
  ASSERT_EQ(count_kind(out, MessageKind::Report), 1u);
  EXPECT_EQ(out.outgoing[0], ProtocolMessage(ReportMsg{kThree, 0}));
  EXPECT_EQ(count_kind(node.on_init_value(3, Point{3}), MessageKind::Report), 0u);
  EXPECT_EQ(node.state().values_at(0).size(), 4u);
}

TEST(Node, InvalidInitValuesAreRejected) {
  Node node(0, {4, 1, 2, 1.0}, ValidityPredicate::box({0, 0}, {1, 1}));
  const StepOutput out = node.on_init_value(1, Point{2, 0});
  EXPECT_TRUE(node.state().values_at(0).empty());
  ASSERT_EQ(out.events.size(), 1u);
  EXPECT_EQ(out.events[0].kind, NodeEventKind::Reject);
  node.on_init_value(1, Point{1, 1});
  EXPECT_TRUE(node.state().values_at(0).contains(1));
  node.on_init_value(1, Point{0, 0});
  EXPECT_EQ(*node.state().values_at(0).find(1), (Point{1, 1}));
}

TEST(Node, EstimateUsesEliminatedMean) {
  Node node = estimated_node();
  const NodeState& s = node.state();
  ASSERT_TRUE(s.enough.has_value());
  EXPECT_EQ(*s.enough, enough_estimate(2.0, 1.0));
  EXPECT_EQ(*s.current_vote, Point{1});
  EXPECT_EQ(s.phase, Phase::Init);
}

TEST(Node, HaltIsTPlusFirstSmallestEstimate) {
  Node node = estimated_node();
  node.on_enough(0, 5);
  node.on_enough(1, 4);
  EXPECT_FALSE(node.state().halt.has_value());
  node.on_enough(2, 3);
  EXPECT_EQ(node.state().halt, 4u);
  node.on_enough(2, 1);
  EXPECT_EQ(node.state().halt, 4u) << "repeated sender ignored";
  node.on_enough(3, 1);
  EXPECT_EQ(node.state().halt, 3u);
  EXPECT_EQ(node.state().halt_history, (std::vector<std::uint64_t>{4, 3}));
}

TEST(Node, HaltOracleOnRandomSequences) {
  std::mt19937_64 rng(3);
  const ProtocolParams params{7, 2, 1, 1.0};
  for (int iter = 0; iter < 200; ++iter) {
    Node node(0, params, ValidityPredicate());
    std::vector<std::uint64_t> seen;
    for (NodeId s = 0; s < 7; ++s) {
      const std::uint64_t e = testing::pick(rng, 1, 9);
      node.on_enough(s, e);
      seen.push_back(e);
      if (seen.size() >= 5) {
        std::vector<std::uint64_t> sorted = seen;
        std::sort(sorted.begin(), sorted.end());
        EXPECT_EQ(node.state().halt, sorted[2]);
      } else {
        EXPECT_FALSE(node.state().halt.has_value());
      }
    }
  }
}

TEST(Node, LeavesInitWithVoteAndRoundOneReport) {
  Node node = estimated_node();
  node.on_enough(0, 5);
  node.on_enough(1, 5);
  const StepOutput out = node.on_enough(2, 5);
  EXPECT_EQ(node.state().r, 1u);
  EXPECT_EQ(node.state().phase, Phase::Running);
  ASSERT_EQ(count_kind(out, MessageKind::Value), 1u);
  const auto& value = std::get<ValueMsg>(out.outgoing[0]);
  EXPECT_EQ(value.v, Point{1});
  EXPECT_EQ(value.rec_vals, kThree);
  EXPECT_EQ(value.rec_reps, round0_reports());
}

TEST(Node, ValueReadiness) {
  Node init = estimated_node();
  const ValueMsg round1{Point{1}, kThree, round0_reports(), 1};
  EXPECT_FALSE(value_message_ready(init.state(), round1, 1)) << "still in round 0";

  Node node = running_node();
  const NodeState& s = node.state();
  EXPECT_TRUE(value_message_ready(s, round1, 1));
  EXPECT_TRUE(value_message_ready(s, {Point{1 + 1e-15}, kThree, round0_reports(), 1}, 1));
  EXPECT_FALSE(value_message_ready(s, {Point{0}, kThree, round0_reports(), 1}, 1)) << "outside elim core";
  EXPECT_FALSE(value_message_ready(s, {Point{1}, kThree, ReportSet{{0, kThree}}, 1}, 1)) << "too few reports";
  const AttributedSet other{{0, Point{0}}, {1, Point{1}}, {3, Point{9}}};
  EXPECT_FALSE(value_message_ready(s, {Point{1}, other, ReportSet{{0, other}, {1, other}, {2, other}}, 1}, 1))
      << "value from node 3 never accepted";
  EXPECT_FALSE(value_message_ready(s, round1, 7)) << "sender out of range";
}

TEST(Node, LaterRoundsRequireBitExactMean) {
  const ProtocolParams p = kParams;
  const AttributedSet votes{{0, Point{0.1}}, {1, Point{0.2}}, {2, Point{0.7}}};
  const ReportSet reps{{0, votes}, {1, votes}, {2, votes}};
  const Point mean = vote_mean(votes);
  EXPECT_TRUE(value_message_consistent(p, {mean, votes, reps, 2}));
  const Point nudged{std::nextafter(mean[0], 1.0)};
  EXPECT_FALSE(value_message_consistent(p, {nudged, votes, reps, 2}));
  EXPECT_FALSE(value_message_consistent(p, {Point{mean[0] + 1e-15}, votes, reps, 2}));
}

TEST(Node, WaitingReportIsRetried) {
  Node node(0, kParams, ValidityPredicate());
  node.on_init_value(0, Point{0});
  node.on_init_value(1, Point{1});
  node.on_report(1, ReportMsg{kThree, 0});
  EXPECT_EQ(node.state().waiting_reports.size(), 1u);
  EXPECT_TRUE(node.state().reports_at(0).empty());
  node.on_init_value(2, Point{2});
  EXPECT_TRUE(node.state().waiting_reports.empty());
  EXPECT_TRUE(node.state().reports_at(0).contains(1));
}

TEST(Node, EarlyValueWaitsForRound) {
  Node node = estimated_node();
  node.on_value(1, ValueMsg{Point{1}, kThree, round0_reports(), 1});
  EXPECT_EQ(node.state().waiting_values.size(), 1u);
  for (NodeId s = 0; s < 3; ++s) node.on_enough(s, 5);
  EXPECT_TRUE(node.state().waiting_values.empty());
  EXPECT_EQ(*node.state().values_at(1).find(1), Point{1});
}

TEST(Node, InconsistentValueIsRejectedImmediately) {
  Node node = running_node();
  const StepOutput out = node.on_value(1, ValueMsg{Point{5}, kThree, round0_reports(), 1});
  EXPECT_TRUE(node.state().waiting_values.empty());
  ASSERT_FALSE(out.events.empty());
  EXPECT_EQ(out.events[0].kind, NodeEventKind::Reject);
}

TEST(Node, TerminatesAtHaltAndIgnoresLaterMessages) {
  Node node = running_node(1);
  EXPECT_EQ(node.state().phase, Phase::Terminated);
  EXPECT_EQ(node.state().output, Point{1});
  EXPECT_TRUE(node.deliver(3, InitValueMsg{Point{4}}).outgoing.empty());
  EXPECT_FALSE(node.state().values_at(0).contains(3));
}

/// All-honest network with a FIFO queue of (from, to, message).
std::vector<Point> run_honest(const ProtocolParams& params, const std::vector<Point>& inputs, std::mt19937_64* shuffle) {
  std::vector<Node> nodes;
  for (NodeId i = 0; i < params.n; ++i) nodes.emplace_back(i, params, ValidityPredicate());
  struct Pending {
    NodeId from;
    NodeId to;
    ProtocolMessage msg;
  };
  std::deque<Pending> queue;
  auto send_all = [&](NodeId from, const StepOutput& out) {
    for (const auto& m : out.outgoing) {
      for (NodeId to = 0; to < params.n; ++to) queue.push_back({from, to, m});
    }
  };
  for (NodeId i = 0; i < params.n; ++i) send_all(i, nodes[i].start(inputs[i]));
  std::size_t steps = 0;
  while (!queue.empty() && steps++ < 1'000'000) {
    std::size_t pick = 0;
    if (shuffle != nullptr) pick = testing::pick(*shuffle, 0, std::min<std::size_t>(queue.size() - 1, 8));
    Pending p = queue[pick];
    queue.erase(queue.begin() + static_cast<std::ptrdiff_t>(pick));
    send_all(p.to, nodes[p.to].deliver(p.from, p.msg));
  }
  std::vector<Point> outputs;
  for (const Node& node : nodes) {
    EXPECT_EQ(node.state().phase, Phase::Terminated);
    if (node.state().output) outputs.push_back(*node.state().output);
  }
  return outputs;
}

TEST(HonestRun, IdenticalInputsGiveThatInputWithEstimateOne) {
  const std::vector<Point> inputs(4, Point{2.5, -1.0});
  const auto outputs = run_honest({4, 1, 2, 0.1}, inputs, nullptr);
  ASSERT_EQ(outputs.size(), 4u);
  for (const Point& out : outputs) EXPECT_EQ(out, (Point{2.5, -1.0}));
}

TEST(HonestRun, OutputsAgreeAndStayInHull) {
  std::mt19937_64 rng(21);
  for (int iter = 0; iter < 30; ++iter) {
    const ProtocolParams params{7, 2, 2, 0.05};
    std::vector<Point> inputs;
    AttributedSet all;
    for (NodeId i = 0; i < params.n; ++i) {
      inputs.push_back(testing::random_point(rng, params.m, 10.0));
      all.insert(i, inputs.back());
    }
    const auto outputs = run_honest(params, inputs, &rng);
    ASSERT_EQ(outputs.size(), params.n);
    for (const Point& a : outputs) {
      EXPECT_TRUE(in_hull(a, all, 1e-7));
      for (const Point& b : outputs) EXPECT_LE(distance(a, b), params.epsilon);
    }
  }
}

}  // namespace
}  // namespace vaad
