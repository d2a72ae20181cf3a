#include <gtest/gtest.h>

#include "vaad/adversary.hpp"
#include "vaad/errors.hpp"
#include "vaad/sim.hpp"

namespace vaad {
namespace {

TEST(Scheduler, FifoDeliversNextTick) {
  Scheduler s(sched::Fifo{}, 1);
  EXPECT_EQ(s.delivery_time({0, 0, 1, 0}), 1u);
  EXPECT_EQ(s.delivery_time({41, 2, 3, 9}), 42u);
}

TEST(Scheduler, PartitionHoldsCrossTrafficUntilRelease) {
  Scheduler s(sched::PartitionUntil{{{0, 1}, {2, 3}}, 100}, 1);
  EXPECT_EQ(s.delivery_time({5, 0, 2, 0}), 100u);
  EXPECT_EQ(s.delivery_time({5, 0, 1, 1}), 6u);
  EXPECT_EQ(s.delivery_time({5, 4, 2, 2}), 6u) << "node outside every group";
  EXPECT_EQ(s.delivery_time({150, 3, 0, 3}), 151u);
}

TEST(Scheduler, TargetedDelayScalesVictimTraffic) {
  Scheduler s(sched::TargetedDelay{{2}, 25}, 1);
  EXPECT_EQ(s.delivery_time({10, 2, 0, 0}), 35u);
  EXPECT_EQ(s.delivery_time({10, 0, 2, 0}), 35u);
  EXPECT_EQ(s.delivery_time({10, 0, 1, 0}), 11u);
}

TEST(Scheduler, RandomDelayIsBoundedAndSeedDeterministic) {
  Scheduler a(sched::RandomDelay{7}, 99);
  Scheduler b(sched::RandomDelay{7}, 99);
  Scheduler c(sched::RandomDelay{7}, 100);
  bool differs = false;
  for (std::uint64_t i = 0; i < 500; ++i) {
    const SendEvent e{i, 0, 1, i};
    const Time ta = a.delivery_time(e);
    EXPECT_EQ(ta, b.delivery_time(e));
    EXPECT_GE(ta, i + 1);
    EXPECT_LE(ta, i + 7);
    differs = differs || ta != c.delivery_time(e);
  }
  EXPECT_TRUE(differs);
}

TEST(Scheduler, RejectsBadPolicies) {
  EXPECT_THROW(Scheduler(sched::RandomDelay{0}, 1), UsageError);
  EXPECT_THROW(Scheduler(sched::TargetedDelay{{0}, 0}, 1), UsageError);
  EXPECT_THROW(Scheduler(sched::PartitionUntil{{{0, 1}, {1, 2}}, 5}, 1), UsageError);
}

ParticipantSetup setup4() {
  return {{4, 1, 1, 0.1}, ValidityPredicate::box({0}, {10}), {Point{0}, Point{1}, Point{2}, Point{3}}, {}};
}

TEST(Participants, SetupValidation) {
  ParticipantSetup s = setup4();
  s.inputs.pop_back();
  EXPECT_THROW(make_participants(s), UsageError);

  s = setup4();
  s.adversaries = {{0, strategy::Silent{}}, {1, strategy::Silent{}}};
  EXPECT_THROW(make_participants(s), UsageError) << "more than t adversaries";

  s = setup4();
  s.adversaries = {{3, strategy::Equivocator{InitValueMsg{Point{1}}, EnoughMsg{2}}}};
  EXPECT_THROW(make_participants(s), UsageError) << "different tags";

  s = setup4();
  s.adversaries = {{3, strategy::ForgedVote{Point{1, 1}}}};
  EXPECT_THROW(make_participants(s), UsageError) << "wrong dimension";

  s = setup4();
  s.adversaries = {{2, strategy::Silent{}}};
  const auto ps = make_participants(s);
  ASSERT_EQ(ps.size(), 4u);
  EXPECT_TRUE(ps[0]->correct());
  EXPECT_FALSE(ps[2]->correct());
  EXPECT_FALSE(ps[2]->relays());
  EXPECT_TRUE(ps[2]->start().emissions.empty());
}

SimConfig config_with(AdversaryStrategy adversary, BroadcastMode mode = BroadcastMode::Ideal) {
  SimConfig c;
  c.params = {4, 1, 1, 0.1};
  c.seed = 5;
  c.broadcast = mode;
  c.inputs = std::vector<Point>{Point{0}, Point{4}, Point{8}, Point{2}};
  c.validity = ValidityPredicate::box({0}, {10});
  c.scheduler = sched::RandomDelay{4};
  c.adversaries = {{3, std::move(adversary)}};
  return c;
}

TEST(Strategies, ForgedVotesNeverAcceptedPastRoundZero) {
  const SimResult r = run(config_with(strategy::ForgedVote{Point{0.25}}));
  EXPECT_TRUE(r.passed());
  for (const auto& [id, state] : r.states) {
    for (const auto& [round, vals] : state.values) {
      if (round >= 2) EXPECT_FALSE(vals.contains(3)) << "node " << id << " round " << round;
    }
  }
}

TEST(Strategies, InvalidInputNeverEntersViews) {
  const SimResult r = run(config_with(strategy::InvalidInput{Point{50}}));
  EXPECT_TRUE(r.passed());
  for (const auto& [id, state] : r.states) EXPECT_FALSE(state.values_at(0).contains(3));
}

TEST(Strategies, SilentMinorityDoesNotBlockTermination) {
  for (BroadcastMode mode : {BroadcastMode::Ideal, BroadcastMode::Bracha}) {
    const SimResult r = run(config_with(strategy::Silent{}, mode));
    EXPECT_TRUE(r.passed());
    EXPECT_TRUE(r.all_terminated);
    EXPECT_EQ(r.outputs.size(), 3u);
  }
}

TEST(Strategies, CrashedNodeStopsAfterItsRound) {
  SimConfig c = config_with(strategy::Crash{1});
  c.run_to_quiescence = true;
  const SimResult r = run(c);
  EXPECT_TRUE(r.passed());
  for (const auto& [id, state] : r.states) {
    for (const auto& [round, vals] : state.values) {
      if (round >= 2) EXPECT_FALSE(vals.contains(3));
    }
  }
}

TEST(Strategies, IdealChannelKeepsFirstEquivocatedPayload) {
  const SimResult r = run(config_with(strategy::Equivocator{InitValueMsg{Point{1}}, InitValueMsg{Point{9}}}));
  EXPECT_TRUE(r.passed());
  for (const auto& [id, state] : r.states) {
    const Point* p = state.values_at(0).find(3);
    if (p != nullptr) EXPECT_EQ(*p, Point{1});
  }
}

TEST(Strategies, BrachaEquivocationYieldsOneValueAtMost) {
  SimConfig c = config_with(strategy::Equivocator{InitValueMsg{Point{1}}, InitValueMsg{Point{9}}},
                            BroadcastMode::Bracha);
  c.run_to_quiescence = true;
  const SimResult r = run(c);
  EXPECT_TRUE(r.passed());
  std::optional<Point> seen;
  for (const auto& [id, state] : r.states) {
    const Point* p = state.values_at(0).find(3);
    if (p == nullptr) continue;
    if (seen) EXPECT_EQ(*p, *seen);
    seen = *p;
  }
}

TEST(Strategies, ExtremeAndSkewedStayWithinBounds) {
  for (AdversaryStrategy s : {AdversaryStrategy(strategy::ExtremeHonest{Point{10}}),
                              AdversaryStrategy(strategy::SkewedSubset{Point{1}}),
                              AdversaryStrategy(strategy::SkewedSubset{Point{-1}})}) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      SimConfig c = config_with(s);
      c.seed = seed;
      const SimResult r = run(c);
      EXPECT_TRUE(r.passed()) << strategy_name(s) << " seed " << seed
                              << (r.violations.empty() ? "" : ": " + r.violations[0].detail);
      EXPECT_LE(r.max_pairwise_output(), 0.1);
    }
  }
}

TEST(Strategies, NamesAreStable) {
  EXPECT_EQ(strategy_name(strategy::Silent{}), "silent");
  EXPECT_EQ(strategy_name(strategy::SkewedSubset{Point{1}}), "skewed_subset");
  EXPECT_EQ(policy_name(sched::PartitionUntil{}), "partition_until");
}

}  // namespace
}  // namespace vaad
