#include "vaad/sim.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <numeric>
#include <queue>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "vaad/digest.hpp"
#include "vaad/errors.hpp"

namespace vaad {

namespace {

using nlohmann::json;

constexpr double kShrinkSlack = 1e-9;
constexpr double kValidityTolerance = 1e-7;

/// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::mt19937_64 input_rng(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x1a2b3c4du};
  return std::mt19937_64(seq);
}

json point_json(const Point& p) { return json(std::vector<double>(p.coords().begin(), p.coords().end())); }

struct Envelope {
  Time time = 0;
  std::uint64_t seq = 0;
  NodeId src = 0;
  NodeId dst = 0;
  BroadcastInstanceId instance;
  Digest digest;
  std::shared_ptr<const ProtocolMessage> msg;  // ideal channel
  std::optional<LinkMessage> link;             // Bracha links
};

struct Later {
  bool operator()(const Envelope& a, const Envelope& b) const {
    return std::tie(a.time, a.seq) > std::tie(b.time, b.seq);
  }
};

class Engine {
 public:
  explicit Engine(const SimConfig& config)
      : config_(config),
        inputs_(resolve_inputs(config)),
        scheduler_(config.scheduler, config.seed),
        channel_(!config.lower_bound_demo) {
    ParticipantSetup setup{config.params, config.validity, inputs_, config.adversaries,
                           config.lower_bound_demo ? Resilience::Unchecked : Resilience::Enforced};
    participants_ = make_participants(setup);
    if (config.broadcast == BroadcastMode::Bracha) {
      for (NodeId i = 0; i < config.params.n; ++i) rbc_.emplace_back(i, config.params.n, config.params.t);
    }
    for (NodeId i = 0; i < config.params.n; ++i) {
      if (participants_[i]->correct()) correct_.push_back(i);
    }
  }

  SimResult run() {
    for (NodeId i = 0; i < config_.params.n; ++i) {
      trace({{"time", now_}, {"type", "start"}, {"node", i}, {"role", participants_[i]->describe()}});
      handle(i, participants_[i]->start());
    }
    std::optional<std::string> stall;
    while (!queue_.empty()) {
      if (!config_.run_to_quiescence && outputs_.size() == correct_.size()) break;
      if (events_ >= config_.max_events) {
        stall = "event cap of " + std::to_string(config_.max_events) + " reached";
        break;
      }
      Envelope env = queue_.top();
      queue_.pop();
      now_ = env.time;
      ++events_;
      if (env.link) {
        process_link(env);
      } else {
        process_ideal(env);
      }
    }
    if (!stall && outputs_.size() < correct_.size()) stall = "no deliveries pending";
    return finish(stall);
  }

 private:
  void trace(const json& line) {
    std::string text = line.dump();
    hasher_.update(text);
    hasher_.update(std::string_view("\n"));
    if (config_.record_trace) trace_.push_back(std::move(text));
  }

  void push(NodeId src, NodeId dst, Envelope env) {
    env.seq = seq_++;
    env.src = src;
    env.dst = dst;
    env.time = scheduler_.delivery_time({now_, src, dst, env.seq});
    queue_.push(std::move(env));
  }

  std::vector<NodeId> everyone() const {
    std::vector<NodeId> all(config_.params.n);
    std::iota(all.begin(), all.end(), NodeId{0});
    return all;
  }

  void handle(NodeId node, Reaction reaction) {
    const bool correct = participants_[node]->correct();
    if (correct) {
      std::size_t sends = 0;
      for (const NodeEvent& ev : reaction.events) {
        json line{{"time", now_},       {"type", "event"},     {"node", node},
                  {"event", to_string(ev.kind)}, {"round", ev.round}, {"subject", ev.subject},
                  {"message", to_string(ev.message_kind)}};
        if (ev.kind == NodeEventKind::Send && sends < reaction.emissions.size()) {
          line["digest"] = sha256_hex(encode(reaction.emissions[sends++].msg));
        }
        if (ev.diameter) line["diameter"] = *ev.diameter;
        if (ev.halt) line["halt"] = *ev.halt;
        trace(line);
      }
      if (reaction.output && !outputs_.contains(node)) {
        outputs_.emplace(node, *reaction.output);
        trace({{"time", now_},
               {"type", "output"},
               {"node", node},
               {"round", participants_[node]->node()->state().r},
               {"v", point_json(*reaction.output)}});
      }
    }
    for (Emission& em : reaction.emissions) {
      if (correct) record_vote(node, em.msg);
      emit(node, em);
    }
  }

  void record_vote(NodeId node, const ProtocolMessage& msg) {
    if (const auto* init = std::get_if<InitValueMsg>(&msg)) votes_[0].emplace(node, init->v);
    if (const auto* value = std::get_if<ValueMsg>(&msg)) votes_[value->round].emplace(node, value->v);
  }

  void emit(NodeId node, const Emission& em) {
    const NodeId sender = em.sender.value_or(node);
    auto bytes = std::make_shared<const Bytes>(encode(em.msg));
    const Digest digest = sha256_hex(*bytes);
    const BroadcastInstanceId instance{sender, tag_of(em.msg)};
    json line{{"time", now_},
              {"sender", sender},
              {"kind", to_string(instance.tag.kind)},
              {"round", instance.tag.round},
              {"digest", digest}};

    if (config_.broadcast == BroadcastMode::Ideal) {
      if (!channel_.admit(instance)) {
        line["type"] = "suppressed";
        trace(line);
        return;
      }
      const bool targeted = em.recipients && !channel_.enforces_uniqueness();
      const std::vector<NodeId> recipients = targeted ? *em.recipients : everyone();
      line["type"] = "broadcast";
      line["recipients"] = recipients;
      line["payload"] = to_hex(*bytes);
      trace(line);
      auto msg = std::make_shared<const ProtocolMessage>(em.msg);
      for (NodeId dst : recipients) {
        Envelope env;
        env.instance = instance;
        env.digest = digest;
        env.msg = msg;
        push(sender, dst, std::move(env));
      }
      return;
    }

    const std::vector<NodeId> recipients = em.recipients ? *em.recipients : everyone();
    line["type"] = "broadcast";
    line["recipients"] = recipients;
    line["payload"] = to_hex(*bytes);
    trace(line);
    LinkMessage send = make_send(instance, std::move(bytes));
    for (NodeId dst : recipients) {
      Envelope env;
      env.instance = instance;
      env.digest = digest;
      env.link = send;
      push(sender, dst, std::move(env));
    }
  }

  void deliver(NodeId dst, const BroadcastInstanceId& instance, const Digest& digest, const ProtocolMessage& msg) {
    if (participants_[dst]->correct()) ledger_.record(dst, instance, digest);
    trace({{"time", now_},
           {"type", "deliver"},
           {"node", dst},
           {"sender", instance.sender},
           {"kind", to_string(instance.tag.kind)},
           {"round", instance.tag.round},
           {"digest", digest}});
    handle(dst, participants_[dst]->deliver(instance.sender, msg));
  }

  void process_ideal(const Envelope& env) { deliver(env.dst, env.instance, env.digest, *env.msg); }

  void process_link(const Envelope& env) {
    Participant& p = *participants_[env.dst];
    if (!p.correct() && !p.relays()) return;
    const LinkMessage& link = *env.link;
    trace({{"time", now_},
           {"type", "link"},
           {"link", to_string(link.kind)},
           {"src", env.src},
           {"dst", env.dst},
           {"sender", link.instance.sender},
           {"kind", to_string(link.instance.tag.kind)},
           {"round", link.instance.tag.round},
           {"digest", link.digest}});
    RbcOutput out = rbc_step(rbc_[env.dst], env.src, link);
    for (const LinkMessage& next : out.outgoing) {
      for (NodeId j = 0; j < config_.params.n; ++j) {
        Envelope e;
        e.instance = next.instance;
        e.digest = next.digest;
        e.link = next;
        push(env.dst, j, std::move(e));
      }
    }
    if (!out.delivery) return;
    std::optional<ProtocolMessage> msg;
    try {
      msg = decode(*out.delivery->payload);
    } catch (const DecodeError& e) {
      trace({{"time", now_}, {"type", "undecodable"}, {"node", env.dst}, {"error", e.what()}});
      return;
    }
    // A delivered payload whose tag disagrees with the instance is out of protocol.
    if (tag_of(*msg) != out.delivery->instance.tag) return;
    deliver(env.dst, out.delivery->instance, out.delivery->digest, *msg);
  }

  SimResult finish(const std::optional<std::string>& stall);

  const SimConfig& config_;
  std::vector<Point> inputs_;
  Scheduler scheduler_;
  IdealChannel channel_;
  std::vector<std::unique_ptr<Participant>> participants_;
  std::vector<RbcState> rbc_;
  std::vector<NodeId> correct_;
  std::priority_queue<Envelope, std::vector<Envelope>, Later> queue_;
  std::map<NodeId, Point> outputs_;
  std::map<Round, std::map<NodeId, Point>> votes_;
  DeliveryLedger ledger_;
  Sha256 hasher_;
  std::vector<std::string> trace_;
  Time now_ = 0;
  std::uint64_t seq_ = 0;
  std::uint64_t events_ = 0;
};

/// Union of the correct nodes' values[round] and their own broadcasts for that
/// round, as a plain point collection.
AttributedSet union_at(const SimResult& result, Round round) {
  std::vector<Point> points;
  for (const auto& [id, state] : result.states) {
    for (const auto& [sender, p] : state.values_at(round)) points.push_back(p);
  }
  if (auto it = result.correct_votes.find(round); it != result.correct_votes.end()) {
    for (const auto& [id, p] : it->second) points.push_back(p);
  }
  return AttributedSet::enumerate(points);
}

Round last_round(const SimResult& result) {
  Round last = 0;
  for (const auto& [id, state] : result.states) {
    if (!state.values.empty()) last = std::max(last, state.values.rbegin()->first);
  }
  if (!result.correct_votes.empty()) last = std::max(last, result.correct_votes.rbegin()->first);
  return last;
}

void check_monitors(const SimConfig& config, SimResult& result) {
  const MonitorToggles& on = config.monitors;
  const ProtocolParams& params = config.params;
  auto fail = [&](std::string monitor, std::string detail) {
    result.violations.push_back({std::move(monitor), std::move(detail)});
  };

  const Round last = last_round(result);
  std::vector<AttributedSet> unions;
  for (Round r = 0; r <= last; ++r) {
    unions.push_back(union_at(result, r));
    result.union_diameters.push_back(unions.back().empty() ? 0.0 : diameter(unions.back()));
  }

  if (on.shrinking_diameter) {
    for (Round r = 1; r + 1 < unions.size(); ++r) {
      if (unions[r + 1].empty()) continue;
      const double before = result.union_diameters[r];
      const double after = result.union_diameters[r + 1];
      if (after > 0.5 * before + kShrinkSlack) {
        fail("shrinking_diameter", "round " + std::to_string(r + 1) + " diameter " + format_double(after) +
                                       " exceeds half of " + format_double(before));
      }
    }
  }

  if (on.viewpoint_intersection) {
    const std::size_t quorum = params.n - params.t;
    for (Round r = 1; r <= last; ++r) {
      std::vector<std::pair<NodeId, const AttributedSet*>> views;
      for (const auto& [id, state] : result.states) {
        auto it = state.value_views.find(r);
        if (it == state.value_views.end()) continue;
        for (const auto& [sender, view] : it->second) views.emplace_back(sender, &view);
      }
      bool broken = false;
      for (std::size_t a = 0; a < views.size() && !broken; ++a) {
        for (std::size_t b = a + 1; b < views.size() && !broken; ++b) {
          if (views[a].second->intersection_size(*views[b].second) < quorum) {
            fail("viewpoint_intersection", "round " + std::to_string(r) + " views of nodes " +
                                               std::to_string(views[a].first) + " and " +
                                               std::to_string(views[b].first) + " share fewer than " +
                                               std::to_string(quorum) + " values");
            broken = true;
          }
        }
      }
    }
  }

  if (on.initial_diameter && unions.size() > 1 && !unions[1].empty()) {
    std::optional<double> smallest;
    for (const auto& [id, state] : result.states) {
      if (state.init_diameter) smallest = std::min(smallest.value_or(*state.init_diameter), *state.init_diameter);
    }
    if (smallest && result.union_diameters[1] > 3.0 * *smallest + kShrinkSlack) {
      fail("initial_diameter", "round 1 diameter " + format_double(result.union_diameters[1]) +
                                   " exceeds three times " + format_double(*smallest));
    }
  }

  if (on.validity && !unions.empty() && !unions[0].empty()) {
    const AttributedSet& valid = unions[0];
    bool reported = false;
    for (Round r = 1; r < unions.size() && !reported; ++r) {
      for (const auto& [k, p] : unions[r]) {
        if (!in_hull(p, valid, kValidityTolerance)) {
          fail("validity", "a round " + std::to_string(r) + " value leaves the hull of valid inputs");
          reported = true;
          break;
        }
      }
    }
    for (const auto& [id, out] : result.outputs) {
      if (!in_hull(out, valid, kValidityTolerance)) {
        fail("validity", "output of node " + std::to_string(id) + " leaves the hull of valid inputs");
      }
    }
  }

  if (on.delta_validity && config.validity.is_always_true() && unions.size() > 1) {
    AttributedSet inputs;
    for (NodeId id : result.correct) inputs.insert(id, result.inputs[id]);
    const double radius = diameter(inputs) + kShrinkSlack;
    for (const auto& [k, p] : unions[1]) {
      double nearest = std::numeric_limits<double>::infinity();
      for (const auto& [id, x] : inputs) nearest = std::min(nearest, distance(p, x));
      if (nearest > radius) {
        fail("delta_validity", "a round 1 value is " + format_double(nearest) + " away from every correct input");
        break;
      }
    }
  }

  if (on.correctness) {
    const double spread = result.max_pairwise_output();
    if (spread > params.epsilon) {
      fail("correctness", "outputs are " + format_double(spread) + " apart, epsilon is " +
                              format_double(params.epsilon));
    }
  }

  if (on.round_bound && !unions.empty() && !unions[0].empty()) {
    const std::uint64_t bound = enough_estimate(result.union_diameters[0], params.epsilon);
    for (const auto& [id, r] : result.final_rounds) {
      if (r > bound) {
        fail("round_bound", "node " + std::to_string(id) + " reached round " + std::to_string(r) +
                                ", bound is " + std::to_string(bound));
      }
    }
  }

  if (on.halt_monotonic) {
    for (const auto& [id, state] : result.states) {
      if (!std::is_sorted(state.halt_history.rbegin(), state.halt_history.rend())) {
        fail("halt_monotonic", "halt of node " + std::to_string(id) + " increased");
      }
    }
  }

  if (on.broadcast) {
    for (const auto& id : result.deliveries.uniqueness_violations()) {
      fail("broadcast_uniqueness", "correct nodes delivered different payloads from node " +
                                       std::to_string(id.sender) + " for " + to_string(id.tag.kind) + " round " +
                                       std::to_string(id.tag.round));
    }
    if (config.run_to_quiescence) {
      const std::set<NodeId> correct(result.correct.begin(), result.correct.end());
      for (const auto& id : result.deliveries.agreement_gaps(correct)) {
        fail("broadcast_agreement", "not every correct node delivered " + std::string(to_string(id.tag.kind)) +
                                        " round " + std::to_string(id.tag.round) + " from node " +
                                        std::to_string(id.sender));
      }
    }
  }
}

SimResult Engine::finish(const std::optional<std::string>& stall) {
  SimResult result;
  result.inputs = inputs_;
  result.correct = correct_;
  result.outputs = outputs_;
  result.correct_votes = votes_;
  for (NodeId id : correct_) {
    const NodeState& state = participants_[id]->node()->state();
    result.states.emplace(id, state);
    if (state.phase == Phase::Terminated) result.final_rounds.emplace(id, state.r);
  }
  result.events = events_;
  result.end_time = now_;
  result.trace_digest = hasher_.hex_digest();
  result.trace = std::move(trace_);
  result.deliveries = ledger_;
  result.all_terminated = outputs_.size() == correct_.size();
  if (stall && config_.monitors.liveness) {
    result.violations.push_back({"liveness", std::to_string(correct_.size() - outputs_.size()) +
                                                 " correct nodes did not terminate: " + *stall});
  }
  check_monitors(config_, result);
  return result;
}

}  // namespace

const char* to_string(BroadcastMode mode) { return mode == BroadcastMode::Ideal ? "ideal" : "bracha"; }

std::string format_double(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return ec == std::errc() ? std::string(buf, end) : std::string("nan");
}

Round SimResult::max_round() const {
  Round r = 0;
  for (const auto& [id, round] : final_rounds) r = std::max(r, round);
  return r;
}

double SimResult::max_pairwise_output() const {
  double best = 0.0;
  for (auto a = outputs.begin(); a != outputs.end(); ++a) {
    for (auto b = std::next(a); b != outputs.end(); ++b) best = std::max(best, distance(a->second, b->second));
  }
  return best;
}

std::vector<RoundMetrics> SimResult::metrics() const {
  std::vector<RoundMetrics> rows;
  for (Round r = 0; r < union_diameters.size(); ++r) {
    RoundMetrics row{r, union_diameters[r], 0.0, 0};
    std::vector<const Point*> done;
    for (const auto& [id, round] : final_rounds) {
      if (round <= r) done.push_back(&outputs.at(id));
    }
    row.nodes_terminated = done.size();
    for (std::size_t i = 0; i < done.size(); ++i) {
      for (std::size_t j = i + 1; j < done.size(); ++j) {
        row.max_pairwise_output = std::max(row.max_pairwise_output, distance(*done[i], *done[j]));
      }
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<Point> resolve_inputs(const SimConfig& config) {
  const ProtocolParams& params = config.params;
  if (const auto* explicit_points = std::get_if<std::vector<Point>>(&config.inputs)) {
    if (explicit_points->size() != params.n) {
      throw ConfigError("/inputs", "expected " + std::to_string(params.n) + " points, got " +
                                       std::to_string(explicit_points->size()));
    }
    for (std::size_t i = 0; i < explicit_points->size(); ++i) {
      if ((*explicit_points)[i].dimension() != params.m) {
        throw ConfigError("/inputs/" + std::to_string(i), "dimension must be " + std::to_string(params.m));
      }
    }
    return *explicit_points;
  }
  std::mt19937_64 rng = input_rng(config.seed);
  std::vector<Point> out;
  if (const auto* box = std::get_if<inputs::UniformBox>(&config.inputs)) {
    if (box->lo.size() != params.m || box->hi.size() != params.m) {
      throw ConfigError("/inputs", "box bounds must have dimension " + std::to_string(params.m));
    }
    for (std::size_t k = 0; k < params.m; ++k) {
      if (!(box->lo[k] <= box->hi[k]) || !std::isfinite(box->lo[k]) || !std::isfinite(box->hi[k])) {
        throw ConfigError("/inputs", "box bounds must be finite with lo <= hi");
      }
    }
    for (std::size_t i = 0; i < params.n; ++i) {
      std::vector<double> c(params.m);
      for (std::size_t k = 0; k < params.m; ++k) c[k] = box->lo[k] + unit(rng) * (box->hi[k] - box->lo[k]);
      out.emplace_back(std::move(c));
    }
    return out;
  }
  for (std::size_t i = 0; i < params.n; ++i) {
    std::vector<double> c(params.m);
    for (double& x : c) x = -std::log1p(-unit(rng));
    const double total = std::accumulate(c.begin(), c.end(), 0.0);
    if (total > 0.0) {
      for (double& x : c) x /= total;
    } else {
      std::fill(c.begin(), c.end(), 1.0 / static_cast<double>(params.m));
    }
    out.emplace_back(std::move(c));
  }
  return out;
}

void validate(const SimConfig& config) {
  const ProtocolParams& p = config.params;
  if (p.n == 0) throw ConfigError("/n", "must be positive");
  if (p.m == 0) throw ConfigError("/m", "must be positive");
  if (p.t >= p.n) throw ConfigError("/t", "must be smaller than n");
  if (!config.lower_bound_demo && p.n < 3 * p.t + 1) {
    throw ConfigError("/t", "n = " + std::to_string(p.n) + " requires t <= " + std::to_string((p.n - 1) / 3) +
                                " (set lower_bound_demo to run below the resilience bound)");
  }
  if (!(p.epsilon > 0.0) || !std::isfinite(p.epsilon)) throw ConfigError("/epsilon", "must be positive and finite");
  if (config.max_events == 0) throw ConfigError("/max_events", "must be positive");
  if (config.adversaries.size() > p.t) {
    throw ConfigError("/adversaries", "at most t = " + std::to_string(p.t) + " adversaries allowed");
  }
  for (const auto& [id, s] : config.adversaries) {
    if (id >= p.n) throw ConfigError("/adversaries", "node " + std::to_string(id) + " out of range");
  }
  if (config.validity.dimension() != 0 && config.validity.dimension() != p.m) {
    throw ConfigError("/validity", "dimension must be " + std::to_string(p.m));
  }
  try {
    Scheduler probe(config.scheduler, config.seed);
  } catch (const UsageError& e) {
    throw ConfigError("/scheduler", e.what());
  }
  const std::vector<Point> in = resolve_inputs(config);
  for (NodeId i = 0; i < p.n; ++i) {
    if (config.adversaries.contains(i)) continue;
    if (!ex_val(config.validity, in[i])) {
      throw ConfigError("/inputs/" + std::to_string(i), "input of correct node " + std::to_string(i) +
                                                           " fails the validity predicate");
    }
  }
  try {
    ParticipantSetup setup{p, config.validity, in, config.adversaries,
                           config.lower_bound_demo ? Resilience::Unchecked : Resilience::Enforced};
    make_participants(setup);
  } catch (const UsageError& e) {
    throw ConfigError("/adversaries", e.what());
  }
}

SimResult run(const SimConfig& config) {
  validate(config);
  Engine engine(config);
  return engine.run();
}

void require_passed(const SimResult& result) {
  if (!result.violations.empty()) throw MonitorFailure(result.violations.front());
}

std::string metrics_csv(const SimResult& result) {
  std::ostringstream out;
  out << "round,diameter_union,max_pairwise_output,nodes_terminated\n";
  for (const RoundMetrics& row : result.metrics()) {
    out << row.round << ',' << format_double(row.diameter_union) << ',' << format_double(row.max_pairwise_output)
        << ',' << row.nodes_terminated << '\n';
  }
  return out.str();
}

bool SweepReport::all_passed() const {
  return std::all_of(runs.begin(), runs.end(),
                     [](const SweepRun& r) { return r.error.empty() && r.result && r.result->passed(); });
}

SweepReport run_sweep(const SimConfig& base, const std::vector<std::uint64_t>& seeds, unsigned workers) {
  SweepReport report;
  report.runs.resize(seeds.size());
  if (seeds.empty()) return report;
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, seeds.size()));

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      SweepRun& slot = report.runs[i];
      slot.seed = seeds[i];
      SimConfig cfg = base;
      cfg.seed = seeds[i];
      try {
        slot.result = run(cfg);
      } catch (const std::exception& e) {
        slot.error = "seed " + std::to_string(seeds[i]) + ": " + e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();

  std::vector<double> sums;
  std::vector<std::size_t> counts;
  for (const SweepRun& run : report.runs) {
    if (!run.result) continue;
    ++report.round_histogram[run.result->max_round()];
    const auto& d = run.result->union_diameters;
    if (sums.size() < d.size()) {
      sums.resize(d.size(), 0.0);
      counts.resize(d.size(), 0);
    }
    for (std::size_t r = 0; r < d.size(); ++r) {
      sums[r] += d[r];
      ++counts[r];
    }
  }
  for (std::size_t r = 0; r < sums.size(); ++r) report.mean_union_diameter.push_back(sums[r] / counts[r]);
  return report;
}

std::string sweep_csv(const SweepReport& report) {
  std::ostringstream out;
  out << "seed,final_rounds_max,max_pairwise_output,all_monitors_pass\n";
  for (const SweepRun& run : report.runs) {
    out << run.seed << ',';
    if (run.result) {
      out << run.result->max_round() << ',' << format_double(run.result->max_pairwise_output()) << ','
          << (run.result->passed() ? "true" : "false") << '\n';
    } else {
      out << ",,false\n";
    }
  }
  return out.str();
}

LowerBoundScenario lower_bound_scenario(std::size_t n, std::size_t t, std::size_t m, double epsilon,
                                        std::uint64_t seed) {
  if (t == 0 || t >= n) throw ConfigError("/t", "need 1 <= t < n");
  if (m == 0) throw ConfigError("/m", "must be positive");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ConfigError("/epsilon", "must be positive and finite");

  std::mt19937_64 rng = input_rng(seed);
  auto open_unit = [&] { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; };
  std::vector<double> a(m);
  std::vector<double> b(m);
  for (double& x : a) x = open_unit();
  for (double& x : b) x = epsilon + 1.0 + open_unit();

  LowerBoundScenario s{SimConfig{}, Point(a), Point(b), {}, {}, {}};
  const std::size_t byzantine = (n - t == 1) ? t - 1 : t;
  const std::size_t honest = n - byzantine;
  const std::size_t first = (honest + 1) / 2;
  for (NodeId i = 0; i < n; ++i) {
    if (i < first) {
      s.group_a.push_back(i);
    } else if (i < honest) {
      s.group_b.push_back(i);
    } else {
      s.byzantine.push_back(i);
    }
  }

  SimConfig& cfg = s.config;
  cfg.params = ProtocolParams{n, t, m, epsilon};
  cfg.seed = seed;
  cfg.validity = ValidityPredicate::finite_set({s.v1, s.v2}, 0.0);
  std::vector<Point> in;
  for (NodeId i = 0; i < n; ++i) in.push_back(i < first ? s.v1 : s.v2);
  cfg.inputs = in;
  for (NodeId id : s.byzantine) cfg.adversaries.emplace(id, strategy::Mirror{s.group_a, s.group_b, s.v1, s.v2});
  cfg.scheduler = sched::PartitionUntil{{s.group_a, s.group_b}, 1'000'000'000};
  cfg.lower_bound_demo = n <= 3 * t;
  return s;
}

std::vector<std::vector<NodeId>> output_clusters(const SimResult& result, double epsilon) {
  std::vector<NodeId> ids;
  for (const auto& [id, p] : result.outputs) ids.push_back(id);
  std::vector<std::size_t> parent(ids.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto root = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      if (distance(result.outputs.at(ids[i]), result.outputs.at(ids[j])) <= epsilon) parent[root(j)] = root(i);
    }
  }
  std::map<std::size_t, std::vector<NodeId>> groups;
  for (std::size_t i = 0; i < ids.size(); ++i) groups[root(i)].push_back(ids[i]);
  std::vector<std::vector<NodeId>> out;
  for (auto& [r, members] : groups) out.push_back(std::move(members));
  return out;
}

}  // namespace vaad
