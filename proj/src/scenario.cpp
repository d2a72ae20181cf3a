#include "vaad/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "vaad/errors.hpp"

namespace vaad {

namespace {

using nlohmann::json;

std::string child(const std::string& path, const std::string& key) { return path + "/" + key; }
std::string child(const std::string& path, std::size_t index) { return path + "/" + std::to_string(index); }

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path.empty() ? "/" : path, "expected an object");
}

void allow_keys(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
  require_object(j, path);
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) throw ConfigError(child(path, key), "unknown key");
  }
}

const json& field(const json& j, const std::string& path, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(child(path, key), "missing required field");
  return *it;
}

std::uint64_t as_uint(const json& j, const std::string& path) {
  if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() && j.get<std::int64_t>() < 0)) {
    throw ConfigError(path, "expected a nonnegative integer");
  }
  return j.get<std::uint64_t>();
}

double as_double(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) throw ConfigError(path, "expected a finite number");
  return x;
}

bool as_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw ConfigError(path, "expected true or false");
  return j.get<bool>();
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path, "expected a string");
  return j.get<std::string>();
}

std::vector<double> as_vector(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw ConfigError(path, "expected a non-empty array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_double(j[i], child(path, i)));
  return out;
}

Point as_point(const json& j, const std::string& path, std::size_t m) {
  std::vector<double> coords = as_vector(j, path);
  if (m != 0 && coords.size() != m) {
    throw ConfigError(path, "expected " + std::to_string(m) + " coordinates, got " + std::to_string(coords.size()));
  }
  return Point(std::move(coords));
}

std::vector<NodeId> as_ids(const json& j, const std::string& path, std::size_t n) {
  if (!j.is_array()) throw ConfigError(path, "expected an array of node ids");
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::uint64_t id = as_uint(j[i], child(path, i));
    if (id >= n) throw ConfigError(child(path, i), "node id out of range");
    out.push_back(static_cast<NodeId>(id));
  }
  return out;
}

InputSpec parse_inputs(const json& j, const std::string& path, std::size_t m) {
  if (j.is_array()) {
    std::vector<Point> points;
    for (std::size_t i = 0; i < j.size(); ++i) points.push_back(as_point(j[i], child(path, i), m));
    return points;
  }
  require_object(j, path);
  const std::string generator = as_string(field(j, path, "generator"), child(path, "generator"));
  if (generator == "uniform_box") {
    allow_keys(j, path, {"generator", "lo", "hi"});
    return inputs::UniformBox{as_vector(field(j, path, "lo"), child(path, "lo")),
                              as_vector(field(j, path, "hi"), child(path, "hi"))};
  }
  if (generator == "uniform_simplex") {
    allow_keys(j, path, {"generator"});
    return inputs::UniformSimplex{};
  }
  throw ConfigError(child(path, "generator"), "unknown generator '" + generator + "'");
}

SchedulerPolicy parse_scheduler(const json& j, const std::string& path, std::size_t n) {
  require_object(j, path);
  const std::string kind = as_string(field(j, path, "kind"), child(path, "kind"));
  if (kind == "fifo") {
    allow_keys(j, path, {"kind"});
    return sched::Fifo{};
  }
  if (kind == "random_delay") {
    allow_keys(j, path, {"kind", "max_delay"});
    sched::RandomDelay p;
    if (j.contains("max_delay")) p.max_delay = as_uint(j["max_delay"], child(path, "max_delay"));
    if (p.max_delay == 0) throw ConfigError(child(path, "max_delay"), "must be at least 1");
    return p;
  }
  if (kind == "targeted_delay") {
    allow_keys(j, path, {"kind", "victims", "delay_factor"});
    sched::TargetedDelay p;
    for (NodeId id : as_ids(field(j, path, "victims"), child(path, "victims"), n)) p.victims.insert(id);
    if (j.contains("delay_factor")) p.delay_factor = as_uint(j["delay_factor"], child(path, "delay_factor"));
    if (p.delay_factor == 0) throw ConfigError(child(path, "delay_factor"), "must be at least 1");
    return p;
  }
  if (kind == "partition_until") {
    allow_keys(j, path, {"kind", "groups", "release_time"});
    sched::PartitionUntil p;
    const json& groups = field(j, path, "groups");
    if (!groups.is_array()) throw ConfigError(child(path, "groups"), "expected an array of groups");
    std::set<NodeId> seen;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const std::string gpath = child(child(path, "groups"), g);
      p.groups.push_back(as_ids(groups[g], gpath, n));
      for (NodeId id : p.groups.back()) {
        if (!seen.insert(id).second) throw ConfigError(gpath, "node " + std::to_string(id) + " is in two groups");
      }
    }
    if (j.contains("release_time")) p.release_time = as_uint(j["release_time"], child(path, "release_time"));
    return p;
  }
  throw ConfigError(child(path, "kind"), "unknown scheduler '" + kind + "'");
}

ValidityPredicate parse_validity(const json& j, const std::string& path, std::size_t m) {
  require_object(j, path);
  const std::string kind = as_string(field(j, path, "kind"), child(path, "kind"));
  try {
    if (kind == "always_true") {
      allow_keys(j, path, {"kind"});
      return ValidityPredicate::always_true();
    }
    if (kind == "box") {
      allow_keys(j, path, {"kind", "lo", "hi"});
      return ValidityPredicate::box(as_point(field(j, path, "lo"), child(path, "lo"), m),
                                    as_point(field(j, path, "hi"), child(path, "hi"), m));
    }
    if (kind == "simplex") {
      allow_keys(j, path, {"kind"});
      return ValidityPredicate::simplex(m);
    }
    if (kind == "finite_set") {
      allow_keys(j, path, {"kind", "allowed", "tol"});
      const json& allowed = field(j, path, "allowed");
      if (!allowed.is_array() || allowed.empty()) {
        throw ConfigError(child(path, "allowed"), "expected a non-empty array of points");
      }
      std::vector<Point> points;
      for (std::size_t i = 0; i < allowed.size(); ++i) {
        points.push_back(as_point(allowed[i], child(child(path, "allowed"), i), m));
      }
      const double tol = j.contains("tol") ? as_double(j["tol"], child(path, "tol")) : 0.0;
      return ValidityPredicate::finite_set(std::move(points), tol);
    }
  } catch (const UsageError& e) {
    throw ConfigError(path, e.what());
  }
  throw ConfigError(child(path, "kind"), "unknown validity predicate '" + kind + "'");
}

MonitorToggles parse_monitors(const json& j, const std::string& path) {
  allow_keys(j, path,
             {"shrinking_diameter", "viewpoint_intersection", "initial_diameter", "validity", "delta_validity",
              "correctness", "round_bound", "halt_monotonic", "liveness", "broadcast"});
  MonitorToggles t;
  auto read = [&](const char* key, bool& slot) {
    if (j.contains(key)) slot = as_bool(j[key], child(path, key));
  };
  read("shrinking_diameter", t.shrinking_diameter);
  read("viewpoint_intersection", t.viewpoint_intersection);
  read("initial_diameter", t.initial_diameter);
  read("validity", t.validity);
  read("delta_validity", t.delta_validity);
  read("correctness", t.correctness);
  read("round_bound", t.round_bound);
  read("halt_monotonic", t.halt_monotonic);
  read("liveness", t.liveness);
  read("broadcast", t.broadcast);
  return t;
}

Bytes from_hex(const std::string& text, const std::string& path) {
  if (text.size() % 2 != 0) throw ConfigError(path, "hex string has odd length");
  auto nibble = [&](char c) -> std::uint8_t {
    if (c >= '0' && c <= '9') return static_cast<std::uint8_t>(c - '0');
    if (c >= 'a' && c <= 'f') return static_cast<std::uint8_t>(c - 'a' + 10);
    if (c >= 'A' && c <= 'F') return static_cast<std::uint8_t>(c - 'A' + 10);
    throw ConfigError(path, "invalid hex digit");
  };
  Bytes out;
  for (std::size_t i = 0; i < text.size(); i += 2) {
    out.push_back(static_cast<std::uint8_t>(nibble(text[i]) << 4 | nibble(text[i + 1])));
  }
  return out;
}

}  // namespace

ProtocolMessage parse_payload(const json& spec, const std::string& path) {
  require_object(spec, path);
  const std::string kind = as_string(field(spec, path, "kind"), child(path, "kind"));
  if (kind == "init_value") {
    allow_keys(spec, path, {"kind", "v"});
    return InitValueMsg{as_point(field(spec, path, "v"), child(path, "v"), 0)};
  }
  if (kind == "enough") {
    allow_keys(spec, path, {"kind", "e"});
    const std::uint64_t e = as_uint(field(spec, path, "e"), child(path, "e"));
    if (e == 0) throw ConfigError(child(path, "e"), "must be at least 1");
    return EnoughMsg{e};
  }
  if (kind == "hex") {
    allow_keys(spec, path, {"kind", "bytes"});
    const std::string bpath = child(path, "bytes");
    try {
      return decode(from_hex(as_string(field(spec, path, "bytes"), bpath), bpath));
    } catch (const DecodeError& e) {
      throw ConfigError(bpath, e.what());
    }
  }
  throw ConfigError(child(path, "kind"), "unknown payload kind '" + kind + "'");
}

AdversaryStrategy parse_strategy(const json& spec, const std::string& path, std::size_t m) {
  require_object(spec, path);
  const std::string name = as_string(field(spec, path, "strategy"), child(path, "strategy"));
  if (name == "silent") {
    allow_keys(spec, path, {"node", "strategy"});
    return strategy::Silent{};
  }
  if (name == "crash") {
    allow_keys(spec, path, {"node", "strategy", "after_round"});
    return strategy::Crash{as_uint(field(spec, path, "after_round"), child(path, "after_round"))};
  }
  if (name == "extreme_honest") {
    allow_keys(spec, path, {"node", "strategy", "target"});
    return strategy::ExtremeHonest{as_point(field(spec, path, "target"), child(path, "target"), m)};
  }
  if (name == "invalid_input") {
    allow_keys(spec, path, {"node", "strategy", "v"});
    return strategy::InvalidInput{as_point(field(spec, path, "v"), child(path, "v"), m)};
  }
  if (name == "forged_vote") {
    allow_keys(spec, path, {"node", "strategy", "perturbation"});
    return strategy::ForgedVote{as_point(field(spec, path, "perturbation"), child(path, "perturbation"), m)};
  }
  if (name == "skewed_subset") {
    allow_keys(spec, path, {"node", "strategy", "bias"});
    return strategy::SkewedSubset{as_point(field(spec, path, "bias"), child(path, "bias"), m)};
  }
  if (name == "equivocator") {
    allow_keys(spec, path, {"node", "strategy", "first", "second"});
    ProtocolMessage first = parse_payload(field(spec, path, "first"), child(path, "first"));
    ProtocolMessage second = parse_payload(field(spec, path, "second"), child(path, "second"));
    if (tag_of(first) != tag_of(second)) throw ConfigError(child(path, "second"), "must share the tag of first");
    return strategy::Equivocator{std::move(first), std::move(second)};
  }
  if (name == "mirror") {
    allow_keys(spec, path, {"node", "strategy", "group_a", "group_b", "input_a", "input_b"});
    constexpr std::size_t kAnyNode = std::numeric_limits<std::size_t>::max();
    return strategy::Mirror{as_ids(field(spec, path, "group_a"), child(path, "group_a"), kAnyNode),
                            as_ids(field(spec, path, "group_b"), child(path, "group_b"), kAnyNode),
                            as_point(field(spec, path, "input_a"), child(path, "input_a"), m),
                            as_point(field(spec, path, "input_b"), child(path, "input_b"), m)};
  }
  throw ConfigError(child(path, "strategy"), "unknown strategy '" + name + "'");
}

Scenario parse_scenario(const json& doc) {
  const std::string root;
  allow_keys(doc, root,
             {"n", "t", "m", "epsilon", "seed", "broadcast", "inputs", "adversaries", "scheduler", "validity",
              "max_events", "lower_bound_demo", "run_to_quiescence", "monitors", "output"});
  Scenario s;
  SimConfig& c = s.config;
  c.params.n = as_uint(field(doc, root, "n"), "/n");
  c.params.t = as_uint(field(doc, root, "t"), "/t");
  c.params.m = as_uint(field(doc, root, "m"), "/m");
  c.params.epsilon = as_double(field(doc, root, "epsilon"), "/epsilon");
  if (c.params.n == 0) throw ConfigError("/n", "must be positive");
  if (c.params.m == 0) throw ConfigError("/m", "must be positive");
  if (!(c.params.epsilon > 0.0)) throw ConfigError("/epsilon", "must be positive");

  if (doc.contains("seed")) c.seed = as_uint(doc["seed"], "/seed");
  if (doc.contains("broadcast")) {
    const std::string mode = as_string(doc["broadcast"], "/broadcast");
    if (mode == "ideal") {
      c.broadcast = BroadcastMode::Ideal;
    } else if (mode == "bracha") {
      c.broadcast = BroadcastMode::Bracha;
    } else {
      throw ConfigError("/broadcast", "expected 'ideal' or 'bracha'");
    }
  }
  c.inputs = parse_inputs(field(doc, root, "inputs"), "/inputs", c.params.m);

  if (doc.contains("adversaries")) {
    const json& list = doc["adversaries"];
    if (!list.is_array()) throw ConfigError("/adversaries", "expected an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string path = child("/adversaries", i);
      require_object(list[i], path);
      const std::uint64_t node = as_uint(field(list[i], path, "node"), child(path, "node"));
      if (node >= c.params.n) throw ConfigError(child(path, "node"), "node id out of range");
      if (!c.adversaries.emplace(static_cast<NodeId>(node), parse_strategy(list[i], path, c.params.m)).second) {
        throw ConfigError(child(path, "node"), "node listed twice");
      }
    }
  }
  if (doc.contains("scheduler")) c.scheduler = parse_scheduler(doc["scheduler"], "/scheduler", c.params.n);
  if (doc.contains("validity")) c.validity = parse_validity(doc["validity"], "/validity", c.params.m);
  if (doc.contains("max_events")) c.max_events = as_uint(doc["max_events"], "/max_events");
  if (doc.contains("lower_bound_demo")) c.lower_bound_demo = as_bool(doc["lower_bound_demo"], "/lower_bound_demo");
  if (doc.contains("run_to_quiescence")) {
    c.run_to_quiescence = as_bool(doc["run_to_quiescence"], "/run_to_quiescence");
  }
  if (doc.contains("monitors")) c.monitors = parse_monitors(doc["monitors"], "/monitors");
  if (doc.contains("output")) {
    const json& out = doc["output"];
    allow_keys(out, "/output", {"dir", "trace"});
    if (out.contains("dir")) s.output_dir = as_string(out["dir"], "/output/dir");
    if (out.contains("trace")) s.trace = as_bool(out["trace"], "/output/trace");
  }
  validate(c);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read scenario file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("", "invalid JSON in " + path.string() + ": " + e.what());
  }
  return parse_scenario(doc);
}

}  // namespace vaad
