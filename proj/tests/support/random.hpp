#pragma once

// Random instance generators shared by the unit tests and the acceptance binary.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "vaad/geometry.hpp"
#include "vaad/messages.hpp"

namespace vaad::testing {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::size_t pick(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

/// Mostly continuous coordinates, sometimes snapped to a coarse lattice so
/// that distance ties and repeated points occur.
inline Point random_point(std::mt19937_64& rng, std::size_t m, double scale = 10.0) {
  const bool lattice = pick(rng, 0, 3) == 0;
  std::vector<double> c(m);
  for (double& x : c) {
    x = lattice ? static_cast<double>(pick(rng, 0, 4)) - 2.0 : uniform(rng, -scale, scale);
  }
  return Point(std::move(c));
}

inline AttributedSet random_set(std::mt19937_64& rng, std::size_t size, std::size_t m, NodeId first = 0) {
  AttributedSet s;
  for (std::size_t i = 0; i < size; ++i) s.insert(first + static_cast<NodeId>(i), random_point(rng, m));
  return s;
}

/// A random subset of `set` with exactly `size` entries.
inline AttributedSet random_subset(std::mt19937_64& rng, const AttributedSet& set, std::size_t size) {
  std::vector<NodeId> ids;
  for (const auto& [id, p] : set) ids.push_back(id);
  std::shuffle(ids.begin(), ids.end(), rng);
  AttributedSet out;
  for (std::size_t i = 0; i < size && i < ids.size(); ++i) out.insert(ids[i], *set.find(ids[i]));
  return out;
}

inline ProtocolMessage random_message(std::mt19937_64& rng) {
  const std::size_t m = pick(rng, 1, 4);
  auto set = [&](std::size_t max_size) {
    AttributedSet s;
    const std::size_t size = pick(rng, 0, max_size);
    for (std::size_t i = 0; i < size; ++i) s.insert(static_cast<NodeId>(pick(rng, 0, 40)), random_point(rng, m, 1e6));
    return s;
  };
  switch (pick(rng, 0, 3)) {
    case 0: return InitValueMsg{random_point(rng, m, 1e6)};
    case 1: {
      ReportSet reps;
      const std::size_t count = pick(rng, 0, 4);
      for (std::size_t i = 0; i < count; ++i) reps.insert(static_cast<NodeId>(pick(rng, 0, 40)), set(5));
      return ValueMsg{random_point(rng, m, 1e6), set(6), std::move(reps), pick(rng, 1, 1000)};
    }
    case 2: return ReportMsg{set(8), pick(rng, 0, 1000)};
    default: return EnoughMsg{pick(rng, 1, 1u << 30)};
  }
}

}  // namespace vaad::testing
