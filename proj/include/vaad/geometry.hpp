#pragma once

// Geometry kernel for the agreement protocol: Euclidean distance, diameter,
// deterministic furthest pair, iterated elimination, mean vote and convex-hull
// membership. Every function here is pure.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <span>
#include <utility>
#include <vector>

namespace vaad {

using NodeId = std::uint32_t;

/// A finite point in R^m, m >= 1.
///
/// Equality is bitwise on the coordinates: two points compare equal only if
/// every coordinate has the same IEEE-754 representation. Vote verification
/// relies on this (an honestly recomputed mean reproduces the exact bits).
class Point {
 public:
  explicit Point(std::vector<double> coords);
  Point(std::initializer_list<double> coords);

  std::size_t dimension() const noexcept { return coords_.size(); }
  double operator[](std::size_t i) const { return coords_[i]; }
  std::span<const double> coords() const noexcept { return coords_; }

  friend bool operator==(const Point& a, const Point& b) noexcept;

 private:
  std::vector<double> coords_;
};

/// Coordinate-wise lexicographic comparison by value.
std::weak_ordering lexicographic_compare(const Point& a, const Point& b);

/// Points keyed by the node that broadcast them. At most one point per sender.
class AttributedSet {
 public:
  using Map = std::map<NodeId, Point>;
  using const_iterator = Map::const_iterator;

  AttributedSet() = default;
  AttributedSet(std::initializer_list<std::pair<const NodeId, Point>> entries);

  /// Assigns sender ids 0, 1, ... in order.
  static AttributedSet enumerate(const std::vector<Point>& points);

  /// Returns false (and leaves the set untouched) if `sender` already has an entry.
  /// Throws UsageError if the point's dimension differs from existing entries.
  bool insert(NodeId sender, Point p);
  bool erase(NodeId sender) { return entries_.erase(sender) > 0; }

  bool contains(NodeId sender) const { return entries_.contains(sender); }
  const Point* find(NodeId sender) const;
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  /// Dimension of the stored points, 0 when empty.
  std::size_t dimension() const noexcept;

  const_iterator begin() const noexcept { return entries_.begin(); }
  const_iterator end() const noexcept { return entries_.end(); }

  /// Every (sender, point) entry of this set appears in `other` with a bit-equal point.
  bool is_subset_of(const AttributedSet& other) const;
  /// Number of senders present in both sets with bit-equal points.
  std::size_t intersection_size(const AttributedSet& other) const;

  friend bool operator==(const AttributedSet&, const AttributedSet&) = default;

 private:
  Map entries_;
};

/// Canonically ordered pair: lexicographic_compare(first, second) <= 0.
struct PointPair {
  Point first;
  Point second;

  friend bool operator==(const PointPair&, const PointPair&) = default;
};

double distance(const Point& a, const Point& b);

double diameter(const AttributedSet& set);

/// The maximal-distance pair. Ties are broken by comparing the canonically
/// ordered candidate pairs lexicographically (first points, then second points);
/// remaining ties between identical point pairs go to the lower sender ids.
PointPair furthest(const AttributedSet& set);

/// Removes the furthest pair `t` times. Requires |set| >= 2t + 1.
AttributedSet elim(std::size_t t, const AttributedSet& set);

/// Coordinate-wise mean, summed in ascending sender order.
Point vote_mean(const AttributedSet& set);

/// Convex-hull membership with tolerance.
///
/// Returns true whenever `v` is within Euclidean distance `tol` of conv(set), and
/// false whenever it is farther than 10 * tol. Points in between get a
/// deterministic but unspecified answer.
bool in_hull(const Point& v, const AttributedSet& set, double tol);

}  // namespace vaad
