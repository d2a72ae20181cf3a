#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "vaad/geometry.hpp"

namespace vaad {

/// External validity predicates. Evaluation is a pure function of the point.
namespace validity {

struct AlwaysTrue {};

/// Axis-aligned box, lo <= hi coordinate-wise.
struct Box {
  Point lo;
  Point hi;
};

/// Nonnegative coordinates summing to 1 (within kSimplexSumTolerance).
struct Simplex {
  std::size_t dimension;
};

/// Within `tol` of one of the allowed points. Stands in for signed inputs.
struct FiniteSet {
  std::vector<Point> allowed;
  double tol = 0.0;
};

inline constexpr double kSimplexSumTolerance = 1e-12;

}  // namespace validity

class ValidityPredicate {
 public:
  using Kind = std::variant<validity::AlwaysTrue, validity::Box, validity::Simplex, validity::FiniteSet>;

  /// Throws UsageError if the parameters break the kind's invariants.
  explicit ValidityPredicate(Kind kind = validity::AlwaysTrue{});

  static ValidityPredicate always_true() { return ValidityPredicate(validity::AlwaysTrue{}); }
  static ValidityPredicate box(Point lo, Point hi) { return ValidityPredicate(validity::Box{std::move(lo), std::move(hi)}); }
  static ValidityPredicate simplex(std::size_t m) { return ValidityPredicate(validity::Simplex{m}); }
  static ValidityPredicate finite_set(std::vector<Point> allowed, double tol) {
    return ValidityPredicate(validity::FiniteSet{std::move(allowed), tol});
  }

  const Kind& kind() const noexcept { return kind_; }
  bool is_always_true() const noexcept { return std::holds_alternative<validity::AlwaysTrue>(kind_); }

  /// Dimension the predicate is defined over, or 0 if it accepts any dimension.
  std::size_t dimension() const noexcept;

  /// Throws UsageError on dimension mismatch.
  bool operator()(const Point& v) const;

 private:
  Kind kind_;
};

bool ex_val(const ValidityPredicate& predicate, const Point& v);

}  // namespace vaad
