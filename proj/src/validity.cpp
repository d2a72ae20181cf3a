#include "vaad/validity.hpp"

#include <cmath>
#include <string>

#include "vaad/errors.hpp"

namespace vaad {

namespace {

void check_dimension(std::size_t expected, const Point& v) {
  if (expected != 0 && v.dimension() != expected) {
    throw UsageError("validity predicate expects dimension " + std::to_string(expected) + ", got " +
                     std::to_string(v.dimension()));
  }
}

struct DimensionOf {
  std::size_t operator()(const validity::AlwaysTrue&) const { return 0; }
  std::size_t operator()(const validity::Box& b) const { return b.lo.dimension(); }
  std::size_t operator()(const validity::Simplex& s) const { return s.dimension; }
  std::size_t operator()(const validity::FiniteSet& f) const {
    return f.allowed.empty() ? 0 : f.allowed.front().dimension();
  }
};

}  // namespace

ValidityPredicate::ValidityPredicate(Kind kind) : kind_(std::move(kind)) {
  if (const auto* box = std::get_if<validity::Box>(&kind_)) {
    if (box->lo.dimension() != box->hi.dimension()) throw UsageError("box corners differ in dimension");
    for (std::size_t i = 0; i < box->lo.dimension(); ++i) {
      if (box->lo[i] > box->hi[i]) throw UsageError("box lo exceeds hi in coordinate " + std::to_string(i));
    }
  } else if (const auto* simplex = std::get_if<validity::Simplex>(&kind_)) {
    if (simplex->dimension == 0) throw UsageError("simplex dimension must be >= 1");
  } else if (const auto* set = std::get_if<validity::FiniteSet>(&kind_)) {
    if (!(set->tol >= 0.0) || !std::isfinite(set->tol)) throw UsageError("finite-set tolerance must be >= 0");
    for (const auto& p : set->allowed) {
      if (p.dimension() != set->allowed.front().dimension()) {
        throw UsageError("finite-set points differ in dimension");
      }
    }
  }
}

std::size_t ValidityPredicate::dimension() const noexcept { return std::visit(DimensionOf{}, kind_); }

bool ValidityPredicate::operator()(const Point& v) const {
  check_dimension(dimension(), v);
  struct Eval {
    const Point& v;
    bool operator()(const validity::AlwaysTrue&) const { return true; }
    bool operator()(const validity::Box& b) const {
      for (std::size_t i = 0; i < v.dimension(); ++i) {
        if (v[i] < b.lo[i] || v[i] > b.hi[i]) return false;
      }
      return true;
    }
    bool operator()(const validity::Simplex&) const {
      double sum = 0.0;
      for (double c : v.coords()) {
        if (c < 0.0) return false;
        sum += c;
      }
      return std::abs(sum - 1.0) <= validity::kSimplexSumTolerance;
    }
    bool operator()(const validity::FiniteSet& f) const {
      for (const auto& p : f.allowed) {
        if (distance(p, v) <= f.tol) return true;
      }
      return false;
    }
  };
  return std::visit(Eval{v}, kind_);
}

bool ex_val(const ValidityPredicate& predicate, const Point& v) { return predicate(v); }

}  // namespace vaad
