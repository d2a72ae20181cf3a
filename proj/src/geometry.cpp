#include "vaad/geometry.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include "vaad/errors.hpp"

namespace vaad {

namespace {

void check_coords(const std::vector<double>& coords) {
  if (coords.empty()) throw UsageError("point must have at least one coordinate");
  for (double c : coords) {
    if (!std::isfinite(c)) throw UsageError("point coordinates must be finite");
  }
}

void check_same_dimension(const Point& a, const Point& b) {
  if (a.dimension() != b.dimension()) {
    throw UsageError("dimension mismatch: " + std::to_string(a.dimension()) + " vs " +
                     std::to_string(b.dimension()));
  }
}

double squared_distance(const Point& a, const Point& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.dimension(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

struct Entry {
  NodeId sender;
  const Point* point;
};

// Orders two entries so the lexicographically smaller point (then lower sender) is first.
std::pair<Entry, Entry> canonical(Entry a, Entry b) {
  const auto c = lexicographic_compare(*a.point, *b.point);
  if (c > 0 || (c == 0 && b.sender < a.sender)) return {b, a};
  return {a, b};
}

// True if candidate pair `x` should be preferred over `y` among equal-distance pairs.
bool tie_break_less(const std::pair<Entry, Entry>& x, const std::pair<Entry, Entry>& y) {
  if (auto c = lexicographic_compare(*x.first.point, *y.first.point); c != 0) return c < 0;
  if (auto c = lexicographic_compare(*x.second.point, *y.second.point); c != 0) return c < 0;
  if (x.first.sender != y.first.sender) return x.first.sender < y.first.sender;
  return x.second.sender < y.second.sender;
}

std::pair<Entry, Entry> furthest_entries(const AttributedSet& set) {
  if (set.size() < 2) throw UsageError("furthest requires at least two points");
  std::vector<Entry> entries;
  entries.reserve(set.size());
  for (const auto& [sender, p] : set) entries.push_back({sender, &p});

  std::pair<Entry, Entry> best = canonical(entries[0], entries[1]);
  double best_d2 = -1.0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    for (std::size_t j = i + 1; j < entries.size(); ++j) {
      const double d2 = squared_distance(*entries[i].point, *entries[j].point);
      const auto candidate = canonical(entries[i], entries[j]);
      if (d2 > best_d2 || (d2 == best_d2 && tie_break_less(candidate, best))) {
        best_d2 = d2;
        best = candidate;
      }
    }
  }
  return best;
}

// Minimum-norm point of conv(columns of P), decided against `tol`.
//
// Wolfe's nearest-point algorithm. Every iterate x is a convex combination of
// the columns, so |x| bounds the distance from above; min_j <x, P_j> / |x|
// bounds it from below. Either bound settles the question early.
bool min_norm_within(const Eigen::MatrixXd& P, double tol) {
  const Eigen::Index k = P.cols();
  const Eigen::Index m = P.rows();

  Eigen::Index start = 0;
  for (Eigen::Index j = 1; j < k; ++j) {
    if (P.col(j).squaredNorm() < P.col(start).squaredNorm()) start = j;
  }
  const double scale = P.colwise().norm().maxCoeff();
  if (scale == 0.0) return true;

  std::vector<Eigen::Index> corral{start};
  std::vector<double> lambda{1.0};
  Eigen::VectorXd x = P.col(start);

  const int max_major = static_cast<int>(10 * (k + m) + 50);
  for (int major = 0; major < max_major; ++major) {
    const double upper = x.norm();
    if (upper <= tol) return true;

    const Eigen::VectorXd dots = P.transpose() * x;
    Eigen::Index entering = 0;
    for (Eigen::Index j = 1; j < k; ++j) {
      if (dots[j] < dots[entering]) entering = j;
    }
    if (dots[entering] / upper > tol) return false;

    const double gap = x.squaredNorm() - dots[entering];
    if (gap <= 1e-15 * upper * scale) break;
    if (std::find(corral.begin(), corral.end(), entering) != corral.end()) break;
    corral.push_back(entering);
    lambda.push_back(0.0);

    bool stalled = false;
    for (std::size_t minor = 0; minor <= corral.size() + 1; ++minor) {
      // Affine minimizer of the corral: q0 + D beta, with D = [q_i - q0].
      const auto s = static_cast<Eigen::Index>(corral.size());
      Eigen::VectorXd alpha(s);
      if (s == 1) {
        alpha[0] = 1.0;
      } else {
        Eigen::MatrixXd D(m, s - 1);
        for (Eigen::Index i = 1; i < s; ++i) D.col(i - 1) = P.col(corral[i]) - P.col(corral[0]);
        const Eigen::VectorXd beta = D.colPivHouseholderQr().solve(-P.col(corral[0]));
        if (!beta.allFinite()) {
          stalled = true;
          break;
        }
        alpha[0] = 1.0 - beta.sum();
        alpha.tail(s - 1) = beta;
      }

      if ((alpha.array() > 1e-14).all()) {
        for (Eigen::Index i = 0; i < s; ++i) lambda[i] = alpha[i];
        break;
      }

      double theta = 1.0;
      for (Eigen::Index i = 0; i < s; ++i) {
        if (alpha[i] <= 1e-14) {
          const double denom = lambda[i] - alpha[i];
          if (denom > 0.0) theta = std::min(theta, lambda[i] / denom);
        }
      }
      for (Eigen::Index i = 0; i < s; ++i) lambda[i] = theta * alpha[i] + (1.0 - theta) * lambda[i];

      std::vector<Eigen::Index> kept;
      std::vector<double> kept_lambda;
      for (Eigen::Index i = 0; i < s; ++i) {
        if (lambda[i] > 1e-14) {
          kept.push_back(corral[i]);
          kept_lambda.push_back(lambda[i]);
        }
      }
      if (kept.empty() || kept.size() == corral.size()) {
        stalled = true;
        break;
      }
      corral = std::move(kept);
      lambda = std::move(kept_lambda);
    }

    double total = 0.0;
    for (double l : lambda) total += l;
    for (double& l : lambda) l /= total;
    x.setZero();
    for (std::size_t i = 0; i < corral.size(); ++i) x += lambda[i] * P.col(corral[i]);
    if (stalled) break;
  }
  return x.norm() <= 3.0 * tol;
}

}  // namespace

Point::Point(std::vector<double> coords) : coords_(std::move(coords)) { check_coords(coords_); }

Point::Point(std::initializer_list<double> coords) : coords_(coords) { check_coords(coords_); }

bool operator==(const Point& a, const Point& b) noexcept {
  if (a.coords_.size() != b.coords_.size()) return false;
  for (std::size_t i = 0; i < a.coords_.size(); ++i) {
    if (std::bit_cast<std::uint64_t>(a.coords_[i]) != std::bit_cast<std::uint64_t>(b.coords_[i])) {
      return false;
    }
  }
  return true;
}

std::weak_ordering lexicographic_compare(const Point& a, const Point& b) {
  check_same_dimension(a, b);
  for (std::size_t i = 0; i < a.dimension(); ++i) {
    if (a[i] < b[i]) return std::weak_ordering::less;
    if (b[i] < a[i]) return std::weak_ordering::greater;
  }
  return std::weak_ordering::equivalent;
}

AttributedSet::AttributedSet(std::initializer_list<std::pair<const NodeId, Point>> entries) {
  for (const auto& [sender, p] : entries) {
    if (!insert(sender, p)) throw UsageError("duplicate sender " + std::to_string(sender));
  }
}

AttributedSet AttributedSet::enumerate(const std::vector<Point>& points) {
  AttributedSet set;
  NodeId id = 0;
  for (const auto& p : points) set.insert(id++, p);
  return set;
}

bool AttributedSet::insert(NodeId sender, Point p) {
  if (!entries_.empty() && p.dimension() != dimension()) {
    throw UsageError("dimension mismatch inserting into attributed set");
  }
  return entries_.try_emplace(sender, std::move(p)).second;
}

const Point* AttributedSet::find(NodeId sender) const {
  auto it = entries_.find(sender);
  return it == entries_.end() ? nullptr : &it->second;
}

std::size_t AttributedSet::dimension() const noexcept {
  return entries_.empty() ? 0 : entries_.begin()->second.dimension();
}

bool AttributedSet::is_subset_of(const AttributedSet& other) const {
  if (size() > other.size()) return false;
  for (const auto& [sender, p] : entries_) {
    const Point* q = other.find(sender);
    if (q == nullptr || !(*q == p)) return false;
  }
  return true;
}

std::size_t AttributedSet::intersection_size(const AttributedSet& other) const {
  std::size_t count = 0;
  for (const auto& [sender, p] : entries_) {
    const Point* q = other.find(sender);
    if (q != nullptr && *q == p) ++count;
  }
  return count;
}

double distance(const Point& a, const Point& b) {
  check_same_dimension(a, b);
  return std::sqrt(squared_distance(a, b));
}

double diameter(const AttributedSet& set) {
  if (set.empty()) throw UsageError("diameter of an empty set");
  double best = 0.0;
  for (auto i = set.begin(); i != set.end(); ++i) {
    for (auto j = std::next(i); j != set.end(); ++j) {
      best = std::max(best, squared_distance(i->second, j->second));
    }
  }
  return std::sqrt(best);
}

PointPair furthest(const AttributedSet& set) {
  const auto [a, b] = furthest_entries(set);
  return PointPair{*a.point, *b.point};
}

AttributedSet elim(std::size_t t, const AttributedSet& set) {
  if (set.size() < 2 * t + 1) {
    throw UsageError("elim(" + std::to_string(t) + ") needs at least " + std::to_string(2 * t + 1) +
                     " points, got " + std::to_string(set.size()));
  }
  AttributedSet result = set;
  for (std::size_t i = 0; i < t; ++i) {
    const auto [a, b] = furthest_entries(result);
    const NodeId first = a.sender;
    const NodeId second = b.sender;
    result.erase(first);
    result.erase(second);
  }
  return result;
}

Point vote_mean(const AttributedSet& set) {
  if (set.empty()) throw UsageError("vote of an empty set");
  std::vector<double> sum(set.dimension(), 0.0);
  for (const auto& [sender, p] : set) {
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += p[i];
  }
  const auto count = static_cast<double>(set.size());
  for (double& c : sum) c /= count;
  return Point(std::move(sum));
}

bool in_hull(const Point& v, const AttributedSet& set, double tol) {
  if (set.empty()) throw UsageError("hull of an empty set");
  if (!(tol >= 0.0) || !std::isfinite(tol)) throw UsageError("tolerance must be finite and >= 0");
  if (set.dimension() != v.dimension()) throw UsageError("dimension mismatch in hull test");

  const auto m = static_cast<Eigen::Index>(v.dimension());
  Eigen::MatrixXd P(m, static_cast<Eigen::Index>(set.size()));
  Eigen::Index col = 0;
  for (const auto& [sender, p] : set) {
    for (Eigen::Index i = 0; i < m; ++i) P(i, col) = p[i] - v[i];
    ++col;
  }
  return min_norm_within(P, tol);
}

}  // namespace vaad
