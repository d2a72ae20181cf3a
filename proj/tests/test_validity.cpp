#include <gtest/gtest.h>

#include <random>

#include "random.hpp"
#include "vaad/errors.hpp"
#include "vaad/validity.hpp"

namespace vaad {
namespace {

TEST(Validity, AlwaysTrueAcceptsAnyDimension) {
  const auto p = ValidityPredicate::always_true();
  EXPECT_TRUE(ex_val(p, Point{1e300}));
  EXPECT_TRUE(ex_val(p, Point{-1, 2, 3}));
  EXPECT_EQ(p.dimension(), 0u);
  EXPECT_TRUE(p.is_always_true());
}

TEST(Validity, SimplexExamples) {
  const auto p = ValidityPredicate::simplex(3);
  EXPECT_TRUE(ex_val(p, {0.2, 0.3, 0.5}));
  EXPECT_FALSE(ex_val(p, {0.5, 0.6, 0.1}));
  EXPECT_FALSE(ex_val(p, {1.5, -0.5, 0.0}));
  EXPECT_TRUE(ex_val(p, {1.0, 0.0, 0.0}));
  EXPECT_TRUE(ex_val(p, {1.0 + 5e-13, 0.0, 0.0}));
  EXPECT_FALSE(ex_val(p, {1.0 + 5e-12, 0.0, 0.0}));
  EXPECT_THROW(ex_val(p, {0.5, 0.5}), UsageError);
}

TEST(Validity, BoxExamples) {
  const auto p = ValidityPredicate::box({0, 0}, {1, 1});
  EXPECT_FALSE(ex_val(p, {2, 0}));
  EXPECT_TRUE(ex_val(p, {0, 1}));
  EXPECT_TRUE(ex_val(p, {0.5, 0.5}));
  EXPECT_FALSE(ex_val(p, {0.5, -1e-300}));
  EXPECT_THROW(ex_val(p, Point{0.5}), UsageError);
  EXPECT_THROW(ValidityPredicate::box({1, 0}, {0, 1}), UsageError);
  EXPECT_THROW(ValidityPredicate::box({0}, {0, 1}), UsageError);
}

TEST(Validity, FiniteSetExamples) {
  const auto exact = ValidityPredicate::finite_set({{0, 0}, {3, 4}}, 0.0);
  EXPECT_TRUE(ex_val(exact, {3, 4}));
  EXPECT_FALSE(ex_val(exact, {3, 4.000001}));
  const auto loose = ValidityPredicate::finite_set({{0, 0}}, 0.5);
  EXPECT_TRUE(ex_val(loose, {0.3, 0.4}));
  EXPECT_FALSE(ex_val(loose, {0.3, 0.41}));
  EXPECT_THROW(ValidityPredicate::finite_set({{0}}, -1.0), UsageError);
  EXPECT_THROW(ValidityPredicate::finite_set({{0}, {0, 1}}, 0.0), UsageError);
}

TEST(Validity, RejectsZeroDimensionalSimplex) { EXPECT_THROW(ValidityPredicate::simplex(0), UsageError); }

TEST(Validity, DeterministicAndMatchesCoordinateOracle) {
  std::mt19937_64 rng(77);
  const auto box = ValidityPredicate::box({-1, -2, -3}, {1, 2, 3});
  for (int iter = 0; iter < 5000; ++iter) {
    const Point v = testing::random_point(rng, 3, 4.0);
    const bool expected = std::abs(v[0]) <= 1 && std::abs(v[1]) <= 2 && std::abs(v[2]) <= 3;
    EXPECT_EQ(ex_val(box, v), expected);
    EXPECT_EQ(ex_val(box, v), ex_val(box, v));
  }
}

}  // namespace
}  // namespace vaad
