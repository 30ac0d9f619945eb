#include <cmath>
#include <stdexcept>

#include <gtest/gtest.h>

#include "aimd_market/random.hpp"
#include "aimd_market/utility.hpp"

namespace aimd_market {
namespace {

const UtilitySpec kQuad = UtilitySpec::quadratic(50.0, 10.0);
const UtilitySpec kSqrt = UtilitySpec::sqrt_monotone(3.0);

TEST(UtilityEvaluate, QuadraticPeaksAtOneAndAHalfCurvature) {
  EXPECT_DOUBLE_EQ(evaluate(kQuad, 50.0), 15.0);
  EXPECT_DOUBLE_EQ(evaluate(kQuad, 40.0), 5.0);
}

TEST(UtilityEvaluate, SqrtMonotone) { EXPECT_DOUBLE_EQ(evaluate(kSqrt, 4.0), 6.0); }

TEST(UtilityEvaluate, RejectsNegativeQuantity) {
  EXPECT_THROW(evaluate(kQuad, -1e-12), std::domain_error);
  EXPECT_THROW(evaluate(kSqrt, -1.0), std::domain_error);
  EXPECT_THROW(derivative(kQuad, -1.0), std::domain_error);
}

TEST(UtilityDerivative, Examples) {
  EXPECT_DOUBLE_EQ(*derivative(kQuad, 50.0), 0.0);
  EXPECT_DOUBLE_EQ(*derivative(kQuad, 25.0), 5.0);
  EXPECT_DOUBLE_EQ(*derivative(kSqrt, 4.0), 0.75);
}

TEST(UtilityDerivative, SqrtIsUnboundedAtZero) {
  EXPECT_FALSE(derivative(kSqrt, 0.0).has_value());
  EXPECT_TRUE(derivative(kQuad, 0.0).has_value());
}

TEST(UtilityArgmax, Examples) {
  EXPECT_EQ(argmax(kQuad), 50.0);
  EXPECT_FALSE(argmax(kSqrt).has_value());
  EXPECT_EQ(argmax(UtilitySpec::quadratic(0.0, 1.0)), 0.0);
}

TEST(UtilityCheckDerivative, CentralDifferenceAgrees) {
  EXPECT_LE(check_derivative(kQuad, 30.0, 1e-4), 1e-6);
  EXPECT_LE(check_derivative(kSqrt, 4.0, 1e-4), 1e-6);
  EXPECT_LE(check_derivative(kQuad, 50.0, 1e-4), 1e-9);
}

TEST(UtilityCheckDerivative, PropagatesDomainErrors) {
  EXPECT_THROW(check_derivative(kQuad, 0.5, 1.0), std::domain_error);
  EXPECT_THROW(check_derivative(kQuad, 1.0, 0.0), std::invalid_argument);
}

TEST(UtilityViolations, FlagsMalformedSpecs) {
  EXPECT_TRUE(utility_violations(kQuad).empty());
  EXPECT_TRUE(utility_violations(kSqrt).empty());
  EXPECT_EQ(utility_violations(UtilitySpec::quadratic(50.0, 0.0)).size(), 1u);
  EXPECT_EQ(utility_violations(UtilitySpec::quadratic(-5.0, 2.0)).size(), 1u);
  EXPECT_EQ(utility_violations(UtilitySpec::sqrt_monotone(-1.0)).size(), 1u);
  UtilitySpec no_optimum{UtilityKind::Quadratic, std::nullopt, 3.0, 1.0};
  EXPECT_EQ(utility_violations(no_optimum).size(), 1u);
  UtilitySpec sqrt_with_optimum = kSqrt;
  sqrt_with_optimum.optimum = 3.0;
  EXPECT_EQ(utility_violations(sqrt_with_optimum).size(), 1u);
}

TEST(UtilityKindNames, RoundTrip) {
  for (auto k : {UtilityKind::Quadratic, UtilityKind::SqrtMonotone}) {
    EXPECT_EQ(utility_kind_from_string(to_string(k)), k);
  }
  EXPECT_THROW(utility_kind_from_string("Log"), std::invalid_argument);
}

// Property checks over randomly drawn specs.

UtilitySpec random_quadratic(SplitMix64& rng) {
  return UtilitySpec::quadratic(rng.uniform(0.0, 500.0), rng.uniform(0.5, 100.0));
}

TEST(UtilityProperties, QuadraticMaximumOnlyAtOptimum) {
  SplitMix64 rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const auto u = random_quadratic(rng);
    const double peak = 1.5 * u.curvature;
    EXPECT_DOUBLE_EQ(evaluate(u, *u.optimum), peak);
    const double z = rng.uniform(0.0, 1000.0);
    if (z != *u.optimum) {
      EXPECT_LT(evaluate(u, z), peak);
    }
  }
}

TEST(UtilityProperties, ConcaveOnSampledTriples) {
  SplitMix64 rng(12);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto u = trial % 2 == 0 ? random_quadratic(rng)
                                  : UtilitySpec::sqrt_monotone(rng.uniform(0.1, 50.0));
    const double a = rng.uniform(0.0, 500.0);
    const double b = a + rng.uniform(1e-3, 500.0);
    const double t = rng.uniform(0.0, 1.0);
    const double lhs = evaluate(u, t * a + (1 - t) * b);
    const double rhs = t * evaluate(u, a) + (1 - t) * evaluate(u, b);
    EXPECT_GE(lhs, rhs - 1e-9 * (1.0 + std::abs(rhs)));
  }
}

TEST(UtilityProperties, QuadraticSecondDifferenceNegative) {
  SplitMix64 rng(13);
  for (int trial = 0; trial < 500; ++trial) {
    const auto u = random_quadratic(rng);
    const double z = rng.uniform(1.0, 500.0);
    const double h = rng.uniform(0.1, 1.0);
    EXPECT_LT(evaluate(u, z + h) - 2 * evaluate(u, z) + evaluate(u, z - h), 0.0);
  }
}

TEST(UtilityProperties, SqrtDerivativePositiveAndDecreasing) {
  SplitMix64 rng(14);
  for (int trial = 0; trial < 500; ++trial) {
    const auto u = UtilitySpec::sqrt_monotone(rng.uniform(0.1, 50.0));
    const double z = rng.uniform(1e-6, 1000.0);
    const double d = *derivative(u, z);
    EXPECT_GT(d, 0.0);
    EXPECT_LT(*derivative(u, z * 1.5 + 1e-3), d);
  }
}

TEST(UtilityProperties, DerivativeMatchesCentralDifferenceOnGrid) {
  SplitMix64 rng(15);
  for (int trial = 0; trial < 200; ++trial) {
    const auto u = trial % 2 == 0 ? random_quadratic(rng)
                                  : UtilitySpec::sqrt_monotone(rng.uniform(0.1, 50.0));
    for (double z = 0.1; z <= 1000.0; z *= 1.7) {
      const double h = 1e-4 * std::min(z, 1.0);
      const double scale = std::max(std::abs(*derivative(u, z)), 1.0);
      EXPECT_LE(check_derivative(u, z, h) / scale, 1e-6) << "z=" << z;
    }
  }
}

TEST(UtilityProperties, QuadraticDerivativeSignPointsAtOptimum) {
  SplitMix64 rng(16);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto u = random_quadratic(rng);
    const double z = rng.uniform(0.0, 1000.0);
    const double d = *derivative(u, z);
    const double toward = *u.optimum - z;
    EXPECT_EQ(d > 0, toward > 0);
    EXPECT_EQ(d < 0, toward < 0);
  }
}

}  // namespace
}  // namespace aimd_market
