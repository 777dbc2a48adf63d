#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "coopsense/noise_model.hpp"
#include "coopsense/random.hpp"

using namespace coopsense;

namespace {

ComplexSampleMatrix noise_matrix(double variance, std::size_t k, std::size_t m, std::uint64_t seed) {
  SplitMix64 rng(seed);
  return ComplexSampleMatrix(k, m, generate_noise(variance, k * m, rng));
}

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

Moments moments(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v;
  const double mean = s / static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return {mean, ss / static_cast<double>(x.size() - 1)};
}

}  // namespace

TEST(NoiseExpectation, ConstantEntriesGiveZero) {
  ComplexSampleMatrix m(3, 4, std::vector<Complex>(12, Complex{1.5, -0.5}));
  EXPECT_EQ(estimate_noise_expectation(m), 0.0);
}

TEST(NoiseExpectation, MatchesTwoPassOnSmallMatrix) {
  const std::vector<Complex> entries = {{1, 1}, {3, -1}, {0, 0}, {2, 4}};
  ComplexSampleMatrix m(2, 2, entries);
  const auto per = component_noise_expectations(m);
  ASSERT_EQ(per.size(), 2U);
  // Two-pass: subtract the row mean, then sum squared magnitudes over m-1.
  for (std::size_t c = 0; c < 2; ++c) {
    const Complex mean = (entries[2 * c] + entries[2 * c + 1]) / 2.0;
    const double expected = std::norm(entries[2 * c] - mean) + std::norm(entries[2 * c + 1] - mean);
    EXPECT_DOUBLE_EQ(per[c], expected);
  }
  EXPECT_DOUBLE_EQ(estimate_noise_expectation(m), 7.0);
}

TEST(NoiseExpectation, ConvergesForLargeSample) {
  const auto m = noise_matrix(2.0, 1, 1'000'000, 3);
  EXPECT_NEAR(estimate_noise_expectation(m), 2.0, 0.01);
}

TEST(NoiseExpectation, RoundTripWithinFourStandardErrors) {
  for (double var : {0.1, 1.0, 10.0}) {
    const std::size_t m = 100'000;
    const auto est = estimate_noise_expectation(noise_matrix(var, 1, m, 17));
    const double se = var / std::sqrt(static_cast<double>(m));
    EXPECT_NEAR(est, var, 4.0 * se) << var;
  }
}

TEST(NoiseExpectation, NeedsTwoObservations) {
  ComplexSampleMatrix m(2, 1, {Complex{1, 0}, Complex{0, 1}});
  EXPECT_THROW((void)estimate_noise_expectation(m), domain_error);
}

TEST(NoiseExpectation, SampleMatrixChecksShape) {
  EXPECT_THROW(ComplexSampleMatrix(2, 2, std::vector<Complex>(3)), domain_error);
  EXPECT_THROW(ComplexSampleMatrix(0, 2, {}), domain_error);
}

TEST(VarianceEstimateDraw, MatchesGeneratedEstimator) {
  // Estimates from generated snapshots and from the sampling law must share
  // their first two moments: mean sigma^2 and variance sigma^4/(m-1).
  const double var = 1.7;
  const std::size_t m = 20, reps = 40'000;
  std::vector<double> generated, drawn;
  SplitMix64 rng(99);
  for (std::size_t i = 0; i < reps; ++i) {
    generated.push_back(estimate_noise_expectation(ComplexSampleMatrix(1, m, generate_noise(var, m, rng))));
    drawn.push_back(draw_variance_estimate(var, m, rng));
  }
  const double law_var = var * var / static_cast<double>(m - 1);
  const double se_mean = std::sqrt(law_var / static_cast<double>(reps));
  for (const auto& x : {moments(generated), moments(drawn)}) {
    EXPECT_NEAR(x.mean, var, 4.0 * se_mean);
    EXPECT_NEAR(x.variance / law_var, 1.0, 0.05);
  }
}

TEST(ConfidenceBracket, KappaAtNinetyNinePercent) {
  const auto cb = confidence_bracket(1.0, 0.5, 25, 0.99);
  EXPECT_NEAR(cb.kappa, 2.58, 0.005);
  EXPECT_NEAR(cb.half_width, cb.kappa * 0.5 / 5.0, 1e-15);
  EXPECT_NEAR(cb.bracket.low, 1.0 - cb.half_width, 1e-15);
  EXPECT_NEAR(cb.bracket.high, 1.0 + cb.half_width, 1e-15);
}

TEST(ConfidenceBracket, KappaAtEightyPercent) {
  EXPECT_NEAR(confidence_bracket(1.0, 1.0, 10, 0.8).kappa, 1.2816, 1e-4);
}

TEST(ConfidenceBracket, ZeroSpreadIsDegenerate) {
  const auto cb = confidence_bracket(2.5, 0.0, 10, 0.99);
  EXPECT_EQ(cb.bracket.low, 2.5);
  EXPECT_EQ(cb.bracket.high, 2.5);
  EXPECT_TRUE(cb.bracket.degenerate());
}

TEST(ConfidenceBracket, WorkingConfidenceRescalesHalfWidth) {
  const auto base = confidence_bracket(1.0, 0.5, 25, 0.99);
  const auto scaled = confidence_bracket(1.0, 0.5, 25, 0.99, 0.95);
  EXPECT_NEAR(scaled.half_width, 1.959963984540054 * 0.5 / 5.0, 1e-12);
  EXPECT_LT(scaled.half_width, base.half_width);
}

TEST(ConfidenceBracket, LowEndStaysPositive) {
  const auto cb = confidence_bracket(0.1, 10.0, 4, 0.99);
  EXPECT_GT(cb.bracket.low, 0.0);
}

TEST(ConfidenceBracket, RejectsBadInputs) {
  EXPECT_THROW((void)confidence_bracket(1.0, 0.5, 1, 0.99), domain_error);
  EXPECT_THROW((void)confidence_bracket(1.0, 0.5, 10, 1.0), domain_error);
  EXPECT_THROW((void)confidence_bracket(1.0, -0.5, 10, 0.9), domain_error);
  EXPECT_THROW((void)confidence_bracket(0.0, 0.5, 10, 0.9), domain_error);
}

TEST(ConfidenceBracket, CoversTrueVariance) {
  // Each repetition measures the power of 1000 fresh noise samples.
  const double var = 1.3;
  const std::size_t n = 1000, reps = 10'000;
  SplitMix64 rng(5);
  std::size_t covered = 0;
  std::vector<double> power(n);
  for (std::size_t r = 0; r < reps; ++r) {
    const auto z = generate_noise(var, n, rng);
    for (std::size_t i = 0; i < n; ++i) power[i] = std::norm(z[i]);
    const auto mom = moments(power);
    const auto cb = confidence_bracket(mom.mean, std::sqrt(mom.variance), n, 0.99);
    covered += cb.bracket.contains(var) ? 1U : 0U;
  }
  EXPECT_GE(static_cast<double>(covered) / static_cast<double>(reps), 0.98);
}

TEST(ConfidenceBracket, WidthShrinksAsInverseRootN) {
  SplitMix64 rng(8);
  auto width_at = [&](std::size_t n) {
    const auto z = generate_noise(1.0, n, rng);
    std::vector<double> power;
    for (const auto& s : z) power.push_back(std::norm(s));
    const auto mom = moments(power);
    return confidence_bracket(mom.mean, std::sqrt(mom.variance), n, 0.99).bracket.width();
  };
  const double ratio = width_at(100) / width_at(10'000);
  EXPECT_NEAR(ratio, 10.0, 2.5);
  EXPECT_NEAR(confidence_bracket(1.0, 0.3, 100, 0.99).bracket.width() /
                  confidence_bracket(1.0, 0.3, 10'000, 0.99).bracket.width(),
              10.0, 1e-12);
}

TEST(NoiseUncertaintyModel, ValidatesInvariants) {
  EXPECT_THROW(NoiseUncertaintyModel(2.0, 0.99, {0.5, 1.5}, 10), domain_error);
  EXPECT_THROW(NoiseUncertaintyModel(1.0, 1.5, {0.5, 1.5}, 10), domain_error);
  EXPECT_THROW(NoiseUncertaintyModel(1.0, 0.99, {0.0, 1.5}, 10), domain_error);
  EXPECT_THROW(NoiseUncertaintyModel(1.0, 0.99, {1.5, 0.5}, 10), domain_error);
  const auto m = NoiseUncertaintyModel::calibrated(1.0, 0.5, 25, 0.99);
  EXPECT_NEAR(m.bracket().low, 1.0 - 2.5758293035489004 * 0.1, 1e-12);
  EXPECT_NEAR(m.expected_variance(), 1.0, 1e-15);
}

TEST(SampleNoiseVariance, DegenerateBracketIsConstant) {
  const NoiseUncertaintyModel m(2.0, 0.99, {2.0, 2.0}, 10);
  SplitMix64 rng(1);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sample_noise_variance(m, rng), 2.0);
}

TEST(SampleNoiseVariance, UniformMeanConverges) {
  const NoiseUncertaintyModel m(2.0, 0.99, {1.0, 3.0}, 10);
  SplitMix64 rng(2);
  double s = 0.0;
  const int n = 1'000'000;
  for (int i = 0; i < n; ++i) {
    const double v = sample_noise_variance(m, rng);
    ASSERT_TRUE(m.bracket().contains(v));
    s += v;
  }
  EXPECT_NEAR(s / n, 2.0, 0.01);
}

TEST(SampleNoiseVariance, SeedDeterminesSequence) {
  const NoiseUncertaintyModel m(2.0, 0.99, {1.0, 3.0}, 10);
  SplitMix64 a(42), b(42);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(sample_noise_variance(m, a), sample_noise_variance(m, b));
}

TEST(GenerateNoise, SingleSampleIsFinite) {
  SplitMix64 rng(3);
  const auto z = generate_noise(1.0, 1, rng);
  ASSERT_EQ(z.size(), 1U);
  EXPECT_TRUE(std::isfinite(z[0].real()) && std::isfinite(z[0].imag()));
}

TEST(GenerateNoise, VarianceRoundTrip) {
  const auto m = noise_matrix(1.0, 1, 1'000'000, 4);
  EXPECT_NEAR(estimate_noise_expectation(m), 1.0, 0.005);
}

TEST(GenerateNoise, SeedDeterminesVector) {
  SplitMix64 a(77), b(77);
  EXPECT_EQ(generate_noise(1.0, 64, a), generate_noise(1.0, 64, b));
}

TEST(GenerateNoise, RejectsBadArguments) {
  SplitMix64 rng(1);
  EXPECT_THROW((void)generate_noise(0.0, 4, rng), domain_error);
  EXPECT_THROW((void)generate_noise(1.0, 0, rng), domain_error);
}
