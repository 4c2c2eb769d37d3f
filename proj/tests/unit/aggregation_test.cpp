#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "feddaf/aggregation.hpp"
#include "feddaf/error.hpp"
#include "gompertz_oracle.hpp"
#include "test_data.hpp"

namespace feddaf {
namespace {

using std::numbers::pi;

// x in {+1, -1}, both labels at each x: the loss optimum is at zero weights and
// W = (0, a) / (0, -a) give exactly opposite mean gradients.
LabeledDataset symmetric_four() {
  return LabeledDataset({1.0, 1.0, -1.0, -1.0}, {1, 0, 1, 0}, 1, 2);
}
const ModelSpec kLinear{1, {}, 2, Activation::kRelu};
ParamVector linear(double a) { return ParamVector(std::vector<double>{0.0, a, 0.0, 0.0}); }

TEST(CosineSimilarity, Examples) {
  const std::vector<double> a{1.0, 0.0}, b{0.0, 1.0}, c{-2.0, 0.0}, z{0.0, 0.0};
  EXPECT_DOUBLE_EQ(cosine_similarity(a, a), 1.0);
  EXPECT_DOUBLE_EQ(cosine_similarity(a, b), 0.0);
  EXPECT_DOUBLE_EQ(cosine_similarity(a, c), -1.0);
  EXPECT_EQ(cosine_similarity(a, z), 0.0);
  EXPECT_THROW(cosine_similarity(a, std::vector<double>{1.0}), DimensionError);
}

TEST(CosineSimilarity, SelfAndNegationAreExact) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int t = 0; t < 500; ++t) {
    std::vector<double> a(1 + t % 40), neg;
    for (auto& v : a) v = n(rng) * std::pow(10.0, t % 7 - 3);
    for (double v : a) neg.push_back(-v);
    EXPECT_EQ(cosine_similarity(a, a), 1.0);
    EXPECT_EQ(cosine_similarity(a, neg), -1.0);
  }
}

TEST(CosineSimilarity, ScaleInvariantAndBounded) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> a(7), b(7);
    for (auto& v : a) v = n(rng);
    for (auto& v : b) v = n(rng);
    const double c = cosine_similarity(a, b);
    EXPECT_GE(c, -1.0);
    EXPECT_LE(c, 1.0);
    auto scaled = a;
    for (auto& v : scaled) v *= 1e6;
    EXPECT_NEAR(cosine_similarity(scaled, b), c, 1e-14);
    EXPECT_NEAR(cosine_similarity(b, a), c, 1e-15);
  }
}

TEST(Angle, ClampsAndMatchesArccos) {
  EXPECT_EQ(angle(1.0), 0.0);
  EXPECT_EQ(angle(1.0 + 1e-12), 0.0);
  EXPECT_DOUBLE_EQ(angle(-1.0 - 1e-12), pi);
  EXPECT_DOUBLE_EQ(angle(0.0), pi / 2);
}

TEST(GompertzWeight, KnownValues) {
  // theta = 1 is the fixed point 1 - 1/e for every mu.
  for (double mu : {-10.0, -1.0, 0.0, 5.0}) EXPECT_NEAR(gompertz_weight(1.0, mu), 1.0 - std::exp(-1.0), 1e-15);
  EXPECT_NEAR(gompertz_weight(0.0, 5.0), oracle::gompertz_exact(0.0, 5.0), 1e-15);
  EXPECT_EQ(gompertz_weight(0.0, 0.0), gompertz_weight(3.0, 0.0));
}

TEST(GompertzWeight, MatchesOracleAndStaysInRange) {
  for (double mu : {-10.0, -5.0, -1.0, 0.0, 1.0, 5.0, 10.0}) {
    for (int i = 0; i <= 200; ++i) {
      const double theta = pi * i / 200.0;
      const double w = gompertz_weight(theta, mu);
      const double ref = oracle::gompertz_exact(theta, mu);
      EXPECT_GE(w, 0.0);
      EXPECT_LE(w, 1.0);
      if (ref > 0) EXPECT_LE(std::abs(w - ref) / ref, 1e-12) << mu << " " << theta;
    }
  }
}

TEST(GompertzWeight, MonotoneInTheta) {
  for (double mu : {-10.0, -5.0, -1.0, 1.0, 5.0, 10.0}) {
    double prev = gompertz_weight(0.0, mu);
    for (int i = 1; i <= 1000; ++i) {
      const double w = gompertz_weight(pi * i / 1000.0, mu);
      if (mu > 0) EXPECT_LE(w, prev);
      else EXPECT_GE(w, prev);
      prev = w;
    }
  }
}

TEST(BlendModels, EndpointsAndMidpoint) {
  const ParamVector s({1.0, 2.0, -3.0}), t({5.0, -2.0, 0.5});
  EXPECT_EQ(blend_models(s, t, 1.0), s);
  EXPECT_EQ(blend_models(s, t, 0.0), t);
  const auto mid = blend_models(s, t, 0.5);
  EXPECT_DOUBLE_EQ(mid[0], 3.0);
  EXPECT_DOUBLE_EQ(mid[1], 0.0);
  EXPECT_EQ(blend_models(s, s, 0.37), s);
  EXPECT_THROW(blend_models(s, ParamVector(2), 0.5), DimensionError);
  EXPECT_THROW(blend_models(s, t, 1.5), DimensionError);
  EXPECT_THROW(blend_models(s, t, NAN), DimensionError);
}

TEST(AverageModels, MeanOfModels) {
  const std::vector<ParamVector> ms{ParamVector(std::vector<double>{1.0, 0.0}), ParamVector(std::vector<double>{3.0, 4.0})};
  EXPECT_EQ(average_models(ms), ParamVector(std::vector<double>{2.0, 2.0}));
  EXPECT_EQ(average_models(std::span(ms).first(1)), ms[0]);
  EXPECT_THROW(average_models({}), DimensionError);
}

TEST(TargetAggregate, IdenticalModelsKeepTarget) {
  const auto d = testing::random_dataset(30, 3, 3, 2);
  const ModelSpec spec{3, {4}, 3, Activation::kRelu};
  const auto w = testing::random_params(spec, 5);
  const auto r = target_aggregate(spec, w, w, d, 5.0, 8, 1);
  EXPECT_EQ(r.report.cosine, 1.0);
  EXPECT_EQ(r.report.theta, 0.0);
  EXPECT_EQ(r.adapted, w);
  EXPECT_FALSE(r.report.degenerate);
}

TEST(TargetAggregate, OppositeGradientsGiveAngleOfPi) {
  const auto d = symmetric_four();
  for (double mu : {-5.0, 1.0, 5.0}) {
    const auto r = target_aggregate(kLinear, linear(0.8), linear(-0.8), d, mu, 4, 1);
    EXPECT_EQ(r.report.cosine, -1.0);
    EXPECT_DOUBLE_EQ(r.report.theta, pi);
    const double ref = static_cast<double>(oracle::gompertz_exact(oracle::pi50(), oracle::Decimal50(mu)));
    EXPECT_NEAR(r.report.alpha, ref, 1e-10);
  }
}

TEST(TargetAggregate, ZeroGradientIsDegenerate) {
  const auto d = symmetric_four();
  const auto r = target_aggregate(kLinear, linear(0.0), linear(0.5), d, 5.0, 4, 1);
  EXPECT_TRUE(r.report.degenerate);
  EXPECT_EQ(r.report.cosine, 0.0);
  EXPECT_DOUBLE_EQ(r.report.theta, pi / 2);
}

}  // namespace
}  // namespace feddaf
