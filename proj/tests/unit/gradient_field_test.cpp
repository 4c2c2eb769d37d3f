#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "feddaf/error.hpp"
#include "feddaf/gradient_field.hpp"
#include "test_data.hpp"

namespace feddaf {
namespace {

const ModelSpec kSpec{3, {5}, 3, Activation::kTanh};

double max_rel_diff(std::span<const double> a, std::span<const double> b) {
  double scale = 0.0, diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    scale = std::max(scale, std::abs(b[i]));
    diff = std::max(diff, std::abs(a[i] - b[i]));
  }
  return diff / std::max(scale, 1e-300);
}

TEST(MeanGradientField, SingleBatchEqualsFullGradient) {
  const auto d = testing::random_dataset(40, 3, 3, 1);
  const auto p = testing::random_params(kSpec, 2);
  const auto g = mean_gradient_field(kSpec, p, d, 40, 9);
  EXPECT_EQ(g.num_batches, 1u);
  const auto full = loss_and_gradient(kSpec, p, d.view());
  EXPECT_LE(max_rel_diff(g.values, full.grad), 1e-10);
  // Larger batch size than data is still one batch.
  EXPECT_EQ(mean_gradient_field(kSpec, p, d, 1000, 9).values, g.values);
}

TEST(MeanGradientField, EqualBatchesAverageToFullGradient) {
  const auto d = testing::random_dataset(48, 3, 3, 3);
  const auto p = testing::random_params(kSpec, 4);
  const auto g = mean_gradient_field(kSpec, p, d, 16, 5);
  EXPECT_EQ(g.num_batches, 3u);
  const auto full = loss_and_gradient(kSpec, p, d.view());
  EXPECT_LE(max_rel_diff(g.values, full.grad), 1e-10);
}

TEST(MeanGradientField, RaggedTailWeighsLikeAnyBatch) {
  const auto d = testing::random_dataset(10, 3, 3, 6);
  const auto p = testing::random_params(kSpec, 7);
  const auto g = mean_gradient_field(kSpec, p, d, 4, 11);
  ASSERT_EQ(g.num_batches, 3u);
  const auto order = gradient_field_order(10, 11);
  std::vector<double> expected(g.values.size(), 0.0);
  for (std::size_t start = 0; start < 10; start += 4) {
    const std::size_t end = std::min<std::size_t>(start + 4, 10);
    const auto batch = d.select(std::span(order).subspan(start, end - start));
    const auto lg = loss_and_gradient(kSpec, p, batch.view());
    for (std::size_t i = 0; i < expected.size(); ++i) expected[i] += lg.grad[i] / 3.0;
  }
  EXPECT_LE(max_rel_diff(g.values, expected), 1e-12);
}

TEST(MeanGradientField, DeterministicAndSeedSensitive) {
  const auto d = testing::random_dataset(30, 3, 3, 8);
  const auto p = testing::random_params(kSpec, 9);
  EXPECT_EQ(mean_gradient_field(kSpec, p, d, 7, 1).values, mean_gradient_field(kSpec, p, d, 7, 1).values);
  EXPECT_NE(mean_gradient_field(kSpec, p, d, 7, 1).values, mean_gradient_field(kSpec, p, d, 7, 2).values);
}

TEST(MeanGradientField, OrderIsPermutation) {
  auto order = gradient_field_order(25, 4);
  std::sort(order.begin(), order.end());
  std::vector<std::size_t> expected(25);
  std::iota(expected.begin(), expected.end(), std::size_t{0});
  EXPECT_EQ(order, expected);
}

TEST(MeanGradientField, RejectsBadInput) {
  const auto p = testing::random_params(kSpec, 1);
  EXPECT_THROW(mean_gradient_field(kSpec, p, LabeledDataset{}, 4, 1), EmptyDatasetError);
  const auto d = testing::random_dataset(5, 3, 3, 1);
  EXPECT_THROW(mean_gradient_field(kSpec, p, d, 0, 1), ConfigError);
  EXPECT_THROW(mean_gradient_field(kSpec, ParamVector(3), d, 2, 1), DimensionError);
}

}  // namespace
}  // namespace feddaf
