#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "feddaf/dataset.hpp"
#include "feddaf/model.hpp"

namespace feddaf {

/// Unweighted mean of mini-batch gradients over a dataset.
struct MeanGradient {
  std::vector<double> values;
  /// Number of mini-batches J that were averaged.
  std::size_t num_batches = 0;
};

/// Row order of the J = ceil(n / batch_size) mini-batches used for a given
/// seed. Two models evaluated with the same seed see the same batches.
std::vector<std::size_t> gradient_field_order(std::size_t rows, std::uint64_t seed);

/// (1/J) * sum_j grad(loss on batch j). The trailing batch may be smaller and
/// still counts with weight 1/J. params are not modified.
MeanGradient mean_gradient_field(const ModelSpec& spec, const ParamVector& params,
                                 const LabeledDataset& target_data, std::size_t batch_size,
                                 std::uint64_t seed);

}  // namespace feddaf
