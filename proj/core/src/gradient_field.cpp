#include "feddaf/gradient_field.hpp"

#include <algorithm>
#include <span>

#include "feddaf/error.hpp"

namespace feddaf {

std::vector<std::size_t> gradient_field_order(std::size_t rows, std::uint64_t seed) {
  return shuffled_indices(rows, seed);
}

MeanGradient mean_gradient_field(const ModelSpec& spec, const ParamVector& params,
                                 const LabeledDataset& target_data, std::size_t batch_size,
                                 std::uint64_t seed) {
  if (target_data.empty()) throw EmptyDatasetError("mean_gradient_field: dataset is empty");
  if (batch_size == 0) throw ConfigError("mean_gradient_field: batch_size must be >= 1");

  const auto order = gradient_field_order(target_data.rows(), seed);
  MeanGradient out;
  out.values.assign(params.size(), 0.0);
  BatchBuffer buffer;
  // Batches are summed in index order so the reduction is fixed.
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const auto len = std::min(batch_size, order.size() - start);
    buffer.gather(target_data, std::span(order).subspan(start, len));
    const auto lg = loss_and_gradient(spec, params, buffer.view());
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += lg.grad[i];
    ++out.num_batches;
  }
  const double inv = 1.0 / static_cast<double>(out.num_batches);
  for (auto& v : out.values) v *= inv;
  return out;
}

}  // namespace feddaf
