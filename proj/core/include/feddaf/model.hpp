#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "feddaf/dataset.hpp"

namespace feddaf {

enum class Activation { kRelu, kTanh };

std::string_view to_string(Activation a) noexcept;
Activation parse_activation(std::string_view name);

/// Feed-forward classifier: input -> hidden... -> num_classes logits.
/// Hidden layers apply the activation; the output layer is affine.
struct ModelSpec {
  std::size_t input_dim = 1;
  std::vector<std::size_t> hidden_dims;
  int num_classes = 2;
  Activation activation = Activation::kRelu;

  /// Throws ConfigError on zero widths or fewer than two classes.
  void validate() const;

  std::size_t num_layers() const noexcept { return hidden_dims.size() + 1; }
  std::size_t fan_in(std::size_t layer) const;
  std::size_t fan_out(std::size_t layer) const;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

/// Sum over layers of (fan_in + 1) * fan_out.
std::size_t param_count(const ModelSpec& spec);

/// Location of one layer inside a flat parameter vector. Weights are stored
/// row-major as fan_out x fan_in, followed by fan_out biases.
struct LayerSlice {
  std::size_t weight_offset;
  std::size_t bias_offset;
  std::size_t fan_in;
  std::size_t fan_out;
};
std::vector<LayerSlice> layer_layout(const ModelSpec& spec);

/// All trainable parameters of one model, flattened.
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(std::vector<double> values) : values_(std::move(values)) {}
  explicit ParamVector(std::size_t n, double fill = 0.0) : values_(n, fill) {}

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  bool all_finite() const noexcept;

  friend bool operator==(const ParamVector&, const ParamVector&) = default;

 private:
  std::vector<double> values_;
};

struct LossAndGradient {
  double loss = 0.0;
  std::vector<double> grad;
};

/// Scaled-uniform weights with bound sqrt(6 / (fan_in + fan_out)); zero biases.
ParamVector init_params(const ModelSpec& spec, std::uint64_t seed);

/// Logits, row-major rows x num_classes.
std::vector<double> forward(const ModelSpec& spec, const ParamVector& params, const BatchView& batch);

/// Mean categorical cross-entropy over the batch and its exact gradient.
/// Rows are reduced in a canonical content order, so any permutation of the
/// batch produces bit-identical results.
LossAndGradient loss_and_gradient(const ModelSpec& spec, const ParamVector& params,
                                  const BatchView& batch);

/// params - lr * grad.
ParamVector sgd_step(const ParamVector& params, std::span<const double> grad, double lr);
void sgd_step_inplace(ParamVector& params, std::span<const double> grad, double lr);

struct LocalTrainResult {
  ParamVector params;
  /// Mean mini-batch loss over the final epoch, measured before each step.
  double last_epoch_loss = 0.0;
  std::size_t steps = 0;
};

/// Mini-batch SGD. Each epoch shuffles row order with a stream derived from
/// (seed, epoch) and keeps a smaller trailing batch. lr may be zero.
LocalTrainResult train_local_tracked(const ModelSpec& spec, ParamVector params,
                                     const LabeledDataset& data, std::size_t epochs, double lr,
                                     std::size_t batch_size, std::uint64_t seed);
ParamVector train_local(const ModelSpec& spec, ParamVector params, const LabeledDataset& data,
                        std::size_t epochs, double lr, std::size_t batch_size, std::uint64_t seed);

/// Argmax predictions, ties go to the lowest class index.
std::vector<int> predict(const ModelSpec& spec, const ParamVector& params, const BatchView& batch);
double evaluate(const ModelSpec& spec, const ParamVector& params, const LabeledDataset& data);

/// Fisher-Yates order of 0..n-1 driven by the library's RNG.
std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed);

}  // namespace feddaf
