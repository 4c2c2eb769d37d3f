#include "feddaf/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "feddaf/error.hpp"
#include "feddaf/seeding.hpp"

namespace feddaf {

std::string_view to_string(Activation a) noexcept {
  return a == Activation::kRelu ? "relu" : "tanh";
}

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  throw ConfigError("unknown activation '" + std::string(name) + "' (expected relu or tanh)");
}

void ModelSpec::validate() const {
  if (input_dim < 1) throw ConfigError("input_dim must be >= 1");
  if (num_classes < 2) throw ConfigError("num_classes must be >= 2");
  for (auto h : hidden_dims) {
    if (h < 1) throw ConfigError("hidden layer widths must be >= 1");
  }
}

std::size_t ModelSpec::fan_in(std::size_t layer) const {
  return layer == 0 ? input_dim : hidden_dims.at(layer - 1);
}

std::size_t ModelSpec::fan_out(std::size_t layer) const {
  return layer == hidden_dims.size() ? static_cast<std::size_t>(num_classes) : hidden_dims.at(layer);
}

std::vector<LayerSlice> layer_layout(const ModelSpec& spec) {
  std::vector<LayerSlice> out;
  out.reserve(spec.num_layers());
  std::size_t offset = 0;
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    const auto in = spec.fan_in(l);
    const auto fo = spec.fan_out(l);
    out.push_back({offset, offset + in * fo, in, fo});
    offset += (in + 1) * fo;
  }
  return out;
}

std::size_t param_count(const ModelSpec& spec) {
  std::size_t n = 0;
  for (std::size_t l = 0; l < spec.num_layers(); ++l) n += (spec.fan_in(l) + 1) * spec.fan_out(l);
  return n;
}

bool ParamVector::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

ParamVector init_params(const ModelSpec& spec, std::uint64_t seed) {
  spec.validate();
  ParamVector params(param_count(spec));
  Rng rng(seed);
  for (const auto& layer : layer_layout(spec)) {
    const double bound = std::sqrt(6.0 / static_cast<double>(layer.fan_in + layer.fan_out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (std::size_t k = 0; k < layer.fan_in * layer.fan_out; ++k) {
      params[layer.weight_offset + k] = dist(rng);
    }
  }
  return params;
}

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  return idx;
}

namespace {

void check_shapes(const ModelSpec& spec, const ParamVector& params, const BatchView& batch) {
  if (batch.cols != spec.input_dim) {
    throw DimensionError("batch has " + std::to_string(batch.cols) + " columns, model expects " +
                         std::to_string(spec.input_dim));
  }
  if (params.size() != param_count(spec)) {
    throw DimensionError("parameter vector has length " + std::to_string(params.size()) +
                         ", model expects " + std::to_string(param_count(spec)));
  }
  if (batch.features.size() != batch.rows() * batch.cols) {
    throw DimensionError("batch feature/label row counts differ");
  }
}

double activate(Activation a, double z) { return a == Activation::kRelu ? (z > 0.0 ? z : 0.0) : std::tanh(z); }

// Affine map for one layer: out[r, o] = b[o] + sum_i W[o, i] * in[r, i].
void affine(std::span<const double> params, const LayerSlice& layer, std::span<const double> in,
            std::size_t rows, std::vector<double>& out) {
  out.assign(rows * layer.fan_out, 0.0);
  const double* w = params.data() + layer.weight_offset;
  const double* b = params.data() + layer.bias_offset;
  for (std::size_t r = 0; r < rows; ++r) {
    const double* x = in.data() + r * layer.fan_in;
    double* z = out.data() + r * layer.fan_out;
    for (std::size_t o = 0; o < layer.fan_out; ++o) {
      const double* wo = w + o * layer.fan_in;
      double acc = b[o];
      for (std::size_t i = 0; i < layer.fan_in; ++i) acc += wo[i] * x[i];
      z[o] = acc;
    }
  }
}

// Runs the network, keeping every layer's input (acts[l]) and the
// pre-activation of every layer (pre[l]). pre.back() holds the logits.
void run_layers(const ModelSpec& spec, const ParamVector& params, std::span<const double> input,
                std::size_t rows, const std::vector<LayerSlice>& layout,
                std::vector<std::vector<double>>& acts, std::vector<std::vector<double>>& pre) {
  const auto n_layers = layout.size();
  acts.resize(n_layers);
  pre.resize(n_layers);
  acts[0].assign(input.begin(), input.end());
  for (std::size_t l = 0; l < n_layers; ++l) {
    affine(params.values(), layout[l], acts[l], rows, pre[l]);
    if (l + 1 < n_layers) {
      acts[l + 1].resize(pre[l].size());
      std::transform(pre[l].begin(), pre[l].end(), acts[l + 1].begin(),
                     [a = spec.activation](double z) { return activate(a, z); });
    }
  }
}

}  // namespace

std::vector<double> forward(const ModelSpec& spec, const ParamVector& params, const BatchView& batch) {
  check_shapes(spec, params, batch);
  const auto layout = layer_layout(spec);
  std::vector<std::vector<double>> acts, pre;
  run_layers(spec, params, batch.features, batch.rows(), layout, acts, pre);
  return std::move(pre.back());
}

LossAndGradient loss_and_gradient(const ModelSpec& spec, const ParamVector& params,
                                  const BatchView& batch) {
  check_shapes(spec, params, batch);
  const std::size_t rows = batch.rows();
  if (rows == 0) throw EmptyDatasetError("loss_and_gradient needs at least one row");

  // Canonical row order: lexicographic on (features, label).
  std::vector<std::size_t> order(rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    auto ra = batch.row(a);
    auto rb = batch.row(b);
    if (std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end())) return true;
    if (std::lexicographical_compare(rb.begin(), rb.end(), ra.begin(), ra.end())) return false;
    return batch.labels[a] < batch.labels[b];
  });
  std::vector<double> input(rows * batch.cols);
  std::vector<int> labels(rows);
  for (std::size_t k = 0; k < rows; ++k) {
    auto r = batch.row(order[k]);
    std::copy(r.begin(), r.end(), input.begin() + static_cast<std::ptrdiff_t>(k * batch.cols));
    labels[k] = batch.labels[order[k]];
  }

  const auto layout = layer_layout(spec);
  std::vector<std::vector<double>> acts, pre;
  run_layers(spec, params, input, rows, layout, acts, pre);

  const auto classes = static_cast<std::size_t>(spec.num_classes);
  const double inv_rows = 1.0 / static_cast<double>(rows);
  LossAndGradient out;
  out.grad.assign(params.size(), 0.0);

  // delta = d(mean loss)/d(pre-activation) of the current layer.
  std::vector<double> delta(rows * classes);
  double loss_sum = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    const double* z = pre.back().data() + r * classes;
    double* d = delta.data() + r * classes;
    const double zmax = *std::max_element(z, z + classes);
    double sum = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
      d[c] = std::exp(z[c] - zmax);
      sum += d[c];
    }
    const auto y = static_cast<std::size_t>(labels[r]);
    loss_sum += std::log(sum) - (z[y] - zmax);
    for (std::size_t c = 0; c < classes; ++c) d[c] = (d[c] / sum - (c == y ? 1.0 : 0.0)) * inv_rows;
  }
  out.loss = loss_sum * inv_rows;

  std::vector<double> upstream;
  for (std::size_t l = layout.size(); l-- > 0;) {
    const auto& layer = layout[l];
    const auto& in = acts[l];
    double* gw = out.grad.data() + layer.weight_offset;
    double* gb = out.grad.data() + layer.bias_offset;
    for (std::size_t r = 0; r < rows; ++r) {
      const double* d = delta.data() + r * layer.fan_out;
      const double* x = in.data() + r * layer.fan_in;
      for (std::size_t o = 0; o < layer.fan_out; ++o) {
        const double dv = d[o];
        gb[o] += dv;
        double* gwo = gw + o * layer.fan_in;
        for (std::size_t i = 0; i < layer.fan_in; ++i) gwo[i] += dv * x[i];
      }
    }
    if (l == 0) break;

    // Back through the weights, then through the activation of layer l-1.
    const double* w = params.values().data() + layer.weight_offset;
    upstream.assign(rows * layer.fan_in, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
      const double* d = delta.data() + r * layer.fan_out;
      double* u = upstream.data() + r * layer.fan_in;
      for (std::size_t o = 0; o < layer.fan_out; ++o) {
        const double dv = d[o];
        const double* wo = w + o * layer.fan_in;
        for (std::size_t i = 0; i < layer.fan_in; ++i) u[i] += dv * wo[i];
      }
    }
    const auto& z_prev = pre[l - 1];
    const auto& a_prev = acts[l];
    for (std::size_t k = 0; k < upstream.size(); ++k) {
      upstream[k] *= spec.activation == Activation::kRelu ? (z_prev[k] > 0.0 ? 1.0 : 0.0)
                                                          : 1.0 - a_prev[k] * a_prev[k];
    }
    delta.swap(upstream);
  }
  return out;
}

void sgd_step_inplace(ParamVector& params, std::span<const double> grad, double lr) {
  if (grad.size() != params.size()) {
    throw DimensionError("sgd_step: params length " + std::to_string(params.size()) +
                         " != grad length " + std::to_string(grad.size()));
  }
  auto v = params.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= lr * grad[i];
}

ParamVector sgd_step(const ParamVector& params, std::span<const double> grad, double lr) {
  ParamVector out = params;
  sgd_step_inplace(out, grad, lr);
  return out;
}

LocalTrainResult train_local_tracked(const ModelSpec& spec, ParamVector params,
                                     const LabeledDataset& data, std::size_t epochs, double lr,
                                     std::size_t batch_size, std::uint64_t seed) {
  if (data.empty()) throw EmptyDatasetError("train_local: dataset is empty");
  if (batch_size == 0) throw ConfigError("train_local: batch_size must be >= 1");
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ConfigError("train_local: lr must be finite and >= 0");

  LocalTrainResult result{std::move(params), 0.0, 0};
  BatchBuffer buffer;
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    const auto order = shuffled_indices(data.rows(), derive_seed(seed, {epoch}));
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const auto len = std::min(batch_size, order.size() - start);
      buffer.gather(data, std::span(order).subspan(start, len));
      const auto lg = loss_and_gradient(spec, result.params, buffer.view());
      sgd_step_inplace(result.params, lg.grad, lr);
      loss_sum += lg.loss;
      ++batches;
      ++result.steps;
    }
    result.last_epoch_loss = loss_sum / static_cast<double>(batches);
  }
  return result;
}

ParamVector train_local(const ModelSpec& spec, ParamVector params, const LabeledDataset& data,
                        std::size_t epochs, double lr, std::size_t batch_size, std::uint64_t seed) {
  return train_local_tracked(spec, std::move(params), data, epochs, lr, batch_size, seed).params;
}

std::vector<int> predict(const ModelSpec& spec, const ParamVector& params, const BatchView& batch) {
  const auto logits = forward(spec, params, batch);
  const auto classes = static_cast<std::size_t>(spec.num_classes);
  std::vector<int> out(batch.rows());
  for (std::size_t r = 0; r < batch.rows(); ++r) {
    const double* z = logits.data() + r * classes;
    std::size_t best = 0;
    for (std::size_t c = 1; c < classes; ++c) {
      if (z[c] > z[best]) best = c;
    }
    out[r] = static_cast<int>(best);
  }
  return out;
}

double evaluate(const ModelSpec& spec, const ParamVector& params, const LabeledDataset& data) {
  if (data.empty()) throw EmptyDatasetError("evaluate: dataset is empty");
  const auto pred = predict(spec, params, data.view());
  std::size_t correct = 0;
  for (std::size_t r = 0; r < pred.size(); ++r) correct += pred[r] == data.label(r) ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(pred.size());
}

}  // namespace feddaf
