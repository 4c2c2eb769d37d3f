#pragma once

// Test-only re-implementation of the classifier's forward pass and loss.
// Written from the documented parameter layout (per layer: fan_out x fan_in
// row-major weights, then fan_out biases) without touching the library's
// forward/backward code, so it can act as an oracle for it.

#include <cmath>
#include <cstddef>
#include <vector>

#include "feddaf/model.hpp"

namespace feddaf::oracle {

template <typename T>
std::vector<std::vector<T>> reference_logits(const ModelSpec& spec, const std::vector<T>& params,
                                             const std::vector<std::vector<T>>& rows) {
  std::vector<std::size_t> widths{spec.input_dim};
  widths.insert(widths.end(), spec.hidden_dims.begin(), spec.hidden_dims.end());
  widths.push_back(static_cast<std::size_t>(spec.num_classes));

  std::vector<std::vector<T>> out;
  for (const auto& x : rows) {
    std::vector<T> a = x;
    std::size_t offset = 0;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
      const std::size_t in = widths[l], fo = widths[l + 1];
      std::vector<T> z(fo);
      for (std::size_t o = 0; o < fo; ++o) {
        T acc = params[offset + in * fo + o];
        for (std::size_t i = 0; i < in; ++i) acc += params[offset + o * in + i] * a[i];
        z[o] = acc;
      }
      offset += (in + 1) * fo;
      const bool last = l + 2 == widths.size();
      if (!last) {
        for (auto& v : z) {
          if (spec.activation == Activation::kRelu) {
            v = v > T(0) ? v : T(0);
          } else {
            using std::tanh;
            v = tanh(v);
          }
        }
      }
      a = std::move(z);
    }
    out.push_back(std::move(a));
  }
  return out;
}

/// Mean cross-entropy, computed naively as -log(exp(z_y) / sum exp(z)).
template <typename T>
T reference_loss(const ModelSpec& spec, const std::vector<T>& params,
                 const std::vector<std::vector<T>>& rows, const std::vector<int>& labels) {
  using std::exp;
  using std::log;
  const auto logits = reference_logits(spec, params, rows);
  T total = 0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    T denom = 0;
    for (const auto& z : logits[r]) denom += exp(z);
    total += log(denom) - logits[r][static_cast<std::size_t>(labels[r])];
  }
  return total / static_cast<T>(rows.size());
}

/// Central finite differences of reference_loss in long double.
inline std::vector<double> finite_difference_gradient(const ModelSpec& spec,
                                                      const std::vector<double>& params,
                                                      const std::vector<std::vector<double>>& rows,
                                                      const std::vector<int>& labels,
                                                      long double h = 1e-5L) {
  std::vector<long double> p(params.begin(), params.end());
  std::vector<std::vector<long double>> x;
  for (const auto& r : rows) x.emplace_back(r.begin(), r.end());
  std::vector<double> grad(params.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const long double keep = p[i];
    p[i] = keep + h;
    const long double up = reference_loss(spec, p, x, labels);
    p[i] = keep - h;
    const long double down = reference_loss(spec, p, x, labels);
    p[i] = keep;
    grad[i] = static_cast<double>((up - down) / (2.0L * h));
  }
  return grad;
}

}  // namespace feddaf::oracle
