#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "feddaf/config.hpp"
#include "feddaf/dataset.hpp"
#include "feddaf/model.hpp"

namespace feddaf::testing {

inline LabeledDataset random_dataset(std::size_t rows, std::size_t cols, int classes,
                                     std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  std::uniform_int_distribution<int> label(0, classes - 1);
  std::vector<double> f(rows * cols);
  std::vector<int> l(rows);
  for (auto& v : f) v = normal(rng);
  for (auto& y : l) y = label(rng);
  return LabeledDataset(std::move(f), std::move(l), cols, classes);
}

inline ParamVector random_params(const ModelSpec& spec, std::uint64_t seed, double scale = 0.5) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  ParamVector p(param_count(spec));
  for (auto& v : p.values()) v = normal(rng);
  return p;
}

inline std::vector<std::vector<double>> rows_of(const LabeledDataset& d) {
  std::vector<std::vector<double>> out;
  for (std::size_t r = 0; r < d.rows(); ++r) out.emplace_back(d.row(r).begin(), d.row(r).end());
  return out;
}

inline std::vector<int> labels_of(const LabeledDataset& d) {
  return {d.labels().begin(), d.labels().end()};
}

/// Two tight blobs at (-3, 0) and (3, 0), labels 0 and 1.
inline LabeledDataset two_blobs(std::size_t per_class, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.5);
  std::vector<double> f;
  std::vector<int> l;
  for (std::size_t i = 0; i < per_class; ++i) {
    for (int c = 0; c < 2; ++c) {
      f.push_back((c == 0 ? -3.0 : 3.0) + noise(rng));
      f.push_back(noise(rng));
      l.push_back(c);
    }
  }
  return LabeledDataset(std::move(f), std::move(l), 2, 2);
}

/// Small config that finishes a full run in well under a second.
inline FederationConfig small_config(std::uint64_t seed = 3) {
  FederationConfig c;
  c.clients = 3;
  c.rounds = 4;
  c.source_pool = 600;
  c.target_pool = 300;
  c.num_classes = 3;
  c.input_dim = 4;
  c.hidden_dims = {8};
  c.scarcity = 0.2;
  c.eta_source = 0.05;
  c.seed = seed;
  return c;
}
}  // namespace feddaf::testing
