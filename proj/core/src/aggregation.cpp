#include "feddaf/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "feddaf/error.hpp"
#include "feddaf/gradient_field.hpp"

namespace feddaf {

double cosine_similarity(std::span<const double> g1, std::span<const double> g2) {
  if (g1.size() != g2.size()) {
    throw DimensionError("cosine_similarity: lengths " + std::to_string(g1.size()) + " and " +
                         std::to_string(g2.size()) + " differ");
  }
  double dot = 0.0, n1 = 0.0, n2 = 0.0;
  for (std::size_t i = 0; i < g1.size(); ++i) {
    dot += g1[i] * g2[i];
    n1 += g1[i] * g1[i];
    n2 += g2[i] * g2[i];
  }
  if (std::sqrt(n1) <= kDegenerateNorm || std::sqrt(n2) <= kDegenerateNorm) return 0.0;
  // sqrt(n*n) rounds back to n, so equal or opposite vectors give exactly +-1.
  const double prod = n1 * n2;
  const double denom = std::isnormal(prod) ? std::sqrt(prod) : std::sqrt(n1) * std::sqrt(n2);
  return std::clamp(dot / denom, -1.0, 1.0);
}

double angle(double sim) { return std::acos(std::clamp(sim, -1.0, 1.0)); }

double gompertz_weight(double theta, double mu) {
  return -std::expm1(-std::exp(-mu * (theta - 1.0)));
}

ParamVector blend_models(const ParamVector& w_source, const ParamVector& w_target, double alpha) {
  if (w_source.size() != w_target.size()) {
    throw DimensionError("blend_models: lengths " + std::to_string(w_source.size()) + " and " +
                         std::to_string(w_target.size()) + " differ");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw DimensionError("blend_models: alpha outside [0, 1]");
  ParamVector out(w_source.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double s = w_source[i];
    const double t = w_target[i];
    // Exact at both endpoints and for s == t; never leaves [min(s,t), max(s,t)].
    out[i] = alpha == 1.0 ? s : t + alpha * (s - t);
  }
  return out;
}

ParamVector average_models(std::span<const ParamVector> models) {
  if (models.empty()) throw DimensionError("average_models: empty model list");
  const auto n = models.front().size();
  for (const auto& m : models) {
    if (m.size() != n) throw DimensionError("average_models: models have different lengths");
  }
  ParamVector out(n);
  const double inv = 1.0 / static_cast<double>(models.size());
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (const auto& m : models) acc += m[i];
    out[i] = acc * inv;
  }
  return out;
}

TargetAggregation target_aggregate(const ModelSpec& spec, const ParamVector& w_source,
                                   const ParamVector& w_target, const LabeledDataset& target_data,
                                   double mu, std::size_t batch_size, std::uint64_t seed) {
  if (w_source.size() != w_target.size()) {
    throw DimensionError("target_aggregate: source and target models differ in length");
  }
  const auto g_source = mean_gradient_field(spec, w_source, target_data, batch_size, seed);
  const auto g_target = mean_gradient_field(spec, w_target, target_data, batch_size, seed);

  auto norm = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
  };
  SimilarityReport report;
  report.mu = mu;
  report.degenerate = norm(g_source.values) <= kDegenerateNorm || norm(g_target.values) <= kDegenerateNorm;
  report.cosine = cosine_similarity(g_target.values, g_source.values);
  report.theta = angle(report.cosine);
  report.alpha = gompertz_weight(report.theta, mu);
  return {blend_models(w_source, w_target, report.alpha), report};
}

}  // namespace feddaf
