#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "feddaf/dataset.hpp"
#include "feddaf/model.hpp"

namespace feddaf {

/// Gradient norms at or below this make the cosine undefined.
inline constexpr double kDegenerateNorm = 1e-12;

/// Outcome of comparing two models through their mean gradient fields.
struct SimilarityReport {
  double cosine = 0.0;
  double theta = 0.0;  ///< radians, [0, pi]
  double alpha = 0.0;  ///< weight given to the global source model
  double mu = 0.0;
  /// Either mean gradient had norm <= kDegenerateNorm; cosine was set to 0.
  bool degenerate = false;

  friend bool operator==(const SimilarityReport&, const SimilarityReport&) = default;
};

/// Cosine of the angle between g1 and g2, clamped into [-1, 1]. Returns 0
/// when either norm is <= kDegenerateNorm.
double cosine_similarity(std::span<const double> g1, std::span<const double> g2);

/// Principal arccosine; the input is clamped into [-1, 1] first.
double angle(double sim);

/// Gompertz normalisation 1 - exp(-exp(-mu * (theta - 1))), evaluated as
/// -expm1(-exp(...)) to keep the small-weight tail accurate.
double gompertz_weight(double theta, double mu);

/// alpha * w_source + (1 - alpha) * w_target.
ParamVector blend_models(const ParamVector& w_source, const ParamVector& w_target, double alpha);

/// Unweighted elementwise mean.
ParamVector average_models(std::span<const ParamVector> models);

struct TargetAggregation {
  ParamVector adapted;
  SimilarityReport report;
};

/// Mean gradient fields of both models on the same target batches, then
/// cosine -> angle -> Gompertz weight -> blend.
TargetAggregation target_aggregate(const ModelSpec& spec, const ParamVector& w_source,
                                   const ParamVector& w_target, const LabeledDataset& target_data,
                                   double mu, std::size_t batch_size, std::uint64_t seed);

}  // namespace feddaf
