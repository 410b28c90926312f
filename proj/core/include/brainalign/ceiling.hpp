#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "brainalign/datamodel.hpp"
#include "brainalign/predictivity.hpp"
#include "brainalign/ridge.hpp"

namespace brainalign {

enum class CeilingMethod { extrapolated, fixed, theoretical };

std::string_view to_string(CeilingMethod m) noexcept;
CeilingMethod parse_ceiling_method(std::string_view s);

struct PoolPoint {
  int pool_size = 0;
  double mean_r = 0.0;

  friend bool operator==(const PoolPoint&, const PoolPoint&) = default;
};

inline constexpr int kDefaultCeilingDraws = 10;

/// Cross-subject consistency used as the normalization denominator.
/// tau is only set for the extrapolated method.
struct CeilingEstimate {
  std::string benchmark_id;
  std::vector<PoolPoint> pool_curve;
  double v_inf = 0.0;
  std::optional<double> tau;
  CeilingMethod method = CeilingMethod::extrapolated;
  std::uint64_t seed = 0;
  int draws = 0;

  double value() const noexcept { return v_inf; }
  std::string to_json() const;
  static CeilingEstimate from_json(std::string_view text);

  friend bool operator==(const CeilingEstimate&, const CeilingEstimate&) = default;
};

/// Mean over held-out subjects of the score for predicting that subject from
/// the column-wise concatenation of the other subjects in `pool`.
double subject_consistency(const NeuralDataset& neural, const FoldSpec& stimulus_folds, const RidgeConfig& cfg,
                           std::span<const std::string> pool, const PredictivityOptions& opts = {});

struct SaturationFit {
  double v_inf = 0.0;
  double tau = 0.0;
  double sse = 0.0;
};

/// Least-squares fit of v(s) = v_inf * s / (s + tau) with v_inf in [0, 1.5]
/// and tau in [0.1, 50]: log-grid search over tau (v_inf has a closed form
/// for fixed tau), then golden-section refinement. Throws FitError on
/// non-finite points, a non-positive asymptote, or an asymptote more than
/// 0.05 below the largest observed value.
SaturationFit fit_saturation_curve(std::span<const PoolPoint> curve);

/// Consistency for one subject pool (subject ids in dataset order).
using PoolScorer = std::function<double(const std::vector<std::string>& pool)>;

/// Averages `draws` random pools for every size 2..S, then fits the
/// saturation curve. With fewer than 3 subjects the full-pool value is
/// returned with method=fixed.
CeilingEstimate extrapolate_ceiling(std::string benchmark_id, const std::vector<std::string>& subject_ids,
                                    const PoolScorer& scorer, int draws, std::uint64_t seed, int jobs = 1);

CeilingEstimate extrapolate_ceiling(const NeuralDataset& neural, const FoldSpec& stimulus_folds,
                                    const RidgeConfig& cfg, int draws, std::uint64_t seed, int jobs = 1);

/// Full-pool consistency without extrapolation.
CeilingEstimate fixed_ceiling(const NeuralDataset& neural, const FoldSpec& stimulus_folds, const RidgeConfig& cfg,
                              std::uint64_t seed, int jobs = 1);

/// Externally supplied ceiling (e.g. a published theoretical estimate).
CeilingEstimate theoretical_ceiling(std::string benchmark_id, double value);

}  // namespace brainalign
