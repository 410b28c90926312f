#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "brainalign/datamodel.hpp"

namespace brainalign {

/// raw_r / ceiling; values above 1 are legitimate with a noisy ceiling.
double normalize_score(double raw_r, double ceiling);

/// Unweighted mean of normalized benchmark scores for one (model, checkpoint).
double aggregate_benchmarks(std::span<const AlignmentScore> scores);
double aggregate_benchmarks(std::span<const double> normalized);

/// (acc - chance) / (1 - chance): 0 at chance, 1 at perfect accuracy.
double normalize_accuracy(double accuracy, double chance);

enum class StatisticName { wilcoxon_W, pearson_r };
std::string_view to_string(StatisticName s) noexcept;

/// Two-sided test outcome.
struct TestResult {
  StatisticName statistic_name = StatisticName::pearson_r;
  double statistic = 0.0;
  double p_value = 1.0;
  int n = 0;
};

struct TrajectoryOptions {
  int k = 10;
  std::uint64_t seed = 0;
  double lambda = 1e-6;
  bool intercept = true;
  /// Contiguous checkpoint blocks by default; shuffled assignment when set.
  bool shuffle = false;
};

struct TrajectoryFit {
  std::string predictor_series;
  std::string target_series;
  std::vector<double> per_fold_r2;
  std::vector<int> scored_folds;
  std::vector<int> skipped_folds;  // constant target within the test block
  double mean_r2 = 0.0;
  double weight = 0.0;  // slope in predictor units, fitted on all checkpoints
  double intercept = 0.0;
};

/// Cross-validated one-slope ridge regression of target on predictor across
/// checkpoints. The predictor is z-scored with training-block statistics so
/// the penalty does not depend on its units. Out-of-sample R^2 is reported
/// unclamped and may be negative.
TrajectoryFit trajectory_r2(std::span<const double> predictor, std::span<const double> target,
                            const TrajectoryOptions& opts = {});

/// Same, after inner-joining the two series on checkpoint tokens.
TrajectoryFit trajectory_r2(const std::vector<SeriesPoint>& predictor, const std::vector<SeriesPoint>& target,
                            std::string predictor_name, std::string target_name, const TrajectoryOptions& opts = {});

/// Wilcoxon signed-rank test on paired samples. W = min(W+, W-) with average
/// ranks for tied |differences|; zero differences are dropped. Exact
/// two-sided p for n <= 25, normal approximation with continuity and tie
/// correction above.
TestResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b);

/// Checkpoint window lo < tokens <= hi.
struct TokenWindow {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;
};

/// Pearson r with a two-sided t-test (n - 2 df) over checkpoints in the window.
TestResult windowed_correlation(const std::vector<SeriesPoint>& x, const std::vector<SeriesPoint>& y,
                                TokenWindow window);

/// Two-sided p-value of a Pearson correlation over n points.
double pearson_p_value(double r, int n);

struct ControlReport {
  double pretrained = 0.0;
  double random_mean = 0.0;
  double untrained = 0.0;
  bool pretrained_above_random = false;
  bool untrained_above_random = false;
  std::optional<double> untrained_ratio;  // untrained / pretrained
  std::vector<std::string> warnings;
};

ControlReport control_comparison(double pretrained_score, std::span<const double> random_token_scores,
                                 double untrained_score);

}  // namespace brainalign
