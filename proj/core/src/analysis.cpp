#include "brainalign/analysis.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "brainalign/errors.hpp"
#include "brainalign/metrics.hpp"
#include "brainalign/random.hpp"

namespace brainalign {

double normalize_score(double raw_r, double ceiling) {
  if (!(ceiling > 0.0) || !std::isfinite(ceiling)) throw ValidationError("normalize_score: ceiling must be positive");
  return raw_r / ceiling;
}

double aggregate_benchmarks(std::span<const double> normalized) {
  if (normalized.empty()) throw ValidationError("aggregate_benchmarks: no scores");
  return std::accumulate(normalized.begin(), normalized.end(), 0.0) / static_cast<double>(normalized.size());
}

double aggregate_benchmarks(std::span<const AlignmentScore> scores) {
  std::vector<double> values;
  values.reserve(scores.size());
  for (const auto& s : scores) values.push_back(s.normalized);
  return aggregate_benchmarks(values);
}

double normalize_accuracy(double accuracy, double chance) {
  if (!(chance < 1.0)) throw ValidationError("normalize_accuracy: chance level must be < 1");
  return (accuracy - chance) / (1.0 - chance);
}

std::string_view to_string(StatisticName s) noexcept {
  return s == StatisticName::wilcoxon_W ? "wilcoxon_W" : "pearson_r";
}

TrajectoryFit trajectory_r2(std::span<const double> predictor, std::span<const double> target,
                            const TrajectoryOptions& opts) {
  const std::size_t n = predictor.size();
  if (target.size() != n) throw ValidationError("trajectory_r2: series lengths differ");
  if (opts.k < 2 || static_cast<std::size_t>(opts.k) > n)
    throw ValidationError("trajectory_r2: need n >= k >= 2 (n=" + std::to_string(n) + ", k=" + std::to_string(opts.k) + ")");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  if (opts.shuffle) {
    Rng rng(opts.seed);
    rng.shuffle(order);
  }
  // Block b holds positions [start_b, start_b + len_b) of `order`.
  std::vector<int> fold_of(n);
  {
    const auto k = static_cast<std::size_t>(opts.k);
    std::size_t pos = 0;
    for (std::size_t b = 0; b < k; ++b) {
      const std::size_t len = n / k + (b < n % k ? 1 : 0);
      for (std::size_t t = 0; t < len; ++t) fold_of[order[pos++]] = static_cast<int>(b);
    }
  }

  // Slope/intercept for z-scored predictor: returns (w_raw, b_raw).
  auto fit = [&](const std::vector<std::size_t>& rows) {
    double mx = 0.0, my = 0.0;
    const double m = static_cast<double>(rows.size());
    for (const auto r : rows) {
      mx += predictor[r];
      my += target[r];
    }
    mx /= m;
    my /= m;
    if (!opts.intercept) {
      mx = 0.0;
      my = 0.0;
    }
    double sxx = 0.0, sxy = 0.0;
    for (const auto r : rows) {
      sxx += (predictor[r] - mx) * (predictor[r] - mx);
      sxy += (predictor[r] - mx) * (target[r] - my);
    }
    const double sd = std::sqrt(sxx / m);
    if (sd == 0.0) return std::pair{0.0, my};
    // With z = (x - mx) / sd: w_z = sum(z y) / (sum(z^2) + lambda).
    const double w_z = (sxy / sd) / (sxx / (sd * sd) + opts.lambda);
    const double w = w_z / sd;
    return std::pair{w, my - w * mx};
  };

  TrajectoryFit out;
  for (int f = 0; f < opts.k; ++f) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < n; ++i) (fold_of[i] == f ? test : train).push_back(i);
    double mean_test = 0.0;
    for (const auto i : test) mean_test += target[i];
    mean_test /= static_cast<double>(test.size());
    double ss_tot = 0.0;
    for (const auto i : test) ss_tot += (target[i] - mean_test) * (target[i] - mean_test);
    if (ss_tot <= 0.0 || train.size() < 2) {
      out.skipped_folds.push_back(f);
      continue;
    }
    const auto [w, b] = fit(train);
    double ss_res = 0.0;
    for (const auto i : test) {
      const double e = target[i] - (w * predictor[i] + b);
      ss_res += e * e;
    }
    out.per_fold_r2.push_back(1.0 - ss_res / ss_tot);
    out.scored_folds.push_back(f);
  }
  if (out.per_fold_r2.empty()) throw ScoreUndefined("trajectory_r2: every test block has a constant target");
  out.mean_r2 = std::accumulate(out.per_fold_r2.begin(), out.per_fold_r2.end(), 0.0) /
                static_cast<double>(out.per_fold_r2.size());
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  std::tie(out.weight, out.intercept) = fit(all);
  return out;
}

TrajectoryFit trajectory_r2(const std::vector<SeriesPoint>& predictor, const std::vector<SeriesPoint>& target,
                            std::string predictor_name, std::string target_name, const TrajectoryOptions& opts) {
  std::vector<double> x, y;
  for (const auto& [a, b] : align_series(predictor, target)) {
    x.push_back(a.value);
    y.push_back(b.value);
  }
  auto fit = trajectory_r2(x, y, opts);
  fit.predictor_series = std::move(predictor_name);
  fit.target_series = std::move(target_name);
  return fit;
}

TestResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ValidationError("wilcoxon_signed_rank: samples must be paired");
  std::vector<double> diffs;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    if (!std::isfinite(d)) throw ValidationError("wilcoxon_signed_rank: non-finite difference");
    if (d != 0.0) diffs.push_back(d);
  }
  if (diffs.empty()) throw TestUndefined("wilcoxon_signed_rank: all differences are zero");
  const int n = static_cast<int>(diffs.size());
  if (n < 5)
    throw ValidationError("wilcoxon_signed_rank: need at least 5 non-zero differences, got " + std::to_string(n));

  std::vector<double> magnitudes(diffs.size());
  std::transform(diffs.begin(), diffs.end(), magnitudes.begin(), [](double d) { return std::abs(d); });
  const auto ranks = fractional_ranks(magnitudes);

  // Average ranks are multiples of 1/2, so doubled ranks are integers.
  std::vector<int> doubled(ranks.size());
  long long w_plus2 = 0, total2 = 0;
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    doubled[i] = static_cast<int>(std::lround(2.0 * ranks[i]));
    total2 += doubled[i];
    if (diffs[i] > 0) w_plus2 += doubled[i];
  }
  const long long w2 = std::min(w_plus2, total2 - w_plus2);

  TestResult res;
  res.statistic_name = StatisticName::wilcoxon_W;
  res.statistic = static_cast<double>(w2) / 2.0;
  res.n = n;

  if (n <= 25) {
    // counts[s]: sign assignments whose doubled positive-rank sum equals s.
    std::vector<double> counts(static_cast<std::size_t>(total2) + 1, 0.0);
    counts[0] = 1.0;
    long long reach = 0;
    for (const int r : doubled) {
      for (long long s = reach; s >= 0; --s)
        if (counts[static_cast<std::size_t>(s)] != 0.0) counts[static_cast<std::size_t>(s + r)] += counts[static_cast<std::size_t>(s)];
      reach += r;
    }
    double extreme = 0.0;
    for (long long s = 0; s <= total2; ++s)
      if (std::min(s, total2 - s) <= w2) extreme += counts[static_cast<std::size_t>(s)];
    res.p_value = std::min(1.0, extreme / std::ldexp(1.0, n));
  } else {
    const double nn = n;
    const double mean = nn * (nn + 1.0) / 4.0;
    double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0;
    std::vector<double> sorted = magnitudes;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size();) {
      std::size_t j = i;
      while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
      const double t = static_cast<double>(j - i);
      var -= (t * t * t - t) / 48.0;
      i = j;
    }
    const double z = std::max(0.0, std::abs(res.statistic - mean) - 0.5) / std::sqrt(var);
    res.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  }
  return res;
}

double pearson_p_value(double r, int n) {
  if (n < 3) throw TestUndefined("pearson_p_value: need at least 3 points");
  if (std::abs(r) >= 1.0) return 0.0;
  const double df = n - 2;
  const double t = std::abs(r) * std::sqrt(df / (1.0 - r * r));
  const boost::math::students_t dist(df);
  return std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, t)), 0.0, 1.0);
}

TestResult windowed_correlation(const std::vector<SeriesPoint>& x, const std::vector<SeriesPoint>& y,
                                TokenWindow window) {
  std::vector<double> xs, ys;
  for (const auto& [a, b] : align_series(x, y)) {
    if (a.checkpoint_tokens > window.lo && a.checkpoint_tokens <= window.hi) {
      xs.push_back(a.value);
      ys.push_back(b.value);
    }
  }
  if (xs.size() < 3)
    throw TestUndefined("windowed_correlation: " + std::to_string(xs.size()) + " checkpoint(s) in window (" +
                        std::to_string(window.lo) + ", " + std::to_string(window.hi) + "]");
  TestResult res;
  res.statistic_name = StatisticName::pearson_r;
  res.n = static_cast<int>(xs.size());
  try {
    res.statistic = pearson(xs, ys);
  } catch (const DegenerateInput& e) {
    throw TestUndefined(std::string("windowed_correlation: ") + e.what());
  }
  res.p_value = pearson_p_value(res.statistic, res.n);
  return res;
}

ControlReport control_comparison(double pretrained_score, std::span<const double> random_token_scores,
                                 double untrained_score) {
  if (random_token_scores.empty()) throw ValidationError("control_comparison: no random-token scores");
  ControlReport rep;
  rep.pretrained = pretrained_score;
  rep.untrained = untrained_score;
  rep.random_mean = std::accumulate(random_token_scores.begin(), random_token_scores.end(), 0.0) /
                    static_cast<double>(random_token_scores.size());
  rep.pretrained_above_random = pretrained_score > rep.random_mean;
  rep.untrained_above_random = untrained_score > rep.random_mean;
  if (pretrained_score != 0.0) rep.untrained_ratio = untrained_score / pretrained_score;
  if (!rep.pretrained_above_random)
    rep.warnings.push_back("metric validity: pretrained score does not exceed the random-token control mean");
  return rep;
}

}  // namespace brainalign
