#include "brainalign/predictivity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <unordered_map>

#include "brainalign/errors.hpp"
#include "brainalign/metrics.hpp"
#include "brainalign/parallel.hpp"
#include "brainalign/random.hpp"
#include "brainalign/splits.hpp"

namespace brainalign {
namespace {

using RowVector = Eigen::RowVectorXd;

struct Standardizer {
  RowVector mean;
  RowVector scale;

  Matrix apply(const Matrix& m) const { return (m.rowwise() - mean).array().rowwise() / scale.array(); }
};

// Training-split statistics; zero-variance columns keep unit scale.
Standardizer fit_standardizer(const Matrix& m, bool scale) {
  Standardizer s;
  s.mean = m.colwise().mean();
  s.scale = RowVector::Ones(m.cols());
  if (scale && m.rows() > 1) {
    for (Index c = 0; c < m.cols(); ++c) {
      const double sd = std::sqrt((m.col(c).array() - s.mean(c)).square().sum() / static_cast<double>(m.rows() - 1));
      if (sd > 1e-13 * std::max(1.0, std::abs(s.mean(c)))) s.scale(c) = sd;
    }
  }
  return s;
}

Matrix take_rows(const Matrix& m, const std::vector<std::size_t>& rows) {
  Matrix out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = m.row(static_cast<Index>(rows[i]));
  return out;
}

std::vector<std::optional<double>> unit_correlations(const Matrix& actual, const Matrix& predicted) {
  std::vector<std::optional<double>> out(static_cast<std::size_t>(actual.cols()));
  for (Index u = 0; u < actual.cols(); ++u) {
    const Vector a = actual.col(u);
    const Vector p = predicted.col(u);
    try {
      out[static_cast<std::size_t>(u)] = pearson(a, p);
    } catch (const DegenerateInput&) {
    }
  }
  return out;
}

std::optional<double> mean_valid(const std::vector<std::optional<double>>& values) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& v : values) {
    if (v) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

FoldSpec make_inner_folds(const std::vector<std::string>& train_ids, const FoldSpec& outer, int outer_fold,
                          const RidgeConfig& cfg, const std::map<std::string, std::string>* groups) {
  const std::uint64_t seed = mix_seed(outer.seed, static_cast<std::uint64_t>(outer_fold) + 1);
  if (groups != nullptr && !groups->empty() && outer.scheme == FoldScheme::grouped) {
    std::vector<std::pair<std::string, std::string>> labels;
    labels.reserve(train_ids.size());
    for (const auto& id : train_ids) labels.emplace_back(id, groups->at(id));
    std::map<std::string, std::string> as_map(labels.begin(), labels.end());
    const int k = std::min(cfg.inner_folds, static_cast<int>(count_groups(as_map)));
    if (k >= 2) return make_grouped_folds(labels, k, seed);
  }
  const int k = std::min(cfg.inner_folds, static_cast<int>(train_ids.size()));
  return make_random_folds(train_ids, k, seed);
}

struct FoldOutcome {
  std::vector<std::optional<double>> unit_r;
  std::optional<double> score;
  double lambda = 0.0;
  std::vector<FoldAuditEntry> audit;
};

FoldOutcome score_fold(const Matrix& features, const Matrix& targets, const std::vector<std::string>& row_ids,
                       const std::vector<std::size_t>& train, const std::vector<std::size_t>& test, int fold,
                       const FoldSpec& folds, const RidgeConfig& cfg, const PredictivityOptions& opts) {
  FoldOutcome out;
  if (test.size() < 3) {
    // Too few held-out stimuli for a correlation: the fold is degenerate.
    out.unit_r.assign(static_cast<std::size_t>(targets.cols()), std::nullopt);
    return out;
  }
  const Standardizer fx = fit_standardizer(take_rows(features, train), cfg.standardize);
  const Standardizer fy = fit_standardizer(take_rows(targets, train), cfg.standardize);
  const Matrix x_train = fx.apply(take_rows(features, train));
  const Matrix y_train = fy.apply(take_rows(targets, train));
  const Matrix x_test = fx.apply(take_rows(features, test));
  const Matrix y_test = take_rows(targets, test);
  const auto n_units = static_cast<std::size_t>(targets.cols());
  const auto& grid = cfg.lambda_grid;

  if (opts.audit != nullptr) out.audit.push_back({fold, -1, train, test});

  // Per-unit penalty (a single entry in shared mode).
  std::vector<double> unit_lambda(n_units, grid.back());
  double shared_lambda = grid.front();
  if (grid.size() > 1) {
    std::vector<std::string> train_ids;
    train_ids.reserve(train.size());
    for (const auto r : train) train_ids.push_back(row_ids[r]);
    const FoldSpec inner = make_inner_folds(train_ids, folds, fold, cfg, opts.groups);

    std::vector<double> shared_sum(grid.size(), 0.0);
    std::vector<int> shared_count(grid.size(), 0);
    Matrix unit_sum = Matrix::Zero(static_cast<Index>(grid.size()), static_cast<Index>(n_units));
    Matrix unit_count = Matrix::Zero(static_cast<Index>(grid.size()), static_cast<Index>(n_units));

    for (int g = 0; g < inner.k; ++g) {
      const auto itr = inner.train_indices(g);
      const auto ite = inner.test_indices(g);
      if (opts.audit != nullptr) {
        FoldAuditEntry e{fold, g, {}, {}};
        for (const auto i : itr) e.train_rows.push_back(train[i]);
        for (const auto i : ite) e.test_rows.push_back(train[i]);
        out.audit.push_back(std::move(e));
      }
      if (ite.size() < 3 || itr.size() < 2) continue;
      const Matrix xi = take_rows(x_train, itr);
      const Matrix yi = take_rows(y_train, itr);
      const RowVector xm = xi.colwise().mean();
      const RowVector ym = yi.colwise().mean();
      const RidgePath path(xi.rowwise() - xm);
      const Matrix x_eval = take_rows(x_train, ite).rowwise() - xm;
      const Matrix y_eval = take_rows(y_train, ite);
      const auto preds = path.predictions(x_eval, yi.rowwise() - ym, grid);
      for (std::size_t l = 0; l < grid.size(); ++l) {
        const auto rs = unit_correlations(y_eval, preds[l]);
        if (const auto m = mean_valid(rs)) {
          shared_sum[l] += *m;
          ++shared_count[l];
        }
        for (std::size_t u = 0; u < n_units; ++u) {
          if (rs[u]) {
            unit_sum(static_cast<Index>(l), static_cast<Index>(u)) += *rs[u];
            unit_count(static_cast<Index>(l), static_cast<Index>(u)) += 1.0;
          }
        }
      }
    }

    // Strict '>' keeps the smallest penalty among exact ties.
    std::optional<double> best;
    shared_lambda = grid.back();
    for (std::size_t l = 0; l < grid.size(); ++l) {
      if (shared_count[l] == 0) continue;
      const double score = shared_sum[l] / shared_count[l];
      if (!best || score > *best) {
        best = score;
        shared_lambda = grid[l];
      }
    }
    for (std::size_t u = 0; u < n_units; ++u) {
      std::optional<double> unit_best;
      for (std::size_t l = 0; l < grid.size(); ++l) {
        const double c = unit_count(static_cast<Index>(l), static_cast<Index>(u));
        if (c == 0.0) continue;
        const double score = unit_sum(static_cast<Index>(l), static_cast<Index>(u)) / c;
        if (!unit_best || score > *unit_best) {
          unit_best = score;
          unit_lambda[u] = grid[l];
        }
      }
    }
  }

  const RidgePath path(x_train);  // x_train is centered by construction
  Matrix predicted(static_cast<Index>(test.size()), static_cast<Index>(n_units));
  if (cfg.per_unit_lambda && grid.size() > 1) {
    for (const double lambda : grid) {
      std::vector<Index> cols;
      for (std::size_t u = 0; u < n_units; ++u)
        if (unit_lambda[u] == lambda) cols.push_back(static_cast<Index>(u));
      if (cols.empty()) continue;
      Matrix y_sub(y_train.rows(), static_cast<Index>(cols.size()));
      for (std::size_t i = 0; i < cols.size(); ++i) y_sub.col(static_cast<Index>(i)) = y_train.col(cols[i]);
      const Matrix p = x_test * path.weights(y_sub, lambda);
      for (std::size_t i = 0; i < cols.size(); ++i) predicted.col(cols[i]) = p.col(static_cast<Index>(i));
    }
    out.lambda = std::numeric_limits<double>::quiet_NaN();
  } else {
    predicted = x_test * path.weights(y_train, shared_lambda);
    out.lambda = shared_lambda;
  }
  out.unit_r = unit_correlations(y_test, predicted);
  out.score = mean_valid(out.unit_r);
  return out;
}

}  // namespace

PredictivityResult linear_predictivity(const Matrix& features, const Matrix& targets,
                                       const std::vector<std::string>& stimulus_ids, const FoldSpec& folds,
                                       const RidgeConfig& cfg, const PredictivityOptions& opts) {
  cfg.validate();
  folds.validate();
  const auto n = static_cast<Index>(stimulus_ids.size());
  if (features.rows() != n || targets.rows() != n)
    throw ShapeError("linear_predictivity: features/targets rows must match stimulus_ids");
  if (features.cols() < 1 || targets.cols() < 1) throw ShapeError("linear_predictivity: empty feature or unit set");
  if (!features.allFinite() || !targets.allFinite()) throw ValidationError("linear_predictivity: non-finite input");
  if (folds.elements.size() != stimulus_ids.size())
    throw ValidationError("linear_predictivity: fold spec covers a different stimulus set");

  std::unordered_map<std::string_view, std::size_t> row_of;
  for (std::size_t i = 0; i < stimulus_ids.size(); ++i) row_of.emplace(stimulus_ids[i], i);
  std::vector<int> fold_of_row(stimulus_ids.size(), -1);
  for (std::size_t i = 0; i < folds.elements.size(); ++i) {
    const auto it = row_of.find(folds.elements[i]);
    if (it == row_of.end())
      throw ValidationError("linear_predictivity: fold element '" + folds.elements[i] + "' is not a stimulus");
    fold_of_row[it->second] = folds.fold_of[i];
  }

  std::vector<std::vector<std::size_t>> train(static_cast<std::size_t>(folds.k)), test(static_cast<std::size_t>(folds.k));
  for (std::size_t r = 0; r < fold_of_row.size(); ++r) {
    for (int f = 0; f < folds.k; ++f) (fold_of_row[r] == f ? test : train)[static_cast<std::size_t>(f)].push_back(r);
  }
  for (int f = 0; f < folds.k; ++f) {
    const auto& tr = train[static_cast<std::size_t>(f)];
    if (tr.size() < std::max<std::size_t>(cfg.min_train, 2)) {
      throw ValidationError("linear_predictivity: fold " + std::to_string(f) + " trains on " +
                            std::to_string(tr.size()) + " stimuli, need at least " + std::to_string(cfg.min_train));
    }
  }

  std::vector<FoldOutcome> outcomes(static_cast<std::size_t>(folds.k));
  parallel_for(outcomes.size(), opts.jobs, [&](std::size_t f) {
    outcomes[f] = score_fold(features, targets, stimulus_ids, train[f], test[f], static_cast<int>(f), folds, cfg, opts);
  });

  PredictivityResult result;
  for (std::size_t f = 0; f < outcomes.size(); ++f) {
    const auto& o = outcomes[f];
    result.degenerate_units += static_cast<std::size_t>(std::count(o.unit_r.begin(), o.unit_r.end(), std::nullopt));
    if (opts.audit != nullptr) opts.audit->entries.insert(opts.audit->entries.end(), o.audit.begin(), o.audit.end());
    if (!o.score) {
      result.degenerate_folds.push_back(static_cast<int>(f));
      continue;
    }
    result.per_fold_r.push_back(*o.score);
    result.scored_folds.push_back(static_cast<int>(f));
    result.fold_lambda.push_back(o.lambda);
  }
  if (result.per_fold_r.empty()) throw ScoreUndefined("linear_predictivity: every fold was degenerate");

  if (cfg.average == AverageOrder::units_then_folds) {
    result.mean_r = std::accumulate(result.per_fold_r.begin(), result.per_fold_r.end(), 0.0) /
                    static_cast<double>(result.per_fold_r.size());
  } else {
    double total = 0.0;
    std::size_t units = 0;
    for (Index u = 0; u < targets.cols(); ++u) {
      double sum = 0.0;
      std::size_t count = 0;
      for (const auto& o : outcomes) {
        if (const auto& r = o.unit_r[static_cast<std::size_t>(u)]) {
          sum += *r;
          ++count;
        }
      }
      if (count > 0) {
        total += sum / static_cast<double>(count);
        ++units;
      }
    }
    result.mean_r = total / static_cast<double>(units);
  }
  return result;
}

PredictivityResult linear_predictivity(const ActivationSet& acts, const Matrix& targets, const FoldSpec& folds,
                                       const RidgeConfig& cfg, const PredictivityOptions& opts) {
  acts.validate();
  return linear_predictivity(acts.matrix, targets, acts.stimulus_ids, folds, cfg, opts);
}

}  // namespace brainalign
