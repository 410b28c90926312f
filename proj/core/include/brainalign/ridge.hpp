#pragma once

#include <cstddef>
#include <vector>

#include "brainalign/types.hpp"

namespace brainalign {

/// How per-unit Pearson scores are reduced across folds.
enum class AverageOrder {
  units_then_folds,  // mean over units within each fold, then over folds
  folds_then_units,  // mean over folds per unit, then over units
};

struct RidgeConfig {
  std::vector<double> lambda_grid = default_lambda_grid();
  int inner_folds = 5;
  bool standardize = true;
  bool per_unit_lambda = false;
  AverageOrder average = AverageOrder::units_then_folds;
  std::size_t min_train = 10;

  /// 1e-4 ... 1e4, one value per decade.
  static std::vector<double> default_lambda_grid();
  void validate() const;
};

struct RidgeModel {
  Matrix weights;    // p x q
  Vector intercept;  // q

  Matrix predict(const Matrix& x) const;
};

/// Solves (X'X + lambda I) W = X'Y. With `center`, X and Y are centered first
/// and the intercept restores the target means; otherwise the intercept is 0.
RidgeModel ridge_fit(const Matrix& x, const Matrix& y, double lambda, bool center = true);

/// Thin SVD of a centered design, reused to evaluate many penalties cheaply.
class RidgePath {
 public:
  explicit RidgePath(const Matrix& x_centered);

  /// Weights for centered targets at the given penalty.
  Matrix weights(const Matrix& y_centered, double lambda) const;

  /// Predictions for (centered) rows `x_eval` for every penalty in `lambdas`.
  /// Returns one prediction matrix per penalty, before adding target means.
  std::vector<Matrix> predictions(const Matrix& x_eval, const Matrix& y_centered,
                                  const std::vector<double>& lambdas) const;

 private:
  Matrix u_;
  Vector s_;
  Matrix v_;
};

}  // namespace brainalign
