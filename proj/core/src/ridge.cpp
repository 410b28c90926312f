#include "brainalign/ridge.hpp"

#include <algorithm>
#include <cmath>

#include "brainalign/errors.hpp"

namespace brainalign {

std::vector<double> RidgeConfig::default_lambda_grid() {
  return {1e-4, 1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3, 1e4};
}

void RidgeConfig::validate() const {
  if (lambda_grid.empty()) throw ValidationError("ridge: lambda_grid is empty");
  for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
    if (!std::isfinite(lambda_grid[i]) || lambda_grid[i] <= 0.0)
      throw ValidationError("ridge: lambda values must be finite and > 0");
    if (i > 0 && lambda_grid[i] <= lambda_grid[i - 1])
      throw ValidationError("ridge: lambda_grid must be strictly ascending");
  }
  if (inner_folds < 2) throw ValidationError("ridge: inner_folds must be >= 2");
}

Matrix RidgeModel::predict(const Matrix& x) const {
  Matrix out = x * weights;
  out.rowwise() += intercept.transpose();
  return out;
}

RidgePath::RidgePath(const Matrix& x_centered) {
  Eigen::BDCSVD<Matrix> svd(x_centered, Eigen::ComputeThinU | Eigen::ComputeThinV);
  u_ = svd.matrixU();
  s_ = svd.singularValues();
  v_ = svd.matrixV();
}

Matrix RidgePath::weights(const Matrix& y_centered, double lambda) const {
  const Vector shrink = s_.array() / (s_.array().square() + lambda);
  return v_ * shrink.asDiagonal() * (u_.transpose() * y_centered);
}

std::vector<Matrix> RidgePath::predictions(const Matrix& x_eval, const Matrix& y_centered,
                                           const std::vector<double>& lambdas) const {
  const Matrix xv = x_eval * v_;
  const Matrix uty = u_.transpose() * y_centered;
  std::vector<Matrix> out;
  out.reserve(lambdas.size());
  for (const double lambda : lambdas) {
    const Vector shrink = s_.array() / (s_.array().square() + lambda);
    out.push_back(xv * shrink.asDiagonal() * uty);
  }
  return out;
}

RidgeModel ridge_fit(const Matrix& x, const Matrix& y, double lambda, bool center) {
  if (x.rows() != y.rows()) throw ShapeError("ridge_fit: X and Y row counts differ");
  if (x.rows() < 2) throw ValidationError("ridge_fit: need at least 2 rows");
  if (!x.allFinite() || !y.allFinite()) throw ValidationError("ridge_fit: non-finite input");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ValidationError("ridge_fit: lambda must be finite and > 0");

  RidgeModel model;
  if (center) {
    const Eigen::RowVectorXd x_mean = x.colwise().mean();
    const Eigen::RowVectorXd y_mean = y.colwise().mean();
    const Matrix xc = x.rowwise() - x_mean;
    const Matrix yc = y.rowwise() - y_mean;
    model.weights = RidgePath(xc).weights(yc, lambda);
    model.intercept = (y_mean - x_mean * model.weights).transpose();
  } else {
    model.weights = RidgePath(x).weights(y, lambda);
    model.intercept = Vector::Zero(y.cols());
  }
  return model;
}

}  // namespace brainalign
