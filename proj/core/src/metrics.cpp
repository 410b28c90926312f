#include "brainalign/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "brainalign/errors.hpp"

namespace brainalign {
namespace {

// Sum of squared deviations, or 0 when the spread is below rounding noise.
double centered_ss(std::span<const double> x, double mean) {
  double ss = 0.0, scale = 0.0;
  for (const double v : x) {
    ss += (v - mean) * (v - mean);
    scale = std::max(scale, std::abs(v));
  }
  const double sd = std::sqrt(ss / static_cast<double>(x.size()));
  return sd <= 1e-13 * scale ? 0.0 : ss;
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw ValidationError("pearson: length mismatch " + std::to_string(x.size()) + " vs " + std::to_string(y.size()));
  if (x.size() < 3) throw ValidationError("pearson: need at least 3 observations");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  const double sxx = centered_ss(x, mx);
  const double syy = centered_ss(y, my);
  if (sxx == 0.0 || syy == 0.0) throw DegenerateInput("pearson: zero-variance input");
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sxy += (x[i] - mx) * (y[i] - my);
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double pearson(const Vector& x, const Vector& y) {
  return pearson(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
                 std::span<const double>(y.data(), static_cast<std::size_t>(y.size())));
}

std::vector<double> fractional_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("spearman: length mismatch");
  const auto rx = fractional_ranks(x);
  const auto ry = fractional_ranks(y);
  return pearson(rx, ry);
}

double cka(const Matrix& x, const Matrix& y) {
  if (x.rows() != y.rows()) throw ValidationError("cka: row count mismatch");
  if (x.rows() < 3) throw ValidationError("cka: need at least 3 stimuli");
  if (!x.allFinite() || !y.allFinite()) throw ValidationError("cka: non-finite input");
  const Matrix xc = x.rowwise() - x.colwise().mean();
  const Matrix yc = y.rowwise() - y.colwise().mean();
  if (xc.squaredNorm() == 0.0 || yc.squaredNorm() == 0.0) throw DegenerateInput("cka: zero matrix after centering");

  // HSIC with a linear kernel reduces to Frobenius norms of cross-products;
  // pick the cheaper of feature space and stimulus (Gram) space.
  double hsic_xy = 0.0, hsic_xx = 0.0, hsic_yy = 0.0;
  if (x.cols() + y.cols() <= 2 * x.rows()) {
    hsic_xy = (yc.transpose() * xc).squaredNorm();
    hsic_xx = (xc.transpose() * xc).squaredNorm();
    hsic_yy = (yc.transpose() * yc).squaredNorm();
  } else {
    const Matrix k = xc * xc.transpose();
    const Matrix l = yc * yc.transpose();
    hsic_xy = k.cwiseProduct(l).sum();
    hsic_xx = k.squaredNorm();
    hsic_yy = l.squaredNorm();
  }
  return std::clamp(hsic_xy / std::sqrt(hsic_xx * hsic_yy), 0.0, 1.0);
}

std::vector<double> RDM::upper_triangle() const {
  std::vector<double> out;
  const Index m = matrix.rows();
  out.reserve(static_cast<std::size_t>(m * (m - 1) / 2));
  for (Index i = 0; i < m; ++i)
    for (Index j = i + 1; j < m; ++j) out.push_back(matrix(i, j));
  return out;
}

RDM rdm_compute(const Matrix& responses, std::vector<std::string> stimulus_ids) {
  const Index n = responses.rows();
  if (n < 3) throw ValidationError("rdm_compute: need at least 3 stimuli");
  if (static_cast<Index>(stimulus_ids.size()) != n) throw ShapeError("rdm_compute: stimulus_ids length mismatch");
  if (responses.cols() < 2) throw ValidationError("rdm_compute: correlation distance needs at least 2 response dimensions");

  // Row-wise z-scoring turns every pairwise correlation into a dot product.
  Matrix z = responses;
  std::vector<std::string> constant_rows;
  const double d = static_cast<double>(responses.cols());
  for (Index i = 0; i < n; ++i) {
    const double mean = z.row(i).mean();
    z.row(i).array() -= mean;
    const double scale = responses.row(i).cwiseAbs().maxCoeff();
    const double sd = std::sqrt(z.row(i).squaredNorm() / d);
    if (sd <= 1e-13 * scale || sd == 0.0) {
      constant_rows.push_back(stimulus_ids[static_cast<std::size_t>(i)]);
      continue;
    }
    z.row(i) /= z.row(i).norm();
  }
  if (!constant_rows.empty()) {
    std::string names;
    for (const auto& id : constant_rows) names += (names.empty() ? "" : ", ") + id;
    throw DegenerateInput("rdm_compute: constant response pattern for stimulus " + names);
  }

  RDM rdm;
  rdm.stimulus_ids = std::move(stimulus_ids);
  rdm.matrix = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const double r = std::clamp(z.row(i).dot(z.row(j)), -1.0, 1.0);
      rdm.matrix(i, j) = rdm.matrix(j, i) = 1.0 - r;
    }
  }
  return rdm;
}

double rsa_score(const RDM& model_rdm, const RDM& brain_rdm) {
  if (model_rdm.stimulus_ids != brain_rdm.stimulus_ids)
    throw ValidationError("rsa_score: RDMs cover different stimuli or orders");
  const auto a = model_rdm.upper_triangle();
  const auto b = brain_rdm.upper_triangle();
  return spearman(a, b);
}

}  // namespace brainalign
