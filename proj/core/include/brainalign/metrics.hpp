#pragma once

#include <span>
#include <string>
#include <vector>

#include "brainalign/types.hpp"

namespace brainalign {

/// Pearson correlation. Throws DegenerateInput when either input has
/// (numerically) zero variance, ValidationError on length mismatch or n < 3.
double pearson(std::span<const double> x, std::span<const double> y);
double pearson(const Vector& x, const Vector& y);

/// Fractional ranks (1-based); tied values share their average rank.
std::vector<double> fractional_ranks(std::span<const double> x);

/// Pearson correlation of fractional ranks.
double spearman(std::span<const double> x, std::span<const double> y);

/// Linear-kernel CKA on column-centered inputs (non-debiased HSIC form).
double cka(const Matrix& x, const Matrix& y);

/// Representational dissimilarity matrix using correlation distance.
struct RDM {
  Matrix matrix;
  std::vector<std::string> stimulus_ids;

  std::vector<double> upper_triangle() const;
};

/// Rows of `responses` are stimuli. Throws DegenerateInput naming any
/// stimulus whose response pattern is constant.
RDM rdm_compute(const Matrix& responses, std::vector<std::string> stimulus_ids);

/// Spearman correlation between the strict upper triangles of two RDMs.
double rsa_score(const RDM& model_rdm, const RDM& brain_rdm);

}  // namespace brainalign
