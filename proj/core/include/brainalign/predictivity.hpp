#pragma once

#include <map>
#include <string>
#include <vector>

#include "brainalign/datamodel.hpp"
#include "brainalign/ridge.hpp"

namespace brainalign {

/// Row indices used for one fit. inner_fold is -1 for the outer fit.
struct FoldAuditEntry {
  int outer_fold = 0;
  int inner_fold = -1;
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
};

struct FoldAudit {
  std::vector<FoldAuditEntry> entries;
};

struct PredictivityOptions {
  /// Group labels keyed by stimulus id; inner folds are grouped when present.
  const std::map<std::string, std::string>* groups = nullptr;
  FoldAudit* audit = nullptr;
  int jobs = 1;
};

struct PredictivityResult {
  std::vector<double> per_fold_r;     // folds that produced a score, in fold order
  std::vector<int> scored_folds;      // fold index of each per_fold_r entry
  std::vector<int> degenerate_folds;  // folds where every unit was degenerate
  std::vector<double> fold_lambda;    // selected penalty per scored fold (shared-lambda mode)
  std::size_t degenerate_units = 0;   // (fold, unit) pairs excluded
  double mean_r = 0.0;
};

/// Cross-validated ridge encoding score. For every outer fold: standardize
/// with training statistics, choose lambda by inner cross-validation (mean
/// Pearson across units), refit on the whole training split, and correlate
/// predictions with held-out responses unit by unit.
///
/// `features` and `targets` rows follow `stimulus_ids`; `folds.elements` must
/// cover the same ids. Throws ScoreUndefined if every fold is degenerate.
PredictivityResult linear_predictivity(const Matrix& features, const Matrix& targets,
                                       const std::vector<std::string>& stimulus_ids, const FoldSpec& folds,
                                       const RidgeConfig& cfg, const PredictivityOptions& opts = {});

PredictivityResult linear_predictivity(const ActivationSet& acts, const Matrix& targets, const FoldSpec& folds,
                                       const RidgeConfig& cfg, const PredictivityOptions& opts = {});

}  // namespace brainalign
