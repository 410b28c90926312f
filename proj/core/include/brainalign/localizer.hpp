#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "brainalign/datamodel.hpp"

namespace brainalign {

inline constexpr int kDefaultLocalizedUnits = 128;

struct UnitRef {
  std::string layer_tag;
  Index unit_index = 0;
  double t = 0.0;

  friend bool operator==(const UnitRef&, const UnitRef&) = default;
};

struct LayerContrast {
  std::string layer_tag;
  Matrix sentences;  // n_sentences x units
  Matrix nonwords;   // n_nonwords x units
};

struct LayerT {
  std::string layer_tag;
  Vector t;
};

struct LocalizerResult {
  std::string model_id;
  std::uint64_t checkpoint_tokens = 0;
  std::vector<LayerT> t_values;        // candidate layers in input order
  std::vector<UnitRef> selected_units;  // descending t; ties by (layer order, column)
  int k = 0;
  std::string stimuli_digest;

  std::string to_json() const;
  static LocalizerResult from_json(std::string_view text);
};

/// Welch t statistic per column (sentences minus nonwords). Columns with zero
/// variance in both conditions get +inf, -inf or 0 by the sign of the mean
/// difference.
Vector t_contrast(const Matrix& sentences, const Matrix& nonwords);

/// Top-k units across all layers. With `per_layer`, k is split evenly over
/// layers (remainder to the earliest) before pooling.
LocalizerResult select_units(const std::vector<LayerContrast>& layers, int k, bool per_layer = false);

/// Columns of the stacked layers named by the selection, in selection order.
ActivationSet apply_selection(const std::vector<ActivationSet>& stack, const LocalizerResult& selection);

}  // namespace brainalign
