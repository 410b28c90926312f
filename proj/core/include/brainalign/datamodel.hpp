#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "brainalign/types.hpp"

namespace brainalign {

enum class Presentation { reading, listening };
enum class Modality { fmri, ecog, behavior };

std::string_view to_string(Presentation p) noexcept;
std::string_view to_string(Modality m) noexcept;
Presentation parse_presentation(std::string_view s);
Modality parse_modality(std::string_view s);

struct Stimulus {
  std::string stimulus_id;
  std::string text;
  std::string group;
  int position = 0;

  friend bool operator==(const Stimulus&, const Stimulus&) = default;
};

/// Ordered stimuli in presentation order, each tagged with its topic/story group.
struct StimulusSet {
  std::vector<Stimulus> stimuli;
  Presentation presentation = Presentation::reading;
  std::string description;

  std::vector<std::string> ids() const;
  std::map<std::string, std::string> groups() const;
  /// Throws ValidationError on empty/duplicate ids or empty group labels.
  void validate() const;

  friend bool operator==(const StimulusSet&, const StimulusSet&) = default;
};

/// Stimuli x features activations from one layer of one checkpoint.
struct ActivationSet {
  Matrix matrix;
  std::vector<std::string> stimulus_ids;
  std::string model_id;
  std::uint64_t checkpoint_tokens = 0;
  std::string layer_tag;
  std::optional<std::int64_t> seed;

  void validate() const;
};

struct SubjectResponses {
  std::string subject_id;
  Matrix matrix;  // stimuli x units
  std::size_t dropped_units = 0;

  friend bool operator==(const SubjectResponses& a, const SubjectResponses& b) {
    return a.subject_id == b.subject_id && a.dropped_units == b.dropped_units &&
           a.matrix.rows() == b.matrix.rows() && a.matrix.cols() == b.matrix.cols() &&
           a.matrix == b.matrix;
  }
};

struct NeuralDataset {
  std::string benchmark_id;
  std::vector<SubjectResponses> subjects;
  std::vector<std::string> stimulus_ids;
  std::map<std::string, std::string> groups;
  Modality modality = Modality::fmri;
  std::vector<std::string> units_meta;

  const SubjectResponses& subject(std::string_view id) const;
  std::vector<std::string> subject_ids() const;
  void validate() const;

  friend bool operator==(const NeuralDataset&, const NeuralDataset&) = default;
};

struct AlignmentScore {
  std::string benchmark_id;
  std::string model_id;
  std::uint64_t checkpoint_tokens = 0;
  double raw_r = 0.0;
  double ceiling = 1.0;
  double normalized = 0.0;
  int n_folds = 0;
  std::vector<double> per_fold_r;

  /// Builds a score whose raw_r is the mean of the fold scores.
  static AlignmentScore from_folds(std::string benchmark_id, std::string model_id,
                                   std::uint64_t checkpoint_tokens, std::vector<double> per_fold_r,
                                   double ceiling);
};

enum class FoldScheme { random, grouped, subject_holdout };

std::string_view to_string(FoldScheme s) noexcept;
FoldScheme parse_fold_scheme(std::string_view s);

/// A partition of `elements` into k test folds.
struct FoldSpec {
  FoldScheme scheme = FoldScheme::random;
  int k = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> elements;  // element order as supplied by the caller
  std::vector<int> fold_of;           // parallel to elements

  int fold(std::string_view element) const;
  std::vector<std::size_t> test_indices(int f) const;
  std::vector<std::size_t> train_indices(int f) const;
  /// Throws ValidationError unless every element is in exactly one fold in [0, k) and no fold is empty.
  void validate() const;

  std::string to_json() const;
  static FoldSpec from_json(std::string_view text);

  friend bool operator==(const FoldSpec&, const FoldSpec&) = default;
};

namespace series {
inline constexpr std::string_view brain_alignment = "brain_alignment";
inline constexpr std::string_view formal_score = "formal_score";
inline constexpr std::string_view functional_score = "functional_score";
inline constexpr std::string_view lm_loss = "lm_loss";
inline constexpr std::string_view behavioral_r = "behavioral_r";
}  // namespace series

struct TrajectoryRow {
  std::uint64_t checkpoint_tokens = 0;
  std::string series_id;
  double value = 0.0;
};

struct SeriesPoint {
  std::uint64_t checkpoint_tokens = 0;
  double value = 0.0;
};

/// Per-checkpoint series for one model. Rows within a series are stored in
/// strictly increasing checkpoint order; add() enforces it.
class TrajectoryTable {
 public:
  void add(std::uint64_t checkpoint_tokens, std::string series_id, double value);
  const std::vector<TrajectoryRow>& rows() const noexcept { return rows_; }
  std::vector<std::string> series_ids() const;
  std::vector<SeriesPoint> series(std::string_view id) const;
  bool has(std::string_view id) const;

 private:
  std::vector<TrajectoryRow> rows_;
};

/// Inner-joins two series on checkpoint tokens, in increasing order.
std::vector<std::pair<SeriesPoint, SeriesPoint>> align_series(const std::vector<SeriesPoint>& a,
                                                              const std::vector<SeriesPoint>& b);

}  // namespace brainalign
