#include "brainalign/datamodel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "json.hpp"

#include "brainalign/errors.hpp"

namespace brainalign {

using nlohmann::json;

std::string_view to_string(Presentation p) noexcept {
  return p == Presentation::reading ? "reading" : "listening";
}

std::string_view to_string(Modality m) noexcept {
  switch (m) {
    case Modality::fmri: return "fmri";
    case Modality::ecog: return "ecog";
    case Modality::behavior: return "behavior";
  }
  return "fmri";
}

Presentation parse_presentation(std::string_view s) {
  if (s == "reading") return Presentation::reading;
  if (s == "listening") return Presentation::listening;
  throw ValidationError("unknown presentation '" + std::string(s) + "'");
}

Modality parse_modality(std::string_view s) {
  if (s == "fmri") return Modality::fmri;
  if (s == "ecog") return Modality::ecog;
  if (s == "behavior") return Modality::behavior;
  throw ValidationError("unknown modality '" + std::string(s) + "'");
}

std::vector<std::string> StimulusSet::ids() const {
  std::vector<std::string> out;
  out.reserve(stimuli.size());
  for (const auto& s : stimuli) out.push_back(s.stimulus_id);
  return out;
}

std::map<std::string, std::string> StimulusSet::groups() const {
  std::map<std::string, std::string> out;
  for (const auto& s : stimuli) out.emplace(s.stimulus_id, s.group);
  return out;
}

void StimulusSet::validate() const {
  std::set<std::string_view> seen;
  for (const auto& s : stimuli) {
    if (s.stimulus_id.empty()) throw ValidationError("empty stimulus_id");
    if (!seen.insert(s.stimulus_id).second) throw ValidationError("duplicate stimulus_id '" + s.stimulus_id + "'");
    if (s.group.empty()) throw ValidationError("stimulus '" + s.stimulus_id + "' has an empty group label");
  }
}

void ActivationSet::validate() const {
  if (matrix.rows() != static_cast<Index>(stimulus_ids.size())) {
    throw ShapeError("activation rows (" + std::to_string(matrix.rows()) + ") != stimulus count (" +
                     std::to_string(stimulus_ids.size()) + ") for layer '" + layer_tag + "'");
  }
  if (matrix.cols() < 1) throw ShapeError("activation set '" + layer_tag + "' has no feature columns");
  if (!matrix.allFinite()) throw ValidationError("activation set '" + layer_tag + "' contains NaN/Inf");
}

const SubjectResponses& NeuralDataset::subject(std::string_view id) const {
  for (const auto& s : subjects)
    if (s.subject_id == id) return s;
  throw ValidationError("unknown subject '" + std::string(id) + "'");
}

std::vector<std::string> NeuralDataset::subject_ids() const {
  std::vector<std::string> out;
  for (const auto& s : subjects) out.push_back(s.subject_id);
  return out;
}

void NeuralDataset::validate() const {
  if (subjects.empty()) throw ValidationError("dataset '" + benchmark_id + "' has no subjects");
  std::set<std::string_view> seen;
  for (const auto& s : subjects) {
    if (!seen.insert(s.subject_id).second) throw ValidationError("duplicate subject_id '" + s.subject_id + "'");
    if (s.matrix.rows() != static_cast<Index>(stimulus_ids.size())) {
      throw ShapeError("subject '" + s.subject_id + "' has " + std::to_string(s.matrix.rows()) + " rows, expected " +
                       std::to_string(stimulus_ids.size()));
    }
    if (!s.matrix.allFinite()) throw ValidationError("subject '" + s.subject_id + "' contains NaN/Inf");
  }
  if (modality == Modality::behavior && subjects.size() != 1)
    throw ValidationError("behavior datasets must have exactly one pseudo-subject");
  for (const auto& id : stimulus_ids)
    if (!groups.contains(id)) throw ValidationError("stimulus '" + id + "' has no group label");
}

AlignmentScore AlignmentScore::from_folds(std::string benchmark_id, std::string model_id,
                                          std::uint64_t checkpoint_tokens, std::vector<double> per_fold_r,
                                          double ceiling) {
  if (per_fold_r.empty()) throw ScoreUndefined("no fold scores for " + benchmark_id + "/" + model_id);
  if (!(ceiling > 0.0)) throw ValidationError("ceiling must be positive");
  AlignmentScore s;
  s.benchmark_id = std::move(benchmark_id);
  s.model_id = std::move(model_id);
  s.checkpoint_tokens = checkpoint_tokens;
  s.raw_r = std::accumulate(per_fold_r.begin(), per_fold_r.end(), 0.0) / static_cast<double>(per_fold_r.size());
  s.ceiling = ceiling;
  s.normalized = s.raw_r / ceiling;
  s.n_folds = static_cast<int>(per_fold_r.size());
  s.per_fold_r = std::move(per_fold_r);
  return s;
}

std::string_view to_string(FoldScheme s) noexcept {
  switch (s) {
    case FoldScheme::random: return "random";
    case FoldScheme::grouped: return "grouped";
    case FoldScheme::subject_holdout: return "subject_holdout";
  }
  return "random";
}

FoldScheme parse_fold_scheme(std::string_view s) {
  if (s == "random") return FoldScheme::random;
  if (s == "grouped") return FoldScheme::grouped;
  if (s == "subject_holdout") return FoldScheme::subject_holdout;
  throw ValidationError("unknown fold scheme '" + std::string(s) + "'");
}

int FoldSpec::fold(std::string_view element) const {
  for (std::size_t i = 0; i < elements.size(); ++i)
    if (elements[i] == element) return fold_of[i];
  throw ValidationError("element '" + std::string(element) + "' is not in the fold spec");
}

std::vector<std::size_t> FoldSpec::test_indices(int f) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i)
    if (fold_of[i] == f) out.push_back(i);
  return out;
}

std::vector<std::size_t> FoldSpec::train_indices(int f) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i)
    if (fold_of[i] != f) out.push_back(i);
  return out;
}

void FoldSpec::validate() const {
  if (k < 2) throw ValidationError("fold count k must be >= 2");
  if (elements.size() != fold_of.size()) throw ValidationError("fold assignment length mismatch");
  std::set<std::string_view> seen;
  std::vector<int> sizes(static_cast<std::size_t>(k), 0);
  for (std::size_t i = 0; i < elements.size(); ++i) {
    if (!seen.insert(elements[i]).second) throw ValidationError("element '" + elements[i] + "' assigned twice");
    if (fold_of[i] < 0 || fold_of[i] >= k) throw ValidationError("fold index out of range for '" + elements[i] + "'");
    ++sizes[static_cast<std::size_t>(fold_of[i])];
  }
  for (int f = 0; f < k; ++f)
    if (sizes[static_cast<std::size_t>(f)] == 0) throw ValidationError("fold " + std::to_string(f) + " is empty");
}

std::string FoldSpec::to_json() const {
  json assignments = json::array();
  for (std::size_t i = 0; i < elements.size(); ++i)
    assignments.push_back({{"id", elements[i]}, {"fold", fold_of[i]}});
  const json j = {{"scheme", to_string(scheme)}, {"k", k}, {"seed", seed}, {"assignments", assignments}};
  return j.dump(2);
}

FoldSpec FoldSpec::from_json(std::string_view text) {
  FoldSpec spec;
  try {
    const auto j = json::parse(text);
    spec.scheme = parse_fold_scheme(j.at("scheme").get<std::string>());
    spec.k = j.at("k").get<int>();
    spec.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& a : j.at("assignments")) {
      spec.elements.push_back(a.at("id").get<std::string>());
      spec.fold_of.push_back(a.at("fold").get<int>());
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("folds.json: ") + e.what());
  }
  spec.validate();
  return spec;
}

void TrajectoryTable::add(std::uint64_t checkpoint_tokens, std::string series_id, double value) {
  for (auto it = rows_.rbegin(); it != rows_.rend(); ++it) {
    if (it->series_id != series_id) continue;
    if (it->checkpoint_tokens == checkpoint_tokens)
      throw ValidationError("duplicate (" + std::to_string(checkpoint_tokens) + ", " + series_id + ") row");
    if (it->checkpoint_tokens > checkpoint_tokens)
      throw ValidationError("series '" + series_id + "' checkpoints must be strictly increasing");
    break;
  }
  rows_.push_back({checkpoint_tokens, std::move(series_id), value});
}

std::vector<std::string> TrajectoryTable::series_ids() const {
  std::vector<std::string> out;
  for (const auto& r : rows_)
    if (std::find(out.begin(), out.end(), r.series_id) == out.end()) out.push_back(r.series_id);
  return out;
}

std::vector<SeriesPoint> TrajectoryTable::series(std::string_view id) const {
  std::vector<SeriesPoint> out;
  for (const auto& r : rows_)
    if (r.series_id == id) out.push_back({r.checkpoint_tokens, r.value});
  return out;
}

bool TrajectoryTable::has(std::string_view id) const {
  return std::any_of(rows_.begin(), rows_.end(), [&](const auto& r) { return r.series_id == id; });
}

std::vector<std::pair<SeriesPoint, SeriesPoint>> align_series(const std::vector<SeriesPoint>& a,
                                                              const std::vector<SeriesPoint>& b) {
  std::vector<std::pair<SeriesPoint, SeriesPoint>> out;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].checkpoint_tokens < b[j].checkpoint_tokens) {
      ++i;
    } else if (b[j].checkpoint_tokens < a[i].checkpoint_tokens) {
      ++j;
    } else {
      out.emplace_back(a[i++], b[j++]);
    }
  }
  return out;
}

}  // namespace brainalign
