#include "brainalign/splits.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "brainalign/errors.hpp"
#include "brainalign/random.hpp"

namespace brainalign {
namespace {

FoldSpec shuffled_partition(std::span<const std::string> ids, int k, std::uint64_t seed, FoldScheme scheme,
                            const char* op) {
  if (k < 2) throw ValidationError(std::string(op) + ": k must be >= 2");
  if (static_cast<std::size_t>(k) > ids.size()) {
    throw ValidationError(std::string(op) + ": k=" + std::to_string(k) + " exceeds the " +
                          std::to_string(ids.size()) + " available elements");
  }
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);

  FoldSpec spec;
  spec.scheme = scheme;
  spec.k = k;
  spec.seed = seed;
  spec.elements.assign(ids.begin(), ids.end());
  spec.fold_of.assign(ids.size(), -1);
  for (std::size_t pos = 0; pos < order.size(); ++pos)
    spec.fold_of[order[pos]] = static_cast<int>(pos % static_cast<std::size_t>(k));
  spec.validate();
  return spec;
}

}  // namespace

FoldSpec make_random_folds(std::span<const std::string> ids, int k, std::uint64_t seed) {
  return shuffled_partition(ids, k, seed, FoldScheme::random, "make_random_folds");
}

FoldSpec make_subject_folds(std::span<const std::string> subject_ids, int k, std::uint64_t seed) {
  return shuffled_partition(subject_ids, k, seed, FoldScheme::subject_holdout, "make_subject_folds");
}

FoldSpec make_grouped_folds(const std::vector<std::pair<std::string, std::string>>& id_labels, int k,
                            std::uint64_t seed) {
  std::vector<std::string> labels;
  std::map<std::string, std::size_t> sizes;
  for (const auto& [id, label] : id_labels) {
    if (label.empty()) throw ValidationError("make_grouped_folds: stimulus '" + id + "' has an empty group label");
    if (sizes[label]++ == 0) labels.push_back(label);
  }
  if (k < 2) {
    throw ValidationError("make_grouped_folds: k must be >= 2 (got " + std::to_string(k) + ", " +
                          std::to_string(labels.size()) + " distinct group label(s))");
  }
  if (static_cast<std::size_t>(k) > labels.size()) {
    throw ValidationError("make_grouped_folds: k=" + std::to_string(k) + " exceeds the " +
                          std::to_string(labels.size()) + " distinct group label(s)");
  }

  Rng rng(seed);
  rng.shuffle(labels);
  std::stable_sort(labels.begin(), labels.end(),
                   [&](const std::string& a, const std::string& b) { return sizes[a] > sizes[b]; });

  std::vector<std::size_t> load(static_cast<std::size_t>(k), 0);
  std::map<std::string, int> label_fold;
  for (const auto& label : labels) {
    const auto lightest = static_cast<std::size_t>(std::min_element(load.begin(), load.end()) - load.begin());
    label_fold[label] = static_cast<int>(lightest);
    load[lightest] += sizes[label];
  }

  FoldSpec spec;
  spec.scheme = FoldScheme::grouped;
  spec.k = k;
  spec.seed = seed;
  for (const auto& [id, label] : id_labels) {
    spec.elements.push_back(id);
    spec.fold_of.push_back(label_fold.at(label));
  }
  spec.validate();
  return spec;
}

FoldSpec make_grouped_folds(const std::map<std::string, std::string>& groups, int k, std::uint64_t seed) {
  return make_grouped_folds(std::vector<std::pair<std::string, std::string>>(groups.begin(), groups.end()), k, seed);
}

std::map<std::string, std::string> segment_story(std::span<const Stimulus> story, int n_segments) {
  if (n_segments < 2) throw ValidationError("segment_story: n_segments must be >= 2");
  if (static_cast<std::size_t>(n_segments) > story.size())
    throw ValidationError("segment_story: more segments than stimuli");
  for (std::size_t i = 1; i < story.size(); ++i) {
    if (story[i].position <= story[i - 1].position) {
      throw ValidationError("segment_story: stimulus '" + story[i].stimulus_id +
                            "' is out of presentation order");
    }
  }
  const std::size_t n = story.size();
  const auto segs = static_cast<std::size_t>(n_segments);
  const std::size_t base = n / segs;
  const std::size_t extra = n % segs;
  std::map<std::string, std::string> out;
  std::size_t idx = 0;
  for (std::size_t s = 0; s < segs; ++s) {
    const std::size_t len = base + (s < extra ? 1 : 0);
    for (std::size_t t = 0; t < len; ++t) out[story[idx++].stimulus_id] = "seg" + std::to_string(s);
  }
  return out;
}

std::size_t count_groups(const std::map<std::string, std::string>& groups) {
  std::set<std::string_view> labels;
  for (const auto& [id, label] : groups) labels.insert(label);
  return labels.size();
}

int grouped_fold_count(const std::map<std::string, std::string>& groups, int requested) {
  return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(requested), count_groups(groups)));
}

}  // namespace brainalign
