#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "brainalign/datamodel.hpp"

namespace brainalign {

inline constexpr int kDefaultFolds = 10;
inline constexpr int kDefaultStorySegments = 10;

/// Shuffled partition of `ids` into k folds whose sizes differ by at most one.
FoldSpec make_random_folds(std::span<const std::string> ids, int k, std::uint64_t seed);

/// Whole groups are assigned to folds: labels are shuffled, then placed
/// largest-first onto the currently lightest fold (by stimulus count).
/// Elements keep the order of `id_labels`.
FoldSpec make_grouped_folds(const std::vector<std::pair<std::string, std::string>>& id_labels, int k,
                            std::uint64_t seed);
FoldSpec make_grouped_folds(const std::map<std::string, std::string>& groups, int k, std::uint64_t seed);

/// Folds over subjects (each subject is held out as a whole).
FoldSpec make_subject_folds(std::span<const std::string> subject_ids, int k, std::uint64_t seed);

/// Splits an ordered story into contiguous segments labelled seg0..seg{n-1};
/// the first (size % n) segments get one extra stimulus.
std::map<std::string, std::string> segment_story(std::span<const Stimulus> story, int n_segments);

/// Number of distinct labels in a group map.
std::size_t count_groups(const std::map<std::string, std::string>& groups);

/// k used for grouped folds: the requested k, capped at the number of groups.
int grouped_fold_count(const std::map<std::string, std::string>& groups, int requested = kDefaultFolds);

}  // namespace brainalign
