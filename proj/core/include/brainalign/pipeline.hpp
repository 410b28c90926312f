#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "brainalign/errors.hpp"

namespace brainalign::pipeline {

/// Pipeline entry points; `run` executes every stage in order.
enum class Stage { validate, localize, ceiling, score, behavioral, analyze, run };
std::string_view to_string(Stage s) noexcept;
Stage parse_stage(std::string_view s);

struct RunOptions {
  std::filesystem::path config;
  std::filesystem::path out_dir;
  std::optional<int> jobs;  // overrides the config value; 0 = all cores
  std::optional<std::uint64_t> seed_override;
};

struct StepOutcome {
  std::string step;
  bool up_to_date = false;
  std::vector<std::string> artifacts;
};

struct RunReport {
  std::vector<StepOutcome> steps;
  bool all_up_to_date() const;
};

/// Runs a stage after its prerequisites. A step whose input digest matches
/// run_state.json and whose outputs still hash to the recorded digests is
/// skipped. Artifacts produced by one step are re-hashed before another step
/// reads them.
RunReport execute(Stage stage, const RunOptions& options);

/// 2 for missing inputs, 3 for format/validation problems, 4 for numerical failures.
int exit_code(ErrorKind kind) noexcept;

inline constexpr std::string_view kStateFile = "run_state.json";
inline constexpr std::string_view kScoresFile = "scores.csv";

}  // namespace brainalign::pipeline
