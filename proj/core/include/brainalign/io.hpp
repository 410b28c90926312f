#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "brainalign/datamodel.hpp"

namespace brainalign {

inline constexpr int kSchemaVersion = 1;

/// Throws MissingInputError when the file does not exist.
std::string read_file(const std::filesystem::path& path);

/// Writes to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

struct Benchmark {
  std::string benchmark_id;
  StimulusSet stimuli;
  NeuralDataset neural;

  friend bool operator==(const Benchmark&, const Benchmark&) = default;
};

/// Reads `manifest.json` plus one NPY matrix per subject from `dir`.
/// All-NaN units are dropped (count kept on each subject); partially-NaN
/// units are rejected.
Benchmark load_benchmark(const std::filesystem::path& dir);

/// Writes a benchmark directory readable by load_benchmark.
void write_benchmark(const std::filesystem::path& dir, const StimulusSet& stimuli, const NeuralDataset& neural);

/// Reads an `activations.json` sidecar and the matrix it points to.
ActivationSet read_activations(const std::filesystem::path& sidecar);

/// Writes `<dir>/<stem>.npy` and `<dir>/<stem>.json`; returns the sidecar path.
std::filesystem::path write_activations(const std::filesystem::path& dir, std::string_view stem,
                                        const ActivationSet& acts);

}  // namespace brainalign
