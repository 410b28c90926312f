#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "brainalign/datamodel.hpp"
#include "brainalign/io.hpp"
#include "brainalign/random.hpp"

// Synthetic data with known structure, for tests, benchmarks and demo runs.
namespace brainalign::synthetic {

Matrix gaussian(Index rows, Index cols, Rng& rng, double sd = 1.0);

/// Random matrix with orthonormal columns (QR of a Gaussian matrix).
Matrix random_orthogonal(Index n, Rng& rng);

struct BenchmarkSpec {
  std::string benchmark_id = "synthetic";
  int n_groups = 12;
  int per_group = 5;
  int n_subjects = 4;
  int units = 16;
  int latent_dim = 6;
  double noise_sd = 1.0;
  std::uint64_t seed = 0;
};

/// Subject responses are a shared stimulus latent mapped through a
/// subject-specific projection plus independent noise. Also returns the
/// latent (stimuli x latent_dim) so callers can build aligned features.
struct GeneratedBenchmark {
  Benchmark benchmark;
  Matrix latent;
};

GeneratedBenchmark make_benchmark(const BenchmarkSpec& spec);

/// Writes a complete demo tree (benchmarks, per-checkpoint activations,
/// localizer activations, competence/series tables, behavioral CSVs and
/// config.json) under `dir`. Returns the config path.
std::filesystem::path write_demo_fixture(const std::filesystem::path& dir, std::uint64_t seed = 7);

}  // namespace brainalign::synthetic
