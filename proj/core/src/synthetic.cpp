#include "brainalign/synthetic.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "brainalign/npy.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace brainalign::synthetic {

Matrix gaussian(Index rows, Index cols, Rng& rng, double sd) {
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) m(r, c) = sd * rng.normal();
  return m;
}

Matrix random_orthogonal(Index n, Rng& rng) {
  const Matrix g = gaussian(n, n, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  // Fix column signs so the result is Haar-distributed.
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index i = 0; i < n; ++i)
    if (r(i, i) < 0) q.col(i) *= -1.0;
  return q;
}

GeneratedBenchmark make_benchmark(const BenchmarkSpec& spec) {
  Rng rng(spec.seed);
  const Index n = static_cast<Index>(spec.n_groups) * spec.per_group;
  GeneratedBenchmark out;
  out.latent = gaussian(n, spec.latent_dim, rng);

  auto& b = out.benchmark;
  b.benchmark_id = spec.benchmark_id;
  b.stimuli.presentation = Presentation::reading;
  b.stimuli.description = "synthetic benchmark";
  for (int g = 0; g < spec.n_groups; ++g) {
    for (int p = 0; p < spec.per_group; ++p) {
      const std::string id = spec.benchmark_id + "_g" + std::to_string(g) + "_s" + std::to_string(p);
      b.stimuli.stimuli.push_back({id, "synthetic sentence " + id, "topic" + std::to_string(g), p});
    }
  }
  b.neural.benchmark_id = spec.benchmark_id;
  b.neural.modality = Modality::fmri;
  b.neural.stimulus_ids = b.stimuli.ids();
  b.neural.groups = b.stimuli.groups();
  for (int s = 0; s < spec.n_subjects; ++s) {
    const Matrix projection = gaussian(spec.latent_dim, spec.units, rng);
    SubjectResponses subj;
    subj.subject_id = "S" + std::to_string(s);
    subj.matrix = out.latent * projection + gaussian(n, spec.units, rng, spec.noise_sd);
    b.neural.subjects.push_back(std::move(subj));
  }
  return out;
}

namespace {

constexpr int kLayerUnits = 24;
constexpr int kSignalUnits = 6;
constexpr int kLocalizerStimuli = 20;

struct ModelVariant {
  std::string model_id;
  std::vector<std::uint64_t> checkpoints;
  std::vector<double> strength;  // signal strength per checkpoint
  std::uint64_t seed;
};

// Layer activations: the first kSignalUnits carry the stimulus latent.
Matrix layer_activations(const Matrix& latent, const Matrix& readout, double strength, Rng& rng) {
  Matrix m = gaussian(latent.rows(), kLayerUnits, rng);
  m.leftCols(kSignalUnits) += strength * latent * readout;
  return m;
}

void write_csv(const fs::path& path, const std::string& body) { write_file_atomic(path, body); }

std::string rel(const fs::path& p, const fs::path& base) { return fs::relative(p, base).generic_string(); }

}  // namespace

fs::path write_demo_fixture(const fs::path& dir, std::uint64_t seed) {
  fs::create_directories(dir);
  Rng rng(seed);

  struct BenchSetup {
    BenchmarkSpec spec;
    json ceiling;
    std::optional<int> story_segments;
  };
  std::vector<BenchSetup> setups;
  {
    BenchmarkSpec a;
    a.benchmark_id = "synth_topics";
    a.n_subjects = 4;
    a.seed = mix_seed(seed, 1);
    setups.push_back({a, {{"method", "extrapolated"}, {"draws", 4}}, std::nullopt});
    BenchmarkSpec b;
    b.benchmark_id = "synth_stories";
    b.n_groups = 2;
    b.per_group = 30;
    b.n_subjects = 2;
    b.seed = mix_seed(seed, 2);
    setups.push_back({b, {{"method", "extrapolated"}, {"draws", 4}}, 5});
    BenchmarkSpec c;
    c.benchmark_id = "synth_theoretical";
    c.n_subjects = 3;
    c.noise_sd = 1.5;
    c.seed = mix_seed(seed, 3);
    setups.push_back({c, {{"method", "theoretical"}, {"value", 0.559}}, std::nullopt});
  }

  json benchmarks = json::array();
  std::vector<GeneratedBenchmark> generated;
  for (const auto& s : setups) {
    auto g = make_benchmark(s.spec);
    const auto bdir = dir / "benchmarks" / s.spec.benchmark_id;
    write_benchmark(bdir, g.benchmark.stimuli, g.benchmark.neural);
    json entry = {{"id", s.spec.benchmark_id}, {"dir", rel(bdir, dir)}, {"ceiling", s.ceiling}};
    if (s.story_segments) entry["story_segments"] = *s.story_segments;
    benchmarks.push_back(entry);
    generated.push_back(std::move(g));
  }

  const std::vector<std::uint64_t> checkpoints = {0, 1'000'000, 100'000'000, 1'000'000'000, 2'000'000'000,
                                                  4'000'000'000, 8'000'000'000, 16'000'000'000};
  std::vector<double> strength;
  for (const auto t : checkpoints) {
    const double x = std::log10(1.0 + static_cast<double>(t)) / 10.0;
    strength.push_back(0.15 + 1.2 * x * x);
  }
  std::vector<ModelVariant> variants = {{"tiny", checkpoints, strength, mix_seed(seed, 10)}};
  for (int s = 0; s < 5; ++s)
    variants.push_back({"tiny-random-tokens-s" + std::to_string(s), {checkpoints.back()}, {0.0}, mix_seed(seed, 20 + s)});
  variants.push_back({"tiny-untrained", {0}, {0.25}, mix_seed(seed, 30)});

  json models = json::array();
  for (const auto& v : variants) {
    Rng mrng(v.seed);
    // Fixed readouts per layer and benchmark, shared across checkpoints.
    std::vector<std::vector<Matrix>> readouts;
    for (std::size_t b = 0; b < generated.size(); ++b) {
      readouts.emplace_back();
      for (int layer = 0; layer < 2; ++layer)
        readouts.back().push_back(gaussian(setups[b].spec.latent_dim, kSignalUnits, mrng, 1.0 / std::sqrt(2.0)));
    }
    json cks = json::array();
    for (std::size_t c = 0; c < v.checkpoints.size(); ++c) {
      const auto tokens = v.checkpoints[c];
      const auto cdir = dir / "models" / v.model_id / ("ckpt_" + std::to_string(tokens));
      json acts = json::object();
      for (std::size_t b = 0; b < generated.size(); ++b) {
        const auto& g = generated[b];
        json layers = json::array();
        for (int layer = 0; layer < 2; ++layer) {
          ActivationSet a;
          a.model_id = v.model_id;
          a.checkpoint_tokens = tokens;
          a.layer_tag = "block" + std::to_string(layer);
          a.stimulus_ids = g.benchmark.stimuli.ids();
          a.matrix = layer_activations(g.latent, readouts[b][static_cast<std::size_t>(layer)], v.strength[c], mrng);
          const auto sidecar = write_activations(cdir / g.benchmark.benchmark_id, a.layer_tag, a);
          layers.push_back({{"layer_tag", a.layer_tag}, {"file", rel(sidecar, dir)}});
        }
        acts[g.benchmark.benchmark_id] = layers;
      }
      json loc = json::array();
      for (int layer = 0; layer < 2; ++layer) {
        const std::string tag = "block" + std::to_string(layer);
        json entry = {{"layer_tag", tag}};
        for (const char* condition : {"sentences", "nonwords"}) {
          ActivationSet a;
          a.model_id = v.model_id;
          a.checkpoint_tokens = tokens;
          a.layer_tag = tag;
          for (int i = 0; i < kLocalizerStimuli; ++i) a.stimulus_ids.push_back(std::string(condition) + std::to_string(i));
          a.matrix = gaussian(kLocalizerStimuli, kLayerUnits, mrng);
          if (std::string_view(condition) == "sentences") a.matrix.leftCols(kSignalUnits).array() += 1.5;
          const auto sidecar = write_activations(cdir / "localizer", tag + "_" + condition, a);
          entry[condition] = rel(sidecar, dir);
        }
        loc.push_back(entry);
      }
      cks.push_back({{"checkpoint_tokens", tokens}, {"localizer", loc}, {"activations", acts}});
    }
    models.push_back({{"model_id", v.model_id}, {"checkpoints", cks}});
  }

  json loc_stimuli = {{"schema_version", kSchemaVersion}, {"sentences", json::array()}, {"nonwords", json::array()}};
  for (int i = 0; i < kLocalizerStimuli; ++i) {
    loc_stimuli["sentences"].push_back("the localizer sentence number " + std::to_string(i) + " reads fine");
    loc_stimuli["nonwords"].push_back("blork snif dralp " + std::to_string(i));
  }
  write_file_atomic(dir / "localizer_stimuli.json", loc_stimuli.dump(2) + "\n");

  // Competence: formal saturates early, functional keeps climbing.
  std::ostringstream comp;
  comp << "model_id,checkpoint_tokens,benchmark,category,accuracy,chance\n";
  std::ostringstream series;
  series << "model_id,checkpoint_tokens,series_id,value\n";
  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    const double x = std::log10(1.0 + static_cast<double>(checkpoints[c])) / 10.0;
    const double formal = 0.5 + 0.3 * std::min(1.0, x * x * 1.1) + 0.005 * rng.normal();
    const double functional = 0.25 + 0.35 * std::pow(x, 6.0) + 0.005 * rng.normal();
    comp << "tiny," << checkpoints[c] << ",blimp,formal," << formal << ",0.5\n";
    comp << "tiny," << checkpoints[c] << ",syntaxgym,formal," << formal - 0.01 << ",0.5\n";
    comp << "tiny," << checkpoints[c] << ",arc_easy,functional," << functional << ",0.25\n";
    comp << "tiny," << checkpoints[c] << ",piqa,functional," << 0.5 + functional / 3 << ",0.5\n";
    series << "tiny," << checkpoints[c] << ",lm_loss," << 10.5 - 7.0 * x + 0.02 * rng.normal() << "\n";
  }
  write_csv(dir / "competence.csv", comp.str());
  write_csv(dir / "series.csv", series.str());

  // Behavioral: one 40-word story; early checkpoints' surprisal tracks RTs.
  constexpr int kWords = 40;
  std::vector<double> rt(kWords);
  std::ostringstream rts;
  rts << "stimulus_id,word_index,word,mean_rt_ms\n";
  for (int w = 0; w < kWords; ++w) {
    rt[static_cast<std::size_t>(w)] = 300.0 + 40.0 * rng.normal();
    rts << "story1," << w << ",word" << w << (w % 7 == 6 ? "." : "") << "," << rt[static_cast<std::size_t>(w)] << "\n";
  }
  write_csv(dir / "behavioral" / "reading_times.csv", rts.str());
  json behavioral = json::array();
  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    const double coupling = c < 5 ? 0.2 * static_cast<double>(c + 1) : 1.0 - 0.15 * static_cast<double>(c);
    std::ostringstream tl;
    tl << "stimulus_id,word_index,word,token_index,loss\n";
    for (int w = 0; w < kWords; ++w) {
      const double z = (rt[static_cast<std::size_t>(w)] - 300.0) / 40.0;
      const double total = std::max(0.05, 4.0 + coupling * z + rng.normal());
      const int pieces = 1 + (w % 3 == 0 ? 1 : 0);
      for (int p = 0; p < pieces; ++p) tl << "story1," << w << ",Word" << w << "," << p << "," << total / pieces << "\n";
    }
    const auto path = dir / "behavioral" / ("token_losses_" + std::to_string(checkpoints[c]) + ".csv");
    write_csv(path, tl.str());
    behavioral.push_back({{"model_id", "tiny"},
                          {"checkpoint_tokens", checkpoints[c]},
                          {"token_losses", rel(path, dir)},
                          {"reading_times", "behavioral/reading_times.csv"}});
  }

  json controls = json::array();
  json random_refs = json::array();
  for (int s = 0; s < 5; ++s)
    random_refs.push_back({{"model_id", "tiny-random-tokens-s" + std::to_string(s)}, {"checkpoint_tokens", checkpoints.back()}});
  controls.push_back({{"benchmark", "all"},
                      {"pretrained", {{"model_id", "tiny"}, {"checkpoint_tokens", checkpoints.back()}}},
                      {"random_token", random_refs},
                      {"untrained", {{"model_id", "tiny-untrained"}, {"checkpoint_tokens", 0}}}});

  const json config = {
      {"schema_version", kSchemaVersion},
      {"seed", seed},
      {"jobs", 0},
      {"ridge", {{"lambda_grid", {1e-4, 1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3, 1e4}}, {"inner_folds", 5}, {"standardize", true}}},
      {"folds", {{"scheme", "grouped"}, {"k", 10}}},
      {"benchmarks", benchmarks},
      {"localizer", {{"k", 8}, {"stimuli_file", "localizer_stimuli.json"}}},
      {"models", models},
      {"behavioral", behavioral},
      {"analysis",
       {{"competence", "competence.csv"},
        {"series", "series.csv"},
        {"trajectory", {{"k", 4}, {"intercept", true}, {"shuffle", false}}},
        {"fits", {{{"predictor", "formal_score"}, {"target", "brain_alignment"}},
                  {{"predictor", "functional_score"}, {"target", "brain_alignment"}}}},
        {"windows", {{{"name", "early"}, {"lo", 0}, {"hi", 2'000'000'000}, {"x", "brain_alignment"}, {"y", "lm_loss"}},
                     {{"name", "late"}, {"lo", 1'000'000'000}, {"hi", 16'000'000'000ull}, {"x", "brain_alignment"}, {"y", "lm_loss"}}}},
        {"wilcoxon", json::array()},
        {"controls", controls}}}};
  const auto config_path = dir / "config.json";
  write_file_atomic(config_path, config.dump(2) + "\n");
  return config_path;
}

}  // namespace brainalign::synthetic
