#include "brainalign/pipeline.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "brainalign/analysis.hpp"
#include "brainalign/behavioral.hpp"
#include "brainalign/ceiling.hpp"
#include "brainalign/csv.hpp"
#include "brainalign/datamodel.hpp"
#include "brainalign/digest.hpp"
#include "brainalign/io.hpp"
#include "brainalign/localizer.hpp"
#include "brainalign/metrics.hpp"
#include "brainalign/parallel.hpp"
#include "brainalign/predictivity.hpp"
#include "brainalign/ridge.hpp"
#include "brainalign/splits.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace brainalign::pipeline {

std::string_view to_string(Stage s) noexcept {
  switch (s) {
    case Stage::validate: return "validate";
    case Stage::localize: return "localize";
    case Stage::ceiling: return "ceiling";
    case Stage::score: return "score";
    case Stage::behavioral: return "behavioral";
    case Stage::analyze: return "analyze";
    case Stage::run: return "run";
  }
  return "?";
}

Stage parse_stage(std::string_view s) {
  for (auto st : {Stage::validate, Stage::localize, Stage::ceiling, Stage::score, Stage::behavioral, Stage::analyze,
                  Stage::run})
    if (to_string(st) == s) return st;
  throw ValidationError("unknown stage '" + std::string(s) + "'");
}

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::MissingInput: return 2;
    case ErrorKind::Format:
    case ErrorKind::Shape:
    case ErrorKind::Dtype:
    case ErrorKind::Validation: return 3;
    default: return 4;
  }
}

bool RunReport::all_up_to_date() const {
  return std::all_of(steps.begin(), steps.end(), [](const StepOutcome& s) { return s.up_to_date; });
}

namespace {

constexpr std::string_view kEngineVersion = "0.1.0";

enum class Metric { linear_predictivity, cka, rsa };

Metric parse_metric(const std::string& s) {
  if (s == "linear_predictivity") return Metric::linear_predictivity;
  if (s == "cka") return Metric::cka;
  if (s == "rsa") return Metric::rsa;
  throw ValidationError("unknown metric '" + s + "'");
}

struct FoldConfig {
  FoldScheme scheme = FoldScheme::grouped;
  int k = kDefaultFolds;
};

struct CeilingConfig {
  CeilingMethod method = CeilingMethod::extrapolated;
  int draws = kDefaultCeilingDraws;
  std::optional<double> value;
};

struct BenchmarkConfig {
  std::string id;
  fs::path dir;
  Metric metric = Metric::linear_predictivity;
  std::string metric_name = "linear_predictivity";
  FoldConfig folds;
  std::optional<int> story_segments;
  CeilingConfig ceiling;
  std::string aggregate_as;
};

struct LayerFile {
  std::string layer_tag;
  fs::path file;
};

struct LocalizerFiles {
  std::string layer_tag;
  fs::path sentences;
  fs::path nonwords;
};

struct CheckpointConfig {
  std::uint64_t tokens = 0;
  std::vector<LocalizerFiles> localizer;
  std::map<std::string, std::vector<LayerFile>> activations;
};

struct ModelConfig {
  std::string model_id;
  std::vector<CheckpointConfig> checkpoints;
};

struct BehavioralConfig {
  std::string model_id;
  std::uint64_t tokens = 0;
  fs::path token_losses;
  fs::path reading_times;
};

struct Config {
  fs::path base;
  std::string digest;
  std::uint64_t seed = 0;
  int jobs = 0;
  RidgeConfig ridge;
  FoldConfig folds;
  std::vector<BenchmarkConfig> benchmarks;
  int localizer_k = kDefaultLocalizedUnits;
  bool localizer_per_layer = false;
  std::optional<fs::path> localizer_stimuli;
  std::vector<ModelConfig> models;
  std::vector<BehavioralConfig> behavioral;
  json analysis = json::object();
  std::vector<fs::path> score_tables;
  std::optional<fs::path> competence;
  std::optional<fs::path> series;
  std::map<std::string, std::string> aliases;

  fs::path resolve(const std::string& p) const { return base / p; }
  std::string aggregate_label(const std::string& benchmark_id) const {
    for (const auto& b : benchmarks)
      if (b.id == benchmark_id && !b.aggregate_as.empty()) return b.aggregate_as;
    const auto it = aliases.find(benchmark_id);
    return it == aliases.end() ? benchmark_id : it->second;
  }
};

FoldConfig parse_folds(const json& j, FoldConfig base) {
  if (j.contains("scheme")) base.scheme = parse_fold_scheme(j.at("scheme").get<std::string>());
  if (j.contains("k")) base.k = j.at("k").get<int>();
  return base;
}

AverageOrder parse_average(const std::string& s) {
  if (s == "units_then_folds") return AverageOrder::units_then_folds;
  if (s == "folds_then_units") return AverageOrder::folds_then_units;
  throw ValidationError("unknown ridge.average '" + s + "'");
}

Config parse_config(const fs::path& path) {
  Config c;
  const std::string text = read_file(path);
  c.digest = sha256_hex(text);
  c.base = path.parent_path();
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  try {
    if (!j.is_object() || !j.contains("schema_version")) throw FormatError(path.string() + ": missing schema_version");
    if (j.at("schema_version").get<int>() != kSchemaVersion)
      throw FormatError(path.string() + ": unsupported schema_version " + j.at("schema_version").dump());
    if (!j.contains("seed") || !j.at("seed").is_number_integer())
      throw ValidationError(path.string() + ": 'seed' is a mandatory integer field");
    c.seed = j.at("seed").get<std::uint64_t>();
    c.jobs = j.value("jobs", 0);
    if (j.contains("ridge")) {
      const auto& r = j.at("ridge");
      if (r.contains("lambda_grid")) c.ridge.lambda_grid = r.at("lambda_grid").get<std::vector<double>>();
      c.ridge.inner_folds = r.value("inner_folds", c.ridge.inner_folds);
      c.ridge.standardize = r.value("standardize", c.ridge.standardize);
      c.ridge.per_unit_lambda = r.value("per_unit_lambda", c.ridge.per_unit_lambda);
      c.ridge.min_train = r.value("min_train", c.ridge.min_train);
      if (r.contains("average")) c.ridge.average = parse_average(r.at("average").get<std::string>());
    }
    c.ridge.validate();
    if (j.contains("folds")) c.folds = parse_folds(j.at("folds"), c.folds);

    std::set<std::string> seen;
    for (const auto& b : j.value("benchmarks", json::array())) {
      BenchmarkConfig bc;
      bc.id = b.at("id").get<std::string>();
      if (!seen.insert(bc.id).second) throw ValidationError("duplicate benchmark id '" + bc.id + "'");
      bc.dir = c.resolve(b.at("dir").get<std::string>());
      bc.metric_name = b.value("metric", std::string("linear_predictivity"));
      bc.metric = parse_metric(bc.metric_name);
      bc.folds = b.contains("folds") ? parse_folds(b.at("folds"), c.folds) : c.folds;
      if (b.contains("story_segments")) bc.story_segments = b.at("story_segments").get<int>();
      if (b.contains("ceiling")) {
        const auto& cj = b.at("ceiling");
        bc.ceiling.method = parse_ceiling_method(cj.value("method", std::string("extrapolated")));
        bc.ceiling.draws = cj.value("draws", kDefaultCeilingDraws);
        if (cj.contains("value")) bc.ceiling.value = cj.at("value").get<double>();
        if (bc.ceiling.method == CeilingMethod::theoretical && !bc.ceiling.value)
          throw ValidationError("benchmark '" + bc.id + "': theoretical ceiling needs a value");
      }
      bc.aggregate_as = b.value("aggregate_as", std::string{});
      c.benchmarks.push_back(std::move(bc));
    }

    if (j.contains("localizer")) {
      const auto& l = j.at("localizer");
      c.localizer_k = l.value("k", kDefaultLocalizedUnits);
      c.localizer_per_layer = l.value("per_layer", false);
      if (l.contains("stimuli_file")) c.localizer_stimuli = c.resolve(l.at("stimuli_file").get<std::string>());
    }

    for (const auto& m : j.value("models", json::array())) {
      ModelConfig mc;
      mc.model_id = m.at("model_id").get<std::string>();
      for (const auto& ck : m.at("checkpoints")) {
        CheckpointConfig cc;
        cc.tokens = ck.at("checkpoint_tokens").get<std::uint64_t>();
        for (const auto& l : ck.value("localizer", json::array()))
          cc.localizer.push_back({l.at("layer_tag").get<std::string>(), c.resolve(l.at("sentences").get<std::string>()),
                                  c.resolve(l.at("nonwords").get<std::string>())});
        const json acts = ck.value("activations", json::object());
        for (const auto& [bench, layers] : acts.items()) {
          auto& list = cc.activations[bench];
          for (const auto& l : layers)
            list.push_back({l.at("layer_tag").get<std::string>(), c.resolve(l.at("file").get<std::string>())});
        }
        if (!mc.checkpoints.empty() && cc.tokens <= mc.checkpoints.back().tokens)
          throw ValidationError("model '" + mc.model_id + "': checkpoints must be listed in increasing token order");
        mc.checkpoints.push_back(std::move(cc));
      }
      c.models.push_back(std::move(mc));
    }

    for (const auto& b : j.value("behavioral", json::array()))
      c.behavioral.push_back({b.at("model_id").get<std::string>(), b.at("checkpoint_tokens").get<std::uint64_t>(),
                              c.resolve(b.at("token_losses").get<std::string>()),
                              c.resolve(b.at("reading_times").get<std::string>())});

    c.analysis = j.value("analysis", json::object());
    for (const auto& t : c.analysis.value("score_tables", json::array()))
      c.score_tables.push_back(c.resolve(t.get<std::string>()));
    if (c.analysis.contains("competence")) c.competence = c.resolve(c.analysis.at("competence").get<std::string>());
    if (c.analysis.contains("series")) c.series = c.resolve(c.analysis.at("series").get<std::string>());
    c.aliases = c.analysis.value("aliases", std::map<std::string, std::string>{});
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return c;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string normalize_text(std::string_view s) {
  std::string out;
  bool space = false;
  for (const char ch : s) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      space = !out.empty();
      continue;
    }
    if (space) out.push_back(' ');
    space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  }
  return out;
}

// Rows of `acts` reordered to `ids`.
Matrix align_rows(const ActivationSet& acts, const std::vector<std::string>& ids, const std::string& what) {
  if (acts.stimulus_ids == ids) return acts.matrix;
  if (acts.stimulus_ids.size() != ids.size())
    throw ValidationError(what + ": " + std::to_string(acts.stimulus_ids.size()) + " stimuli, benchmark has " +
                          std::to_string(ids.size()));
  std::map<std::string, Index> row;
  for (std::size_t i = 0; i < acts.stimulus_ids.size(); ++i) row[acts.stimulus_ids[i]] = static_cast<Index>(i);
  Matrix out(acts.matrix.rows(), acts.matrix.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto it = row.find(ids[i]);
    if (it == row.end()) throw ValidationError(what + ": stimulus '" + ids[i] + "' has no activation row");
    out.row(static_cast<Index>(i)) = acts.matrix.row(it->second);
  }
  return out;
}

struct ScoreRow {
  std::string benchmark_id;
  std::string model_id;
  std::uint64_t tokens = 0;
  double raw_r = 0.0;
  double ceiling = 1.0;
  double normalized = 0.0;
  int n_folds = 0;
};

std::vector<ScoreRow> parse_scores_csv(const fs::path& path) {
  const auto rows = csv::read(path, {"benchmark_id", "model_id", "checkpoint_tokens", "raw_r", "ceiling", "normalized",
                                     "n_folds"});
  std::vector<ScoreRow> out;
  for (const auto& r : rows)
    out.push_back({r[0], r[1], csv::parse_number<std::uint64_t>(r[2], path), csv::parse_number<double>(r[3], path),
                   csv::parse_number<double>(r[4], path), csv::parse_number<double>(r[5], path),
                   csv::parse_number<int>(r[6], path)});
  return out;
}

struct ModelSeries {
  // series id -> tokens -> value
  std::map<std::string, std::map<std::uint64_t, double>> values;
  void put(const std::string& series_id, std::uint64_t tokens, double value, const std::string& source) {
    if (!values[series_id].emplace(tokens, value).second)
      throw ValidationError(source + ": duplicate value for series '" + series_id + "' at " + std::to_string(tokens) +
                            " tokens");
  }
  std::vector<SeriesPoint> get(const std::string& id) const {
    std::vector<SeriesPoint> out;
    const auto it = values.find(id);
    if (it == values.end()) return out;
    for (const auto& [t, v] : it->second) out.push_back({t, v});
    return out;
  }
};

json test_json(const TestResult& t) {
  return {{"statistic_name", to_string(t.statistic_name)}, {"statistic", t.statistic}, {"p_value", t.p_value}, {"n", t.n}};
}

json fit_json(const TrajectoryFit& f) {
  return {{"predictor", f.predictor_series}, {"target", f.target_series}, {"per_fold_r2", f.per_fold_r2},
          {"scored_folds", f.scored_folds},  {"skipped_folds", f.skipped_folds}, {"mean_r2", f.mean_r2},
          {"weight", f.weight},              {"intercept", f.intercept}};
}

enum class Step { validate, localize, folds, ceiling, score, behavioral, analyze };

class Runner {
 public:
  explicit Runner(const RunOptions& opts);
  RunReport run(Stage stage);

 private:
  void ensure(Step step);
  void step(const std::string& name, const std::vector<std::string>& upstream,
            const std::function<std::map<std::string, std::string>()>& produce);
  std::string read_verified(const std::string& name) const;
  json read_artifact(const std::string& name) const;
  const std::string* recorded_digest(const std::string& file) const;
  void save_state() const;
  std::string inputs_digest();
  const Benchmark& benchmark(const BenchmarkConfig& b);
  std::string dump(json j) const {
    j["config_digest"] = cfg_.digest;
    j["seed"] = cfg_.seed;
    return j.dump(2) + "\n";
  }

  std::map<std::string, std::string> do_validate();
  std::map<std::string, std::string> do_localize();
  std::map<std::string, std::string> do_folds();
  std::map<std::string, std::string> do_ceiling();
  std::map<std::string, std::string> do_score();
  std::map<std::string, std::string> do_behavioral();
  std::map<std::string, std::string> do_analyze();

  Config cfg_;
  fs::path out_;
  int jobs_ = 1;
  json state_;
  std::optional<std::string> inputs_digest_;
  std::map<std::string, Benchmark> loaded_;
  std::set<Step> done_;
  RunReport report_;
};

Runner::Runner(const RunOptions& opts) : cfg_(parse_config(opts.config)), out_(opts.out_dir) {
  jobs_ = resolve_jobs(opts.jobs.value_or(cfg_.jobs));
  const auto state_path = out_ / kStateFile;
  if (opts.seed_override) {
    bool has_artifacts = fs::exists(state_path);
    if (fs::exists(out_) && fs::is_directory(out_))
      for (const auto& e : fs::directory_iterator(out_))
        if (e.is_regular_file()) has_artifacts = true;
    if (has_artifacts)
      throw ValidationError("--seed-override refused: artifacts already exist in " + out_.string());
    cfg_.seed = *opts.seed_override;
  }
  state_ = json::object();
  if (fs::exists(state_path)) {
    try {
      state_ = json::parse(read_file(state_path));
    } catch (const json::exception&) {
      spdlog::warn("{} is unreadable; every step will rerun", state_path.string());
      state_ = json::object();
    }
  }
  if (!state_.contains("steps") || !state_["steps"].is_object()) state_["steps"] = json::object();
}

RunReport Runner::run(Stage stage) {
  switch (stage) {
    case Stage::validate: ensure(Step::validate); break;
    case Stage::localize: ensure(Step::localize); break;
    case Stage::ceiling: ensure(Step::ceiling); break;
    case Stage::score: ensure(Step::score); break;
    case Stage::behavioral: ensure(Step::behavioral); break;
    case Stage::analyze: ensure(Step::analyze); break;
    case Stage::run:
      for (auto s : {Step::validate, Step::localize, Step::folds, Step::ceiling, Step::score, Step::behavioral,
                     Step::analyze})
        ensure(s);
      break;
  }
  return report_;
}

void Runner::ensure(Step s) {
  if (done_.count(s)) return;
  switch (s) {
    case Step::validate:
      step("validate", {}, [&] { return do_validate(); });
      break;
    case Step::localize:
      ensure(Step::validate);
      step("localize", {"validation.json"}, [&] { return do_localize(); });
      break;
    case Step::folds:
      ensure(Step::validate);
      step("folds", {"validation.json"}, [&] { return do_folds(); });
      break;
    case Step::ceiling:
      ensure(Step::folds);
      step("ceiling", {"folds.json"}, [&] { return do_ceiling(); });
      break;
    case Step::score:
      ensure(Step::folds);
      ensure(Step::ceiling);
      ensure(Step::localize);
      step("score", {"folds.json", "ceiling.json", "localizer.json"}, [&] { return do_score(); });
      break;
    case Step::behavioral:
      ensure(Step::validate);
      step("behavioral", {"validation.json"}, [&] { return do_behavioral(); });
      break;
    case Step::analyze: {
      std::vector<std::string> upstream;
      ensure(Step::validate);
      upstream.push_back("validation.json");
      if (!cfg_.benchmarks.empty() && !cfg_.models.empty()) {
        ensure(Step::score);
        upstream.push_back(std::string(kScoresFile));
      }
      if (!cfg_.behavioral.empty()) {
        ensure(Step::behavioral);
        upstream.push_back("behavioral.json");
      }
      step("analyze", upstream, [&] { return do_analyze(); });
      break;
    }
  }
  done_.insert(s);
}

const std::string* Runner::recorded_digest(const std::string& file) const {
  for (const auto& [name, rec] : state_["steps"].items()) {
    if (!rec.is_object() || !rec.contains("outputs")) continue;
    const auto& outs = rec.at("outputs");
    if (outs.contains(file)) return outs.at(file).get_ptr<const std::string*>();
  }
  return nullptr;
}

std::string Runner::read_verified(const std::string& name) const {
  std::string text = read_file(out_ / name);
  const auto* expected = recorded_digest(name);
  if (expected == nullptr || *expected != sha256_hex(text))
    throw ValidationError(name + " does not match the digest recorded in " + std::string(kStateFile));
  return text;
}

json Runner::read_artifact(const std::string& name) const {
  try {
    return json::parse(read_verified(name));
  } catch (const json::exception& e) {
    throw FormatError(name + ": " + e.what());
  }
}

void Runner::save_state() const {
  json s = state_;
  s["schema_version"] = kSchemaVersion;
  s["config_digest"] = cfg_.digest;
  s["seed"] = cfg_.seed;
  write_file_atomic(out_ / kStateFile, s.dump(2) + "\n");
}

void Runner::step(const std::string& name, const std::vector<std::string>& upstream,
                  const std::function<std::map<std::string, std::string>()>& produce) {
  json key = {{"step", name}, {"engine", kEngineVersion}, {"config_digest", cfg_.digest}, {"seed", cfg_.seed},
              {"inputs", inputs_digest()}};
  for (const auto& u : upstream) {
    const auto* d = recorded_digest(u);
    key["upstream"][u] = d ? *d : "";
  }
  const std::string digest = sha256_hex(key.dump());

  const auto& steps = state_["steps"];
  if (steps.contains(name) && steps.at(name).value("input_digest", std::string{}) == digest) {
    const auto& rec = steps.at(name);
    bool intact = true;
    std::vector<std::string> files;
    for (const auto& [file, sha] : rec.at("outputs").items()) {
      files.push_back(file);
      const auto path = out_ / file;
      if (!fs::exists(path) || sha256_file(path) != sha.get<std::string>()) intact = false;
    }
    if (intact) {
      spdlog::info("{}: up-to-date", name);
      report_.steps.push_back({name, true, files});
      return;
    }
  }

  spdlog::info("{}: running", name);
  const auto outputs = produce();
  fs::create_directories(out_);
  json recorded = json::object();
  std::vector<std::string> files;
  for (const auto& [file, content] : outputs) {
    write_file_atomic(out_ / file, content);
    recorded[file] = sha256_hex(content);
    files.push_back(file);
  }
  state_["steps"][name] = {{"input_digest", digest}, {"outputs", recorded}};
  save_state();
  report_.steps.push_back({name, false, files});
}

std::string Runner::inputs_digest() {
  if (inputs_digest_) return *inputs_digest_;
  std::map<std::string, std::string> files;
  auto add_file = [&](const fs::path& p) {
    if (!fs::exists(p)) throw MissingInputError("missing input: " + p.string());
    files[fs::relative(p, cfg_.base).generic_string()] = sha256_file(p);
  };
  auto add_sidecar = [&](const fs::path& p) {
    add_file(p);
    json j;
    try {
      j = json::parse(read_file(p));
    } catch (const json::exception& e) {
      throw FormatError(p.string() + ": " + e.what());
    }
    if (j.contains("matrix_file") && j["matrix_file"].is_string())
      add_file(p.parent_path() / j["matrix_file"].get<std::string>());
  };
  for (const auto& b : cfg_.benchmarks) {
    if (!fs::is_directory(b.dir)) throw MissingInputError("missing benchmark directory: " + b.dir.string());
    std::vector<fs::path> entries;
    for (const auto& e : fs::recursive_directory_iterator(b.dir))
      if (e.is_regular_file()) entries.push_back(e.path());
    std::sort(entries.begin(), entries.end());
    for (const auto& e : entries) add_file(e);
  }
  for (const auto& m : cfg_.models)
    for (const auto& ck : m.checkpoints) {
      for (const auto& l : ck.localizer) {
        add_sidecar(l.sentences);
        add_sidecar(l.nonwords);
      }
      for (const auto& [bench, layers] : ck.activations)
        for (const auto& l : layers) add_sidecar(l.file);
    }
  if (cfg_.localizer_stimuli) add_file(*cfg_.localizer_stimuli);
  for (const auto& b : cfg_.behavioral) {
    add_file(b.token_losses);
    add_file(b.reading_times);
  }
  for (const auto& t : cfg_.score_tables) add_file(t);
  if (cfg_.competence) add_file(*cfg_.competence);
  if (cfg_.series) add_file(*cfg_.series);
  inputs_digest_ = sha256_hex(json(files).dump());
  return *inputs_digest_;
}

const Benchmark& Runner::benchmark(const BenchmarkConfig& b) {
  auto it = loaded_.find(b.id);
  if (it != loaded_.end()) return it->second;
  if (!fs::is_directory(b.dir)) throw MissingInputError("missing benchmark directory: " + b.dir.string());
  auto bench = load_benchmark(b.dir);
  if (bench.benchmark_id != b.id)
    throw ValidationError("benchmark directory " + b.dir.string() + " holds '" + bench.benchmark_id +
                          "', config expects '" + b.id + "'");
  return loaded_.emplace(b.id, std::move(bench)).first->second;
}

// ---------------------------------------------------------------------------

std::map<std::string, std::string> Runner::do_validate() {
  json benches = json::array();
  std::map<std::string, std::vector<std::string>> ids_of;
  for (const auto& b : cfg_.benchmarks) {
    const auto& bench = benchmark(b);
    json subjects = json::array();
    for (const auto& s : bench.neural.subjects)
      subjects.push_back({{"subject_id", s.subject_id}, {"units", s.matrix.cols()}, {"dropped_units", s.dropped_units}});
    benches.push_back({{"benchmark_id", b.id},
                       {"modality", to_string(bench.neural.modality)},
                       {"n_stimuli", bench.stimuli.stimuli.size()},
                       {"n_groups", count_groups(bench.neural.groups)},
                       {"subjects", subjects}});
    ids_of[b.id] = bench.neural.stimulus_ids;
  }

  json acts = json::array();
  for (const auto& m : cfg_.models)
    for (const auto& ck : m.checkpoints) {
      for (const auto& [bench_id, layers] : ck.activations) {
        const auto it = ids_of.find(bench_id);
        if (it == ids_of.end())
          throw ValidationError("model '" + m.model_id + "' lists activations for unknown benchmark '" + bench_id + "'");
        for (const auto& l : layers) {
          const auto a = read_activations(l.file);
          a.validate();
          const std::string what = m.model_id + "@" + std::to_string(ck.tokens) + "/" + bench_id + "/" + l.layer_tag;
          if (a.layer_tag != l.layer_tag)
            throw ValidationError(what + ": sidecar layer_tag is '" + a.layer_tag + "'");
          align_rows(a, it->second, what);
          acts.push_back({{"model_id", m.model_id}, {"checkpoint_tokens", ck.tokens}, {"benchmark_id", bench_id},
                          {"layer_tag", l.layer_tag}, {"rows", a.matrix.rows()}, {"cols", a.matrix.cols()}});
        }
      }
      for (const auto& l : ck.localizer) {
        const auto s = read_activations(l.sentences);
        const auto n = read_activations(l.nonwords);
        s.validate();
        n.validate();
        if (s.matrix.cols() != n.matrix.cols())
          throw ShapeError(m.model_id + " localizer layer '" + l.layer_tag + "': sentence and nonword unit counts differ");
      }
    }

  for (const auto& b : cfg_.behavioral) {
    read_token_losses_csv(b.token_losses);
    read_reading_times_csv(b.reading_times);
  }
  for (const auto& t : cfg_.score_tables) parse_scores_csv(t);
  if (cfg_.competence)
    csv::read(*cfg_.competence, {"model_id", "checkpoint_tokens", "benchmark", "category", "accuracy", "chance"});
  if (cfg_.series) csv::read(*cfg_.series, {"model_id", "checkpoint_tokens", "series_id", "value"});

  json out = {{"status", "ok"}, {"benchmarks", benches}, {"activation_sets", acts}};
  return {{"validation.json", dump(out)}};
}

std::map<std::string, std::string> Runner::do_localize() {
  std::string stimuli_digest;
  json overlap = json::array();
  if (cfg_.localizer_stimuli) {
    const std::string text = read_file(*cfg_.localizer_stimuli);
    stimuli_digest = sha256_hex(text);
    json j;
    try {
      j = json::parse(text);
    } catch (const json::exception& e) {
      throw FormatError(cfg_.localizer_stimuli->string() + ": " + e.what());
    }
    std::set<std::string> localizer_texts;
    for (const char* key : {"sentences", "nonwords"})
      for (const auto& s : j.value(key, json::array())) localizer_texts.insert(normalize_text(s.get<std::string>()));
    for (const auto& b : cfg_.benchmarks)
      for (const auto& st : benchmark(b).stimuli.stimuli)
        if (localizer_texts.count(normalize_text(st.text)))
          overlap.push_back({{"benchmark_id", b.id}, {"stimulus_id", st.stimulus_id}});
    if (!overlap.empty())
      spdlog::warn("{} benchmark stimuli also appear among the localizer stimuli", overlap.size());
  }

  json selections = json::array();
  for (const auto& m : cfg_.models)
    for (const auto& ck : m.checkpoints) {
      if (ck.localizer.empty()) continue;
      std::vector<LayerContrast> layers;
      for (const auto& l : ck.localizer)
        layers.push_back({l.layer_tag, read_activations(l.sentences).matrix, read_activations(l.nonwords).matrix});
      auto result = select_units(layers, cfg_.localizer_k, cfg_.localizer_per_layer);
      result.model_id = m.model_id;
      result.checkpoint_tokens = ck.tokens;
      result.stimuli_digest = stimuli_digest;
      selections.push_back(json::parse(result.to_json()));
    }

  json out = {{"k", cfg_.localizer_k},
              {"per_layer", cfg_.localizer_per_layer},
              {"stimuli_digest", stimuli_digest},
              {"benchmark_overlap", overlap},
              {"selections", selections}};
  return {{"localizer.json", dump(out)}};
}

std::map<std::string, std::string> Runner::do_folds() {
  json benches = json::array();
  for (const auto& b : cfg_.benchmarks) {
    const auto& bench = benchmark(b);
    std::map<std::string, std::string> groups = bench.neural.groups;
    std::string source = "group";
    if (b.story_segments) {
      source = "story_segments";
      std::map<std::string, std::vector<Stimulus>> stories;
      std::vector<std::string> order;
      for (const auto& st : bench.stimuli.stimuli) {
        if (!stories.count(st.group)) order.push_back(st.group);
        stories[st.group].push_back(st);
      }
      groups.clear();
      for (const auto& story : order)
        for (const auto& [id, seg] : segment_story(stories[story], *b.story_segments)) groups[id] = story + "/" + seg;
    }
    FoldSpec spec;
    switch (b.folds.scheme) {
      case FoldScheme::grouped: {
        const int k = grouped_fold_count(groups, b.folds.k);
        if (k < b.folds.k && k >= 2)
          spdlog::warn("{}: {} groups, using {} folds instead of {}", b.id, count_groups(groups), k, b.folds.k);
        std::vector<std::pair<std::string, std::string>> labels;
        for (const auto& id : bench.neural.stimulus_ids) labels.emplace_back(id, groups.at(id));
        spec = make_grouped_folds(labels, k, cfg_.seed);
        break;
      }
      case FoldScheme::random:
        spec = make_random_folds(bench.neural.stimulus_ids, b.folds.k, cfg_.seed);
        break;
      case FoldScheme::subject_holdout:
        throw ValidationError("benchmark '" + b.id + "': subject_holdout folds do not apply to stimulus-level scoring");
    }
    benches.push_back(
        {{"benchmark_id", b.id}, {"group_source", source}, {"groups", groups}, {"folds", json::parse(spec.to_json())}});
  }
  return {{"folds.json", dump({{"benchmarks", benches}})}};
}

struct FoldPlan {
  FoldSpec spec;
  std::map<std::string, std::string> groups;
};

std::map<std::string, FoldPlan> parse_fold_plans(const json& j) {
  std::map<std::string, FoldPlan> out;
  for (const auto& b : j.at("benchmarks"))
    out[b.at("benchmark_id").get<std::string>()] = {FoldSpec::from_json(b.at("folds").dump()),
                                                    b.at("groups").get<std::map<std::string, std::string>>()};
  return out;
}

std::map<std::string, std::string> Runner::do_ceiling() {
  const auto plans = parse_fold_plans(read_artifact("folds.json"));
  json ceilings = json::array();
  for (const auto& b : cfg_.benchmarks) {
    const auto& plan = plans.at(b.id);
    NeuralDataset neural = benchmark(b).neural;
    neural.groups = plan.groups;
    CeilingEstimate est;
    switch (b.ceiling.method) {
      case CeilingMethod::extrapolated:
        est = extrapolate_ceiling(neural, plan.spec, cfg_.ridge, b.ceiling.draws, cfg_.seed, jobs_);
        break;
      case CeilingMethod::fixed:
        est = fixed_ceiling(neural, plan.spec, cfg_.ridge, cfg_.seed, jobs_);
        break;
      case CeilingMethod::theoretical:
        est = theoretical_ceiling(b.id, *b.ceiling.value);
        break;
    }
    ceilings.push_back(json::parse(est.to_json()));
  }
  return {{"ceiling.json", dump({{"ceilings", ceilings}})}};
}

std::map<std::string, std::string> Runner::do_score() {
  const auto plans = parse_fold_plans(read_artifact("folds.json"));
  std::map<std::string, double> ceiling_of;
  const json ceilings_json = read_artifact("ceiling.json");
  for (const auto& c : ceilings_json.at("ceilings"))
    ceiling_of[c.at("benchmark_id").get<std::string>()] = CeilingEstimate::from_json(c.dump()).value();
  std::map<std::pair<std::string, std::uint64_t>, LocalizerResult> selection;
  const json localized_json = read_artifact("localizer.json");
  for (const auto& s : localized_json.at("selections")) {
    auto r = LocalizerResult::from_json(s.dump());
    selection.emplace(std::pair{r.model_id, r.checkpoint_tokens}, std::move(r));
  }

  struct Job {
    const BenchmarkConfig* bench;
    const ModelConfig* model;
    const CheckpointConfig* ckpt;
  };
  std::vector<Job> jobs;
  for (const auto& b : cfg_.benchmarks) {
    benchmark(b);  // load before going parallel
    for (const auto& m : cfg_.models)
      for (const auto& ck : m.checkpoints)
        if (ck.activations.count(b.id)) jobs.push_back({&b, &m, &ck});
  }

  struct Outcome {
    AlignmentScore score;
    json detail;
  };
  std::vector<Outcome> outcomes(jobs.size());
  parallel_for(jobs.size(), jobs_, [&](std::size_t i) {
    const auto& job = jobs[i];
    const auto& bench = loaded_.at(job.bench->id);
    const auto& ids = bench.neural.stimulus_ids;
    const std::string what = job.model->model_id + "@" + std::to_string(job.ckpt->tokens) + "/" + job.bench->id;

    std::vector<ActivationSet> stack;
    for (const auto& l : job.ckpt->activations.at(job.bench->id)) {
      auto a = read_activations(l.file);
      a.matrix = align_rows(a, ids, what);
      a.stimulus_ids = ids;
      stack.push_back(std::move(a));
    }
    Matrix features;
    const auto sel = selection.find({job.model->model_id, job.ckpt->tokens});
    const bool localized = sel != selection.end();
    if (localized) {
      features = apply_selection(stack, sel->second).matrix;
    } else {
      Index cols = 0;
      for (const auto& a : stack) cols += a.matrix.cols();
      features.resize(static_cast<Index>(ids.size()), cols);
      Index at = 0;
      for (const auto& a : stack) {
        features.middleCols(at, a.matrix.cols()) = a.matrix;
        at += a.matrix.cols();
      }
    }

    const auto& plan = plans.at(job.bench->id);
    std::vector<double> per_fold;
    json detail = {{"benchmark_id", job.bench->id},
                   {"model_id", job.model->model_id},
                   {"checkpoint_tokens", job.ckpt->tokens},
                   {"metric", job.bench->metric_name},
                   {"localized", localized},
                   {"n_features", features.cols()}};
    if (job.bench->metric == Metric::linear_predictivity) {
      // Fold score = mean over subjects that scored the fold.
      std::map<int, std::pair<double, int>> by_fold;
      json subjects = json::array();
      PredictivityOptions opts;
      opts.groups = &plan.groups;
      for (const auto& subj : bench.neural.subjects) {
        const auto r = linear_predictivity(features, subj.matrix, ids, plan.spec, cfg_.ridge, opts);
        for (std::size_t f = 0; f < r.scored_folds.size(); ++f) {
          auto& acc = by_fold[r.scored_folds[f]];
          acc.first += r.per_fold_r[f];
          acc.second += 1;
        }
        subjects.push_back({{"subject_id", subj.subject_id},
                            {"mean_r", r.mean_r},
                            {"per_fold_r", r.per_fold_r},
                            {"scored_folds", r.scored_folds},
                            {"degenerate_folds", r.degenerate_folds},
                            {"fold_lambda", r.fold_lambda},
                            {"degenerate_units", r.degenerate_units}});
      }
      std::vector<int> folds;
      for (const auto& [f, acc] : by_fold) {
        folds.push_back(f);
        per_fold.push_back(acc.first / acc.second);
      }
      detail["subjects"] = subjects;
      detail["scored_folds"] = folds;
    } else {
      double sum = 0.0;
      json subjects = json::array();
      for (const auto& subj : bench.neural.subjects) {
        const double v = job.bench->metric == Metric::cka
                             ? cka(features, subj.matrix)
                             : rsa_score(rdm_compute(features, ids), rdm_compute(subj.matrix, ids));
        subjects.push_back({{"subject_id", subj.subject_id}, {"value", v}});
        sum += v;
      }
      per_fold.push_back(sum / static_cast<double>(bench.neural.subjects.size()));
      detail["subjects"] = subjects;
    }
    auto score = AlignmentScore::from_folds(job.bench->id, job.model->model_id, job.ckpt->tokens, per_fold,
                                            ceiling_of.at(job.bench->id));
    detail["per_fold_r"] = score.per_fold_r;
    detail["raw_r"] = score.raw_r;
    detail["ceiling"] = score.ceiling;
    detail["normalized"] = score.normalized;
    outcomes[i] = {std::move(score), std::move(detail)};
  });

  std::ostringstream csv_out;
  csv_out << "# config_digest=" << cfg_.digest << " seed=" << cfg_.seed << "\n";
  csv_out << "benchmark_id,model_id,checkpoint_tokens,raw_r,ceiling,normalized,n_folds\n";
  json details = json::array();
  for (const auto& o : outcomes) {
    const auto& s = o.score;
    csv_out << s.benchmark_id << ',' << s.model_id << ',' << s.checkpoint_tokens << ',' << format_double(s.raw_r) << ','
            << format_double(s.ceiling) << ',' << format_double(s.normalized) << ',' << s.n_folds << "\n";
    details.push_back(o.detail);
  }
  return {{std::string(kScoresFile), csv_out.str()}, {"score_details.json", dump({{"scores", details}})}};
}

std::map<std::string, std::string> Runner::do_behavioral() {
  json results = json::array();
  for (const auto& b : cfg_.behavioral) {
    const auto losses = read_token_losses_csv(b.token_losses);
    const auto rts = read_reading_times_csv(b.reading_times);
    json entry = {{"model_id", b.model_id}, {"checkpoint_tokens", b.tokens}};
    try {
      const auto r = behavioral_alignment(losses, rts);
      entry["r"] = r.r;
      entry["n_words"] = r.n_words;
      entry["excluded"] = {{"unmatched", r.excluded_unmatched},
                           {"first_word", r.excluded_first_word},
                           {"text_mismatch", r.excluded_text_mismatch},
                           {"no_tokens", r.excluded_no_tokens}};
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::ScoreUndefined && e.kind() != ErrorKind::DegenerateInput) throw;
      entry["error"] = e.what();
    }
    results.push_back(entry);
  }
  return {{"behavioral.json", dump({{"results", results}})}};
}

std::map<std::string, std::string> Runner::do_analyze() {
  // Score rows: this run's scores plus any external tables.
  std::vector<ScoreRow> rows;
  std::vector<std::string> sources;
  if (!cfg_.benchmarks.empty() && !cfg_.models.empty()) {
    read_verified(std::string(kScoresFile));
    for (auto& r : parse_scores_csv(out_ / kScoresFile)) rows.push_back(std::move(r));
    sources.emplace_back(kScoresFile);
  }
  for (const auto& t : cfg_.score_tables) {
    for (auto& r : parse_scores_csv(t)) rows.push_back(std::move(r));
    sources.push_back(fs::relative(t, cfg_.base).generic_string());
  }
  {
    std::set<std::tuple<std::string, std::string, std::uint64_t>> seen;
    for (const auto& r : rows)
      if (!seen.emplace(r.benchmark_id, r.model_id, r.tokens).second)
        throw ValidationError("duplicate score row for " + r.benchmark_id + "/" + r.model_id + "@" +
                              std::to_string(r.tokens));
  }

  std::map<std::string, ModelSeries> models;
  // Brain alignment: mean within aggregate label, then mean over labels.
  std::map<std::pair<std::string, std::uint64_t>, std::map<std::string, std::vector<double>>> by_label;
  std::map<std::pair<std::string, std::uint64_t>, std::map<std::string, double>> by_benchmark;
  for (const auto& r : rows) {
    by_label[{r.model_id, r.tokens}][cfg_.aggregate_label(r.benchmark_id)].push_back(r.normalized);
    by_benchmark[{r.model_id, r.tokens}][r.benchmark_id] = r.normalized;
  }
  json aggregates = json::array();
  for (const auto& [key, labels] : by_label) {
    std::vector<double> per_label;
    json label_values = json::object();
    for (const auto& [label, values] : labels) {
      const double v = aggregate_benchmarks(std::span<const double>(values));
      per_label.push_back(v);
      label_values[label] = v;
    }
    const double agg = aggregate_benchmarks(std::span<const double>(per_label));
    models[key.first].put(std::string(series::brain_alignment), key.second, agg, "scores");
    aggregates.push_back({{"model_id", key.first},
                          {"checkpoint_tokens", key.second},
                          {"brain_alignment", agg},
                          {"benchmarks", label_values}});
  }

  if (cfg_.competence) {
    const auto& path = *cfg_.competence;
    std::map<std::tuple<std::string, std::uint64_t, std::string>, std::vector<double>> acc;
    for (const auto& r :
         csv::read(path, {"model_id", "checkpoint_tokens", "benchmark", "category", "accuracy", "chance"}))
      acc[{r[0], csv::parse_number<std::uint64_t>(r[1], path), r[3]}].push_back(
          normalize_accuracy(csv::parse_number<double>(r[4], path), csv::parse_number<double>(r[5], path)));
    for (const auto& [key, values] : acc) {
      double sum = 0.0;
      for (const double v : values) sum += v;
      models[std::get<0>(key)].put(std::get<2>(key) + "_score", std::get<1>(key), sum / static_cast<double>(values.size()),
                                   "competence");
    }
  }
  if (cfg_.series) {
    const auto& path = *cfg_.series;
    for (const auto& r : csv::read(path, {"model_id", "checkpoint_tokens", "series_id", "value"}))
      models[r[0]].put(r[2], csv::parse_number<std::uint64_t>(r[1], path), csv::parse_number<double>(r[3], path),
                       "series");
  }
  if (!cfg_.behavioral.empty()) {
    const json behavioral_json = read_artifact("behavioral.json");
    for (const auto& e : behavioral_json.at("results"))
      if (e.contains("r"))
        models[e.at("model_id").get<std::string>()].put(std::string(series::behavioral_r),
                                                        e.at("checkpoint_tokens").get<std::uint64_t>(),
                                                        e.at("r").get<double>(), "behavioral");
  }

  json series_out = json::object();
  for (const auto& [model, ms] : models)
    for (const auto& [sid, points] : ms.values) {
      json pts = json::array();
      for (const auto& [t, v] : points) pts.push_back({t, v});
      series_out[model][sid] = pts;
    }

  const json& a = cfg_.analysis;
  TrajectoryOptions topts;
  topts.seed = cfg_.seed;
  if (a.contains("trajectory")) {
    const auto& t = a.at("trajectory");
    topts.k = t.value("k", topts.k);
    topts.intercept = t.value("intercept", topts.intercept);
    topts.shuffle = t.value("shuffle", topts.shuffle);
    topts.lambda = t.value("lambda", topts.lambda);
  }
  auto fit_for = [&](const std::string& model, const std::string& predictor, const std::string& target) {
    const auto& ms = models.at(model);
    return trajectory_r2(ms.get(predictor), ms.get(target), predictor, target, topts);
  };
  auto error_entry = [](json entry, const Error& e) {
    entry["error"] = e.what();
    return entry;
  };

  json fit_specs = a.contains("fits")
                       ? a.at("fits")
                       : json::array({{{"predictor", series::formal_score}, {"target", series::brain_alignment}},
                                      {{"predictor", series::functional_score}, {"target", series::brain_alignment}}});
  json fits = json::array();
  for (const auto& spec : fit_specs) {
    const auto predictor = spec.at("predictor").get<std::string>();
    const auto target = spec.at("target").get<std::string>();
    for (const auto& [model, ms] : models) {
      if (!ms.values.count(predictor) || !ms.values.count(target)) continue;
      json entry = {{"model_id", model}};
      try {
        auto fj = fit_json(fit_for(model, predictor, target));
        fj["model_id"] = model;
        fits.push_back(fj);
      } catch (const Error& e) {
        entry["predictor"] = predictor;
        entry["target"] = target;
        fits.push_back(error_entry(entry, e));
      }
    }
  }

  json windows = json::array();
  for (const auto& w : a.value("windows", json::array())) {
    const auto x = w.at("x").get<std::string>();
    const auto y = w.at("y").get<std::string>();
    const TokenWindow win{w.at("lo").get<std::uint64_t>(), w.at("hi").get<std::uint64_t>()};
    for (const auto& [model, ms] : models) {
      if (!ms.values.count(x) || !ms.values.count(y)) continue;
      json entry = {{"name", w.value("name", std::string{})}, {"model_id", model}, {"x", x}, {"y", y},
                    {"lo", win.lo},                           {"hi", win.hi}};
      try {
        const auto t = windowed_correlation(ms.get(x), ms.get(y), win);
        entry["test"] = test_json(t);
        windows.push_back(entry);
      } catch (const Error& e) {
        windows.push_back(error_entry(entry, e));
      }
    }
  }

  json wilcoxon = json::array();
  for (const auto& w : a.value("wilcoxon", json::array())) {
    const auto sa = w.at("a").get<std::string>();
    const auto sb = w.at("b").get<std::string>();
    const auto target = w.value("target", std::string(series::brain_alignment));
    const auto pairing = w.value("pairing", std::string("fold"));
    json base = {{"name", w.value("name", std::string{})}, {"a", sa}, {"b", sb}, {"target", target}, {"pairing", pairing}};
    auto has_all = [&](const ModelSeries& ms) {
      return ms.values.count(sa) && ms.values.count(sb) && ms.values.count(target);
    };
    if (pairing == "fold") {
      for (const auto& [model, ms] : models) {
        if (!has_all(ms)) continue;
        json entry = base;
        entry["model_id"] = model;
        try {
          const auto fa = fit_for(model, sa, target);
          const auto fb = fit_for(model, sb, target);
          std::vector<double> xa, xb;
          for (std::size_t i = 0; i < fa.scored_folds.size(); ++i)
            for (std::size_t j = 0; j < fb.scored_folds.size(); ++j)
              if (fa.scored_folds[i] == fb.scored_folds[j]) {
                xa.push_back(fa.per_fold_r2[i]);
                xb.push_back(fb.per_fold_r2[j]);
              }
          entry["test"] = test_json(wilcoxon_signed_rank(xa, xb));
          wilcoxon.push_back(entry);
        } catch (const Error& e) {
          wilcoxon.push_back(error_entry(entry, e));
        }
      }
    } else if (pairing == "model") {
      json entry = base;
      try {
        std::vector<double> xa, xb;
        json used = json::array();
        for (const auto& [model, ms] : models) {
          if (!has_all(ms)) continue;
          xa.push_back(fit_for(model, sa, target).mean_r2);
          xb.push_back(fit_for(model, sb, target).mean_r2);
          used.push_back(model);
        }
        entry["models"] = used;
        entry["test"] = test_json(wilcoxon_signed_rank(xa, xb));
        wilcoxon.push_back(entry);
      } catch (const Error& e) {
        wilcoxon.push_back(error_entry(entry, e));
      }
    } else {
      throw ValidationError("wilcoxon pairing must be 'fold' or 'model', got '" + pairing + "'");
    }
  }

  json controls = json::array();
  for (const auto& c : a.value("controls", json::array())) {
    const auto bench = c.value("benchmark", std::string("all"));
    auto lookup = [&](const json& ref) -> double {
      const auto model = ref.at("model_id").get<std::string>();
      const auto tokens = ref.at("checkpoint_tokens").get<std::uint64_t>();
      if (bench == "all") {
        const auto it = models.find(model);
        if (it != models.end()) {
          const auto& s = it->second.values;
          const auto sit = s.find(std::string(series::brain_alignment));
          if (sit != s.end() && sit->second.count(tokens)) return sit->second.at(tokens);
        }
      } else {
        const auto it = by_benchmark.find({model, tokens});
        if (it != by_benchmark.end() && it->second.count(bench)) return it->second.at(bench);
      }
      throw ValidationError("control comparison: no score for " + model + "@" + std::to_string(tokens) + " on " + bench);
    };
    json entry = {{"benchmark", bench}};
    try {
      std::vector<double> random_scores;
      for (const auto& r : c.at("random_token")) random_scores.push_back(lookup(r));
      const auto rep = control_comparison(lookup(c.at("pretrained")), random_scores, lookup(c.at("untrained")));
      entry["pretrained"] = rep.pretrained;
      entry["random_token_scores"] = random_scores;
      entry["random_mean"] = rep.random_mean;
      entry["untrained"] = rep.untrained;
      entry["pretrained_above_random"] = rep.pretrained_above_random;
      entry["untrained_above_random"] = rep.untrained_above_random;
      entry["untrained_ratio"] = rep.untrained_ratio ? json(*rep.untrained_ratio) : json(nullptr);
      entry["warnings"] = rep.warnings;
      controls.push_back(entry);
    } catch (const Error& e) {
      controls.push_back(error_entry(entry, e));
    }
  }

  json out = {{"score_sources", sources}, {"aggregates", aggregates}, {"series", series_out},
              {"trajectory_options", {{"k", topts.k}, {"lambda", topts.lambda}, {"intercept", topts.intercept},
                                      {"shuffle", topts.shuffle}}},
              {"fits", fits},           {"windows", windows},       {"wilcoxon", wilcoxon},
              {"controls", controls}};
  return {{"analysis_report.json", dump(out)}};
}

}  // namespace

RunReport execute(Stage stage, const RunOptions& options) {
  Runner runner(options);
  return runner.run(stage);
}

}  // namespace brainalign::pipeline
