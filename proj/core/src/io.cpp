#include "brainalign/io.hpp"

#include <spdlog/spdlog.h>

#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "brainalign/errors.hpp"
#include "brainalign/npy.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace brainalign {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInputError(path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& path, std::string_view contents) {
  static std::atomic<unsigned> counter{0};
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()) % 100000) + "_" +
         std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

namespace {

json parse_json_file(const fs::path& path) {
  const auto text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void check_schema_version(const json& j, const fs::path& path) {
  if (!j.is_object() || !j.contains("schema_version") || !j["schema_version"].is_number_integer())
    throw FormatError(path.string() + ": missing integer schema_version");
  if (j["schema_version"].get<int>() != kSchemaVersion)
    throw FormatError(path.string() + ": unsupported schema_version " + j["schema_version"].dump());
}

template <typename T>
T field(const json& j, const char* key, const fs::path& path) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": field '" + key + "': " + e.what());
  }
}

// Drops all-NaN columns; rejects partial NaN and infinities.
Matrix clean_units(const Matrix& raw, const std::string& subject_id, std::size_t& dropped) {
  std::vector<Index> keep;
  dropped = 0;
  for (Index c = 0; c < raw.cols(); ++c) {
    Index nan_count = 0;
    for (Index r = 0; r < raw.rows(); ++r) {
      const double v = raw(r, c);
      if (std::isnan(v)) {
        ++nan_count;
      } else if (!std::isfinite(v)) {
        throw ValidationError("subject '" + subject_id + "' unit " + std::to_string(c) + " contains Inf");
      }
    }
    if (nan_count == 0) {
      keep.push_back(c);
    } else if (nan_count == raw.rows()) {
      ++dropped;
    } else {
      throw ValidationError("subject '" + subject_id + "' unit " + std::to_string(c) + " is partially NaN (" +
                            std::to_string(nan_count) + " of " + std::to_string(raw.rows()) + " rows)");
    }
  }
  Matrix out(raw.rows(), static_cast<Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) out.col(static_cast<Index>(i)) = raw.col(keep[i]);
  return out;
}

}  // namespace

Benchmark load_benchmark(const fs::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  if (!fs::exists(manifest_path)) throw FormatError("missing manifest: " + manifest_path.string());
  const json m = parse_json_file(manifest_path);
  check_schema_version(m, manifest_path);

  Benchmark b;
  b.benchmark_id = field<std::string>(m, "benchmark_id", manifest_path);
  b.stimuli.presentation = parse_presentation(field<std::string>(m, "presentation", manifest_path));
  b.stimuli.description = m.value("description", std::string{});
  for (const auto& s : field<json>(m, "stimuli", manifest_path)) {
    Stimulus st;
    st.stimulus_id = field<std::string>(s, "stimulus_id", manifest_path);
    st.text = field<std::string>(s, "text", manifest_path);
    st.group = field<std::string>(s, "group", manifest_path);
    st.position = field<int>(s, "position", manifest_path);
    b.stimuli.stimuli.push_back(std::move(st));
  }
  b.stimuli.validate();

  b.neural.benchmark_id = b.benchmark_id;
  b.neural.modality = parse_modality(field<std::string>(m, "modality", manifest_path));
  b.neural.stimulus_ids = b.stimuli.ids();
  b.neural.groups = b.stimuli.groups();
  if (m.contains("units_meta")) b.neural.units_meta = m["units_meta"].get<std::vector<std::string>>();

  for (const auto& s : field<json>(m, "subjects", manifest_path)) {
    SubjectResponses subj;
    subj.subject_id = field<std::string>(s, "subject_id", manifest_path);
    const auto matrix_path = dir / field<std::string>(s, "matrix_file", manifest_path);
    const Matrix raw = npy::read_matrix(matrix_path);
    if (raw.rows() != static_cast<Index>(b.neural.stimulus_ids.size())) {
      throw ShapeError("subject '" + subj.subject_id + "' matrix has " + std::to_string(raw.rows()) +
                       " rows but the manifest lists " + std::to_string(b.neural.stimulus_ids.size()) + " stimuli");
    }
    subj.matrix = clean_units(raw, subj.subject_id, subj.dropped_units);
    if (subj.dropped_units > 0) {
      spdlog::info("{}: subject {} dropped {} all-NaN unit(s)", b.benchmark_id, subj.subject_id, subj.dropped_units);
    }
    if (subj.matrix.cols() == 0) throw ValidationError("subject '" + subj.subject_id + "' has no usable units");
    b.neural.subjects.push_back(std::move(subj));
  }
  b.neural.validate();
  return b;
}

void write_benchmark(const fs::path& dir, const StimulusSet& stimuli, const NeuralDataset& neural) {
  fs::create_directories(dir);
  json stim = json::array();
  for (const auto& s : stimuli.stimuli)
    stim.push_back({{"stimulus_id", s.stimulus_id}, {"text", s.text}, {"group", s.group}, {"position", s.position}});
  json subjects = json::array();
  for (const auto& s : neural.subjects) {
    const std::string file = "subject_" + s.subject_id + ".npy";
    npy::write_matrix(dir / file, s.matrix);
    subjects.push_back({{"subject_id", s.subject_id}, {"matrix_file", file}});
  }
  json m = {{"schema_version", kSchemaVersion},
            {"benchmark_id", neural.benchmark_id},
            {"modality", to_string(neural.modality)},
            {"presentation", to_string(stimuli.presentation)},
            {"description", stimuli.description},
            {"stimuli", stim},
            {"subjects", subjects}};
  write_file_atomic(dir / "manifest.json", m.dump(2) + "\n");
}

ActivationSet read_activations(const fs::path& sidecar) {
  const json j = parse_json_file(sidecar);
  check_schema_version(j, sidecar);
  ActivationSet a;
  a.model_id = field<std::string>(j, "model_id", sidecar);
  a.checkpoint_tokens = field<std::uint64_t>(j, "checkpoint_tokens", sidecar);
  a.layer_tag = field<std::string>(j, "layer_tag", sidecar);
  if (j.contains("seed") && !j["seed"].is_null()) a.seed = j["seed"].get<std::int64_t>();
  a.stimulus_ids = field<std::vector<std::string>>(j, "stimulus_order", sidecar);
  a.matrix = npy::read_matrix(sidecar.parent_path() / field<std::string>(j, "matrix_file", sidecar));
  a.validate();
  return a;
}

fs::path write_activations(const fs::path& dir, std::string_view stem, const ActivationSet& acts) {
  fs::create_directories(dir);
  const std::string npy_name = std::string(stem) + ".npy";
  npy::write_matrix(dir / npy_name, acts.matrix);
  json j = {{"schema_version", kSchemaVersion},
            {"model_id", acts.model_id},
            {"checkpoint_tokens", acts.checkpoint_tokens},
            {"layer_tag", acts.layer_tag},
            {"seed", acts.seed ? json(*acts.seed) : json(nullptr)},
            {"stimulus_order", acts.stimulus_ids},
            {"matrix_file", npy_name}};
  const auto sidecar = dir / (std::string(stem) + ".json");
  write_file_atomic(sidecar, j.dump(2) + "\n");
  return sidecar;
}

}  // namespace brainalign
