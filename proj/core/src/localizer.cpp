#include "brainalign/localizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "brainalign/errors.hpp"
#include "json.hpp"

namespace brainalign {

using nlohmann::json;

Vector t_contrast(const Matrix& sentences, const Matrix& nonwords) {
  if (sentences.cols() != nonwords.cols())
    throw ShapeError("t_contrast: sentence and nonword activations have different unit counts");
  if (sentences.rows() < 2 || nonwords.rows() < 2)
    throw ValidationError("t_contrast: need at least 2 stimuli per condition");
  const double ns = static_cast<double>(sentences.rows());
  const double nn = static_cast<double>(nonwords.rows());
  Vector t(sentences.cols());
  for (Index u = 0; u < sentences.cols(); ++u) {
    const double ms = sentences.col(u).mean();
    const double mn = nonwords.col(u).mean();
    const double vs = (sentences.col(u).array() - ms).square().sum() / (ns - 1.0);
    const double vn = (nonwords.col(u).array() - mn).square().sum() / (nn - 1.0);
    const double se2 = vs / ns + vn / nn;
    const double diff = ms - mn;
    if (se2 > 0.0) {
      t(u) = diff / std::sqrt(se2);
    } else if (diff > 0.0) {
      t(u) = std::numeric_limits<double>::infinity();
    } else if (diff < 0.0) {
      t(u) = -std::numeric_limits<double>::infinity();
    } else {
      t(u) = 0.0;
    }
  }
  return t;
}

namespace {

struct Candidate {
  std::size_t layer;
  Index unit;
  double t;
};

bool ranks_before(const Candidate& a, const Candidate& b) {
  if (a.t != b.t) return a.t > b.t;
  if (a.layer != b.layer) return a.layer < b.layer;
  return a.unit < b.unit;
}

}  // namespace

LocalizerResult select_units(const std::vector<LayerContrast>& layers, int k, bool per_layer) {
  if (layers.empty()) throw ValidationError("select_units: no candidate layers");
  if (k < 1) throw ValidationError("select_units: k must be >= 1");

  LocalizerResult result;
  result.k = k;
  std::vector<Candidate> all;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Vector t = t_contrast(layers[l].sentences, layers[l].nonwords);
    for (Index u = 0; u < t.size(); ++u) all.push_back({l, u, t(u)});
    result.t_values.push_back({layers[l].layer_tag, std::move(t)});
  }
  if (static_cast<std::size_t>(k) > all.size()) {
    throw ValidationError("select_units: k=" + std::to_string(k) + " exceeds the " + std::to_string(all.size()) +
                          " candidate units");
  }
  std::sort(all.begin(), all.end(), ranks_before);

  std::vector<Candidate> chosen;
  if (!per_layer) {
    chosen.assign(all.begin(), all.begin() + k);
  } else {
    const std::size_t n_layers = layers.size();
    std::vector<std::size_t> quota(n_layers, static_cast<std::size_t>(k) / n_layers);
    for (std::size_t l = 0; l < static_cast<std::size_t>(k) % n_layers; ++l) ++quota[l];
    std::vector<bool> taken(all.size(), false);
    for (std::size_t i = 0; i < all.size(); ++i) {
      auto& q = quota[all[i].layer];
      if (q > 0) {
        --q;
        taken[i] = true;
        chosen.push_back(all[i]);
      }
    }
    // Layers too small for their share: fill from the global ranking.
    for (std::size_t i = 0; i < all.size() && chosen.size() < static_cast<std::size_t>(k); ++i) {
      if (!taken[i]) chosen.push_back(all[i]);
    }
    std::sort(chosen.begin(), chosen.end(), ranks_before);
  }
  for (const auto& c : chosen) result.selected_units.push_back({layers[c.layer].layer_tag, c.unit, c.t});
  return result;
}

ActivationSet apply_selection(const std::vector<ActivationSet>& stack, const LocalizerResult& selection) {
  if (stack.empty()) throw ValidationError("apply_selection: empty activation stack");
  for (const auto& a : stack) {
    a.validate();
    if (a.stimulus_ids != stack.front().stimulus_ids)
      throw ValidationError("apply_selection: layers disagree on stimulus order");
  }
  ActivationSet out;
  out.stimulus_ids = stack.front().stimulus_ids;
  out.model_id = stack.front().model_id;
  out.checkpoint_tokens = stack.front().checkpoint_tokens;
  out.seed = stack.front().seed;
  out.layer_tag = "localized";
  out.matrix.resize(static_cast<Index>(out.stimulus_ids.size()), static_cast<Index>(selection.selected_units.size()));
  for (std::size_t i = 0; i < selection.selected_units.size(); ++i) {
    const auto& ref = selection.selected_units[i];
    const auto it = std::find_if(stack.begin(), stack.end(), [&](const auto& a) { return a.layer_tag == ref.layer_tag; });
    if (it == stack.end()) throw ValidationError("apply_selection: layer '" + ref.layer_tag + "' is not in the stack");
    if (ref.unit_index < 0 || ref.unit_index >= it->matrix.cols())
      throw ValidationError("apply_selection: unit " + std::to_string(ref.unit_index) + " out of range for layer '" +
                            ref.layer_tag + "'");
    out.matrix.col(static_cast<Index>(i)) = it->matrix.col(ref.unit_index);
  }
  return out;
}

namespace {

json t_to_json(double t) {
  if (std::isinf(t)) return t > 0 ? "inf" : "-inf";
  return t;
}

double t_from_json(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw FormatError("localizer.json: bad t value '" + s + "'");
  }
  return j.get<double>();
}

}  // namespace

std::string LocalizerResult::to_json() const {
  json units = json::array();
  for (const auto& u : selected_units)
    units.push_back({{"layer_tag", u.layer_tag}, {"unit_index", u.unit_index}, {"t", t_to_json(u.t)}});
  json layers = json::array();
  for (const auto& l : t_values) {
    json t = json::array();
    for (const double v : l.t) t.push_back(t_to_json(v));
    layers.push_back({{"layer_tag", l.layer_tag}, {"units", l.t.size()}, {"t", t}});
  }
  const json j = {{"model_id", model_id},
                  {"checkpoint_tokens", checkpoint_tokens},
                  {"k", k},
                  {"layers", layers},
                  {"selected_units", units},
                  {"stimuli_digest", stimuli_digest}};
  return j.dump(2);
}

LocalizerResult LocalizerResult::from_json(std::string_view text) {
  LocalizerResult r;
  try {
    const auto j = json::parse(text);
    r.model_id = j.at("model_id").get<std::string>();
    r.checkpoint_tokens = j.value("checkpoint_tokens", std::uint64_t{0});
    r.k = j.at("k").get<int>();
    r.stimuli_digest = j.value("stimuli_digest", std::string{});
    for (const auto& l : j.value("layers", json::array())) {
      LayerT lt{l.at("layer_tag").get<std::string>(), Vector(l.at("units").get<Index>())};
      if (l.contains("t")) {
        const auto& t = l.at("t");
        if (static_cast<Index>(t.size()) != lt.t.size()) throw FormatError("localizer.json: t length != units");
        for (std::size_t i = 0; i < t.size(); ++i) lt.t(static_cast<Index>(i)) = t_from_json(t[i]);
      } else {
        lt.t.setConstant(std::numeric_limits<double>::quiet_NaN());
      }
      r.t_values.push_back(std::move(lt));
    }
    for (const auto& u : j.at("selected_units"))
      r.selected_units.push_back({u.at("layer_tag").get<std::string>(), u.at("unit_index").get<Index>(), t_from_json(u.at("t"))});
  } catch (const json::exception& e) {
    throw FormatError(std::string("localizer.json: ") + e.what());
  }
  if (static_cast<int>(r.selected_units.size()) != r.k) throw FormatError("localizer.json: selected_units length != k");
  return r;
}

}  // namespace brainalign
