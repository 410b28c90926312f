#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <set>

#include "brainalign/ceiling.hpp"
#include "brainalign/errors.hpp"
#include "brainalign/localizer.hpp"
#include "brainalign/splits.hpp"
#include "brainalign/synthetic.hpp"
#include "json.hpp"

using namespace brainalign;

namespace {

NeuralDataset dataset_from(const std::vector<Matrix>& subjects) {
  NeuralDataset d;
  d.benchmark_id = "b";
  const auto n = subjects.front().rows();
  for (Index i = 0; i < n; ++i) {
    d.stimulus_ids.push_back("x" + std::to_string(i));
    d.groups[d.stimulus_ids.back()] = "g" + std::to_string(i / 5);
  }
  for (std::size_t s = 0; s < subjects.size(); ++s) d.subjects.push_back({"sub" + std::to_string(s), subjects[s], 0});
  return d;
}

}  // namespace

TEST(Ceiling, IdenticalSubjectsAreFullyConsistent) {
  Rng rng(1);
  const Matrix m = synthetic::gaussian(60, 6, rng);
  const auto d = dataset_from({m, m, m});
  const auto folds = make_grouped_folds(d.groups, 5, 0);
  const auto ids = d.subject_ids();
  EXPECT_NEAR(subject_consistency(d, folds, RidgeConfig{}, ids), 1.0, 1e-9);
}

TEST(Ceiling, IndependentSubjectsAreNearZero) {
  Rng rng(2);
  const auto d = dataset_from({synthetic::gaussian(80, 5, rng), synthetic::gaussian(80, 5, rng),
                               synthetic::gaussian(80, 5, rng)});
  const auto folds = make_grouped_folds(d.groups, 8, 0);
  const auto ids = d.subject_ids();
  EXPECT_LT(std::abs(subject_consistency(d, folds, RidgeConfig{}, ids)), 0.15);
  const std::vector<std::string> one{"sub0"};
  EXPECT_THROW(subject_consistency(d, folds, RidgeConfig{}, one), ValidationError);
}

TEST(Ceiling, SaturationFitRecoversParameters) {
  std::vector<PoolPoint> curve;
  for (int s = 2; s <= 10; ++s) curve.push_back({s, 0.6 * s / (s + 2.5)});
  const auto fit = fit_saturation_curve(curve);
  EXPECT_NEAR(fit.v_inf, 0.6, 1e-6);
  EXPECT_NEAR(fit.tau, 2.5, 1e-4);
  EXPECT_LT(fit.sse, 1e-12);
}

TEST(Ceiling, SaturationFitFailures) {
  const std::vector<PoolPoint> single{{2, 0.3}};
  EXPECT_THROW(fit_saturation_curve(single), FitError);
  const std::vector<PoolPoint> nan{{2, 0.3}, {3, std::nan("")}};
  EXPECT_THROW(fit_saturation_curve(nan), FitError);
  const std::vector<PoolPoint> negative{{2, -0.3}, {3, -0.4}, {4, -0.45}};
  EXPECT_THROW(fit_saturation_curve(negative), FitError);
}

TEST(Ceiling, ExtrapolationFromScorer) {
  std::vector<std::string> subjects;
  for (int i = 0; i < 8; ++i) subjects.push_back("s" + std::to_string(i));
  const PoolScorer scorer = [](const std::vector<std::string>& pool) {
    const double s = static_cast<double>(pool.size());
    return 0.5 * s / (s + 3.0);
  };
  const auto est = extrapolate_ceiling("b", subjects, scorer, 4, 11);
  EXPECT_EQ(est.method, CeilingMethod::extrapolated);
  EXPECT_NEAR(est.v_inf, 0.5, 1e-4);
  ASSERT_TRUE(est.tau.has_value());
  EXPECT_NEAR(*est.tau, 3.0, 1e-2);
  EXPECT_EQ(est.pool_curve.size(), 7u);
  EXPECT_EQ(est.pool_curve.front().pool_size, 2);
  EXPECT_EQ(CeilingEstimate::from_json(est.to_json()), est);
}

TEST(Ceiling, TwoSubjectsFallBackToFixed) {
  const std::vector<std::string> subjects{"a", "b"};
  const auto est = extrapolate_ceiling("b", subjects, [](const auto&) { return 0.4; }, 5, 0);
  EXPECT_EQ(est.method, CeilingMethod::fixed);
  EXPECT_EQ(est.v_inf, 0.4);
  EXPECT_FALSE(est.tau.has_value());
  EXPECT_TRUE(nlohmann::json::parse(est.to_json()).at("without_extrapolation").get<bool>());
  EXPECT_TRUE(nlohmann::json::parse(est.to_json()).at("tau").is_null());
}

TEST(Ceiling, SyntheticBenchmark) {
  synthetic::BenchmarkSpec spec;
  spec.n_subjects = 5;
  spec.noise_sd = 0.8;
  spec.seed = 3;
  const auto gen = synthetic::make_benchmark(spec);
  const auto& neural = gen.benchmark.neural;
  const auto folds = make_grouped_folds(neural.groups, 6, 0);
  const auto ext = extrapolate_ceiling(neural, folds, RidgeConfig{}, 3, 1);
  const auto fix = fixed_ceiling(neural, folds, RidgeConfig{}, 1);
  EXPECT_EQ(ext.method, CeilingMethod::extrapolated);
  EXPECT_GE(ext.v_inf, fix.v_inf - 0.05);
  EXPECT_GT(fix.v_inf, 0.2);
  EXPECT_EQ(extrapolate_ceiling(neural, folds, RidgeConfig{}, 3, 1, 3), ext);
}

TEST(Ceiling, Theoretical) {
  const auto est = theoretical_ceiling("b", 0.559);
  EXPECT_EQ(est.method, CeilingMethod::theoretical);
  EXPECT_EQ(est.value(), 0.559);
  EXPECT_THROW(theoretical_ceiling("b", 0.0), ValidationError);
  EXPECT_THROW(parse_ceiling_method("median"), ValidationError);
}

// ---------------------------------------------------------------------------

TEST(Localizer, ContrastSigns) {
  Matrix s(3, 3), n(3, 3);
  s << 1, 0, 0,
       1, 0, 1,
       1, 0, 2;
  n << 0, 0, 0,
       0, 0, 1,
       0, 0, 2;
  const Vector t = t_contrast(s, n);
  EXPECT_EQ(t(0), std::numeric_limits<double>::infinity());
  EXPECT_EQ(t(1), 0.0);
  EXPECT_EQ(t(2), 0.0);
  const Vector neg = t_contrast(n, s);
  EXPECT_EQ(neg(0), -std::numeric_limits<double>::infinity());
}

TEST(Localizer, WelchValue) {
  Matrix s(2, 1), n(2, 1);
  s << 1, 3;  // mean 2, var 2
  n << 0, 2;  // mean 1, var 2
  EXPECT_NEAR(t_contrast(s, n)(0), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_THROW(t_contrast(s.topRows(1), n), ValidationError);
  EXPECT_THROW(t_contrast(s, Matrix::Zero(2, 2)), ShapeError);
}

TEST(Localizer, SelectionOrderAndLimits) {
  Rng rng(4);
  std::vector<LayerContrast> layers;
  for (int l = 0; l < 2; ++l) {
    LayerContrast c{"L" + std::to_string(l), synthetic::gaussian(10, 5, rng), synthetic::gaussian(10, 5, rng)};
    c.sentences.col(l + 1).array() += 5.0;
    layers.push_back(c);
  }
  const auto r = select_units(layers, 2);
  ASSERT_EQ(r.selected_units.size(), 2u);
  std::set<std::pair<std::string, Index>> got;
  for (const auto& u : r.selected_units) got.insert({u.layer_tag, u.unit_index});
  EXPECT_EQ(got, (std::set<std::pair<std::string, Index>>{{"L0", 1}, {"L1", 2}}));
  EXPECT_GE(r.selected_units[0].t, r.selected_units[1].t);

  const auto all = select_units(layers, 10);
  EXPECT_EQ(all.selected_units.size(), 10u);
  for (std::size_t i = 1; i < all.selected_units.size(); ++i)
    EXPECT_GE(all.selected_units[i - 1].t, all.selected_units[i].t);
  EXPECT_THROW(select_units(layers, 11), ValidationError);
  EXPECT_THROW(select_units(layers, 0), ValidationError);

  const auto per_layer = select_units(layers, 3, true);
  int from_l0 = 0;
  for (const auto& u : per_layer.selected_units) from_l0 += u.layer_tag == "L0";
  EXPECT_EQ(from_l0, 2);
}

TEST(Localizer, ApplySelectionAndJson) {
  std::vector<ActivationSet> stack(2);
  for (int l = 0; l < 2; ++l) {
    stack[l].matrix = Matrix::Zero(3, 4);
    for (Index c = 0; c < 4; ++c) stack[l].matrix.col(c).setConstant(10.0 * l + c);
    stack[l].stimulus_ids = {"a", "b", "c"};
    stack[l].layer_tag = "L" + std::to_string(l);
    stack[l].model_id = "m";
  }
  LocalizerResult sel;
  sel.k = 2;
  sel.selected_units = {{"L1", 3, 2.0}, {"L0", 0, 1.0}};
  const auto out = apply_selection(stack, sel);
  ASSERT_EQ(out.matrix.cols(), 2);
  EXPECT_EQ(out.matrix(0, 0), 13.0);
  EXPECT_EQ(out.matrix(2, 1), 0.0);
  EXPECT_EQ(out.stimulus_ids, stack[0].stimulus_ids);

  sel.selected_units[0].unit_index = 4;
  EXPECT_THROW(apply_selection(stack, sel), ValidationError);
  sel.selected_units[0] = {"L9", 0, 2.0};
  EXPECT_THROW(apply_selection(stack, sel), ValidationError);

  LocalizerResult r;
  r.model_id = "m";
  r.checkpoint_tokens = 42;
  r.k = 2;
  r.stimuli_digest = "abc";
  Vector t(3);
  t << std::numeric_limits<double>::infinity(), -0.5, 0.25;
  r.t_values = {{"L0", t}};
  r.selected_units = {{"L0", 0, t(0)}, {"L0", 2, 0.25}};
  const auto back = LocalizerResult::from_json(r.to_json());
  EXPECT_EQ(back.selected_units, r.selected_units);
  EXPECT_EQ(back.checkpoint_tokens, 42u);
  ASSERT_EQ(back.t_values.size(), 1u);
  EXPECT_EQ(back.t_values[0].t, t);
}
