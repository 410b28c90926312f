#include "brainalign/ceiling.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "brainalign/errors.hpp"
#include "brainalign/parallel.hpp"
#include "brainalign/random.hpp"
#include "json.hpp"

namespace brainalign {

using nlohmann::json;

std::string_view to_string(CeilingMethod m) noexcept {
  switch (m) {
    case CeilingMethod::extrapolated: return "extrapolated";
    case CeilingMethod::fixed: return "fixed";
    case CeilingMethod::theoretical: return "theoretical";
  }
  return "extrapolated";
}

CeilingMethod parse_ceiling_method(std::string_view s) {
  if (s == "extrapolated") return CeilingMethod::extrapolated;
  if (s == "fixed") return CeilingMethod::fixed;
  if (s == "theoretical") return CeilingMethod::theoretical;
  throw ValidationError("unknown ceiling method '" + std::string(s) + "'");
}

std::string CeilingEstimate::to_json() const {
  json curve = json::array();
  for (const auto& p : pool_curve) curve.push_back({{"pool_size", p.pool_size}, {"mean_r", p.mean_r}});
  const json j = {{"benchmark_id", benchmark_id},
                  {"method", to_string(method)},
                  {"v_inf", v_inf},
                  {"tau", tau ? json(*tau) : json(nullptr)},
                  {"without_extrapolation", method != CeilingMethod::extrapolated},
                  {"pool_curve", curve},
                  {"seed", seed},
                  {"draws", draws}};
  return j.dump(2);
}

CeilingEstimate CeilingEstimate::from_json(std::string_view text) {
  CeilingEstimate c;
  try {
    const auto j = json::parse(text);
    c.benchmark_id = j.at("benchmark_id").get<std::string>();
    c.method = parse_ceiling_method(j.at("method").get<std::string>());
    c.v_inf = j.at("v_inf").get<double>();
    if (!j.at("tau").is_null()) c.tau = j["tau"].get<double>();
    for (const auto& p : j.at("pool_curve")) c.pool_curve.push_back({p.at("pool_size").get<int>(), p.at("mean_r").get<double>()});
    c.seed = j.at("seed").get<std::uint64_t>();
    c.draws = j.at("draws").get<int>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("ceiling.json: ") + e.what());
  }
  return c;
}

double subject_consistency(const NeuralDataset& neural, const FoldSpec& stimulus_folds, const RidgeConfig& cfg,
                           std::span<const std::string> pool, const PredictivityOptions& opts) {
  if (pool.size() < 2) throw ValidationError("subject_consistency: pool needs at least 2 subjects");
  double total = 0.0;
  for (const auto& held_out : pool) {
    Index cols = 0;
    for (const auto& id : pool)
      if (id != held_out) cols += neural.subject(id).matrix.cols();
    Matrix predictors(static_cast<Index>(neural.stimulus_ids.size()), cols);
    Index at = 0;
    for (const auto& id : pool) {
      if (id == held_out) continue;
      const auto& m = neural.subject(id).matrix;
      predictors.middleCols(at, m.cols()) = m;
      at += m.cols();
    }
    const auto result = linear_predictivity(predictors, neural.subject(held_out).matrix, neural.stimulus_ids,
                                            stimulus_folds, cfg, opts);
    total += result.mean_r;
  }
  return total / static_cast<double>(pool.size());
}

namespace {

double curve_value(double v_inf, double tau, double s) { return v_inf * s / (s + tau); }

// Best asymptote for a fixed tau (closed form, clipped to the search box).
std::pair<double, double> solve_for_tau(std::span<const PoolPoint> curve, double tau) {
  double fy = 0.0, ff = 0.0;
  for (const auto& p : curve) {
    const double f = p.pool_size / (p.pool_size + tau);
    fy += f * p.mean_r;
    ff += f * f;
  }
  const double v = std::clamp(fy / ff, 0.0, 1.5);
  double sse = 0.0;
  for (const auto& p : curve) {
    const double e = p.mean_r - curve_value(v, tau, p.pool_size);
    sse += e * e;
  }
  return {v, sse};
}

std::string describe(std::span<const PoolPoint> curve) {
  std::string out;
  for (const auto& p : curve) out += " (" + std::to_string(p.pool_size) + ", " + std::to_string(p.mean_r) + ")";
  return out;
}

}  // namespace

SaturationFit fit_saturation_curve(std::span<const PoolPoint> curve) {
  if (curve.size() < 2) throw FitError("ceiling fit needs at least 2 pool sizes; curve:" + describe(curve));
  for (const auto& p : curve)
    if (!std::isfinite(p.mean_r) || p.pool_size < 1) throw FitError("non-finite pool curve:" + describe(curve));

  constexpr double kTauMin = 0.1, kTauMax = 50.0;
  constexpr int kGrid = 400;
  const double log_lo = std::log(kTauMin), log_hi = std::log(kTauMax);
  const double step = (log_hi - log_lo) / (kGrid - 1);
  int best = 0;
  double best_sse = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kGrid; ++i) {
    const double sse = solve_for_tau(curve, std::exp(log_lo + step * i)).second;
    if (sse < best_sse) {
      best_sse = sse;
      best = i;
    }
  }

  // Golden-section search in log(tau) over the bracketing grid cells.
  double a = log_lo + step * std::max(0, best - 1);
  double b = log_lo + step * std::min(kGrid - 1, best + 1);
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a), d = a + invphi * (b - a);
  auto objective = [&](double lt) { return solve_for_tau(curve, std::exp(lt)).second; };
  double fc = objective(c), fd = objective(d);
  for (int it = 0; it < 200 && (b - a) > 1e-12; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = objective(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = objective(d);
    }
  }
  double log_tau = (a + b) / 2.0;
  if (objective(log_tau) > best_sse) log_tau = log_lo + step * best;

  SaturationFit fit;
  fit.tau = std::exp(log_tau);
  std::tie(fit.v_inf, fit.sse) = solve_for_tau(curve, fit.tau);
  if (!std::isfinite(fit.v_inf) || fit.v_inf <= 0.0)
    throw FitError("ceiling fit produced a non-positive asymptote; curve:" + describe(curve));
  double max_r = -std::numeric_limits<double>::infinity();
  for (const auto& p : curve) max_r = std::max(max_r, p.mean_r);
  if (fit.v_inf < max_r - 0.05)
    throw FitError("ceiling asymptote " + std::to_string(fit.v_inf) + " falls below the observed curve;" + describe(curve));
  return fit;
}

CeilingEstimate extrapolate_ceiling(std::string benchmark_id, const std::vector<std::string>& subject_ids,
                                    const PoolScorer& scorer, int draws, std::uint64_t seed, int jobs) {
  if (draws < 1) throw ValidationError("extrapolate_ceiling: draws must be >= 1");
  const auto n_subjects = subject_ids.size();
  if (n_subjects < 2) throw ValidationError("extrapolate_ceiling: need at least 2 subjects");

  CeilingEstimate est;
  est.benchmark_id = std::move(benchmark_id);
  est.seed = seed;
  est.draws = draws;

  if (n_subjects < 3) {
    spdlog::warn("{}: only {} subjects, reporting the full-pool consistency without extrapolation",
                 est.benchmark_id, n_subjects);
    est.method = CeilingMethod::fixed;
    est.v_inf = scorer(subject_ids);
    est.pool_curve.push_back({static_cast<int>(n_subjects), est.v_inf});
    if (!(est.v_inf > 0.0)) throw FitError(est.benchmark_id + ": non-positive full-pool consistency");
    return est;
  }

  // Draw pools per size, score each distinct pool once.
  std::vector<std::vector<std::vector<std::string>>> pools_by_size;
  std::map<std::vector<std::string>, std::size_t> slot_of;
  std::vector<std::vector<std::string>> unique_pools;
  for (std::size_t s = 2; s <= n_subjects; ++s) {
    Rng rng(mix_seed(seed, s));
    std::vector<std::vector<std::string>> pools;
    for (int d = 0; d < draws; ++d) {
      std::vector<std::size_t> idx(n_subjects);
      std::iota(idx.begin(), idx.end(), 0);
      rng.shuffle(idx);
      idx.resize(s);
      std::sort(idx.begin(), idx.end());
      std::vector<std::string> pool;
      for (const auto i : idx) pool.push_back(subject_ids[i]);
      if (slot_of.emplace(pool, unique_pools.size()).second) unique_pools.push_back(pool);
      pools.push_back(std::move(pool));
    }
    pools_by_size.push_back(std::move(pools));
  }

  std::vector<double> values(unique_pools.size());
  parallel_for(unique_pools.size(), jobs, [&](std::size_t i) { values[i] = scorer(unique_pools[i]); });

  for (std::size_t si = 0; si < pools_by_size.size(); ++si) {
    double sum = 0.0;
    for (const auto& pool : pools_by_size[si]) sum += values[slot_of.at(pool)];
    est.pool_curve.push_back({static_cast<int>(si + 2), sum / static_cast<double>(draws)});
  }
  const auto fit = fit_saturation_curve(est.pool_curve);
  est.method = CeilingMethod::extrapolated;
  est.v_inf = fit.v_inf;
  est.tau = fit.tau;
  return est;
}

CeilingEstimate extrapolate_ceiling(const NeuralDataset& neural, const FoldSpec& stimulus_folds,
                                    const RidgeConfig& cfg, int draws, std::uint64_t seed, int jobs) {
  PredictivityOptions opts;
  opts.groups = &neural.groups;
  const PoolScorer scorer = [&](const std::vector<std::string>& pool) {
    return subject_consistency(neural, stimulus_folds, cfg, pool, opts);
  };
  return extrapolate_ceiling(neural.benchmark_id, neural.subject_ids(), scorer, draws, seed, jobs);
}

CeilingEstimate fixed_ceiling(const NeuralDataset& neural, const FoldSpec& stimulus_folds, const RidgeConfig& cfg,
                              std::uint64_t seed, int jobs) {
  const auto ids = neural.subject_ids();
  PredictivityOptions opts;
  opts.groups = &neural.groups;
  opts.jobs = jobs;
  CeilingEstimate est;
  est.benchmark_id = neural.benchmark_id;
  est.method = CeilingMethod::fixed;
  est.seed = seed;
  est.draws = 1;
  est.v_inf = subject_consistency(neural, stimulus_folds, cfg, ids, opts);
  est.pool_curve.push_back({static_cast<int>(ids.size()), est.v_inf});
  if (!(est.v_inf > 0.0)) throw FitError(est.benchmark_id + ": non-positive full-pool consistency");
  return est;
}

CeilingEstimate theoretical_ceiling(std::string benchmark_id, double value) {
  if (!(value > 0.0) || !std::isfinite(value)) throw ValidationError("theoretical ceiling must be positive");
  CeilingEstimate est;
  est.benchmark_id = std::move(benchmark_id);
  est.method = CeilingMethod::theoretical;
  est.v_inf = value;
  return est;
}

}  // namespace brainalign
