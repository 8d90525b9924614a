#include "hawkesfeed/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "hawkesfeed/error.hpp"

namespace hawkesfeed {

std::set<FeatureSet> feature_sets_for(std::string_view variant) {
  using FS = FeatureSet;
  if (variant == "ALL") return {FS::ChrPub, FS::ChrUser, FS::RltnPub, FS::RltnUser, FS::Lng, FS::Psy};
  if (variant == "CHR") return {FS::ChrPub, FS::ChrUser};
  if (variant == "RLTN") return {FS::RltnPub, FS::RltnUser};
  if (variant == "LNG") return {FS::Lng};
  if (variant == "PSY") return {FS::Psy};
  throw ConfigError("unknown feature variant '" + std::string(variant) +
                    "' (expected ALL, CHR, RLTN, LNG or PSY)");
}

std::vector<Regularization> FitConfig::default_zeta_grid() {
  std::vector<Regularization> grid;
  for (double z : {0.0, 0.01, 0.1, 1.0, 10.0}) grid.push_back(Regularization::shared(z));
  return grid;
}

void FitConfig::validate() const {
  zeta.validate();
  for (const auto& z : zeta_grid) z.validate();
  if (!(tolerance > 0.0)) throw ConfigError("tolerance must be positive");
  if (!(gradient_tolerance >= 0.0)) throw ConfigError("gradient tolerance must be >= 0");
  if (max_iterations < 0) throw ConfigError("max_iterations must be >= 0");
  if (!(initial_value > 0.0)) throw ConfigError("initial value must be positive");
  if (!(initial_step > 0.0)) throw ConfigError("initial step must be positive");
  if (!(backtrack > 0.0 && backtrack < 1.0)) throw ConfigError("backtrack factor must be in (0,1)");
  if (!(rates.post > 0.0) || !(rates.comment > 0.0)) {
    throw ConfigError("decay rates must be positive");
  }
  if (feature_sets.empty()) throw ConfigError("no feature set enabled");
}

double projected_gradient_norm(std::span<const double> theta, std::span<const double> grad,
                               const std::vector<bool>& free) {
  double sq = 0.0;
  for (std::size_t k = 0; k < theta.size(); ++k) {
    if (!free[k]) continue;
    const double g = theta[k] > 0.0 ? grad[k] : std::min(grad[k], 0.0);
    sq += g * g;
  }
  return std::sqrt(sq);
}

namespace {

double norm2(std::span<const double> v) {
  return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

std::vector<bool> free_coordinates(const FeatureStore& store, const std::set<FeatureSet>& sets) {
  std::vector<bool> free;
  const auto add = [&](const FeatureManifest& m) {
    for (FeatureSet s : m.sets) free.push_back(sets.contains(s));
  };
  add(store.pair_manifest());
  add(store.content_manifest());
  add(store.pair_manifest());
  add(store.content_manifest());
  return free;
}

// Objective and its gradient (both of -L + w . theta) with the log floor.
struct Smooth {
  const LikelihoodWorkspace& ws;
  std::vector<double> penalty;
  double floor;

  double value(std::span<const double> theta) const {
    return -ws.log_likelihood(theta, floor) +
           std::inner_product(theta.begin(), theta.end(), penalty.begin(), 0.0);
  }
  double value_and_gradient(std::span<const double> theta, std::span<double> grad) const {
    const double L = ws.log_likelihood_and_gradient(theta, grad, floor);
    for (std::size_t k = 0; k < grad.size(); ++k) grad[k] = penalty[k] - grad[k];
    return -L + std::inner_product(theta.begin(), theta.end(), penalty.begin(), 0.0);
  }
};

}  // namespace

FitResult fit(std::span<const Cascade> cascades, const FeatureStore& store,
              std::span<const UserId> users, const FitConfig& config) {
  config.validate();
  const LikelihoodWorkspace ws(cascades, store, users, config.rates);
  return fit(ws, store, config);
}

constexpr std::size_t kStallWindow = 10;

FitResult fit(const LikelihoodWorkspace& ws, const FeatureStore& store, const FitConfig& config) {
  config.validate();
  if (ws.event_count() == 0) {
    throw EstimationError("no comments in the training cascades: nothing to estimate from");
  }
  if (ws.pair_dim() != store.pair_dim() || ws.content_dim() != store.content_dim()) {
    throw ConfigError("workspace and feature store disagree on dimensions");
  }
  const std::size_t n = ws.dimension();
  const std::vector<bool> free = free_coordinates(store, config.feature_sets);
  const Smooth f{ws, ws.penalty_weights(config.zeta), config.log_floor};

  std::vector<double> theta(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) theta[k] = free[k] ? config.initial_value : 0.0;

  std::vector<double> grad(n);
  double value = f.value_and_gradient(theta, grad);
  if (!std::isfinite(value)) throw EstimationError("objective is not finite at the initial point");

  FitResult result;
  result.zeta = config.zeta;
  result.objective_trace.push_back(value);

  std::vector<double> candidate(n);
  std::vector<double> candidate_grad(n);
  double step = config.initial_step;
  int it = 0;
  for (; it < config.max_iterations; ++it) {
    const double pg = projected_gradient_norm(theta, grad, free);
    if (pg <= config.gradient_tolerance * (1.0 + norm2(theta))) {
      result.converged = true;
      break;
    }

    bool accepted = false;
    bool stalled = false;
    double candidate_value = value;
    for (int bt = 0; bt <= config.max_backtracks; ++bt) {
      double linear = 0.0;
      double sq = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        candidate[k] = free[k] ? std::max(0.0, theta[k] - step * grad[k]) : 0.0;
        const double d = candidate[k] - theta[k];
        linear += grad[k] * d;
        sq += d * d;
      }
      if (sq == 0.0) {
        stalled = true;
        break;
      }
      candidate_value = f.value(candidate);
      if (std::isfinite(candidate_value) &&
          candidate_value <= value + linear + sq / (2.0 * step)) {
        accepted = true;
        break;
      }
      step *= config.backtrack;
    }
    if (stalled) {
      result.converged = true;
      break;
    }
    if (!accepted) break;

    candidate_value = f.value_and_gradient(candidate, candidate_grad);
    // Barzilai-Borwein guess for the next step.
    double ss = 0.0;
    double sy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double s = candidate[k] - theta[k];
      ss += s * s;
      sy += s * (candidate_grad[k] - grad[k]);
    }
    step = sy > 0.0 ? std::clamp(ss / sy, 1e-12, 1e12) : step * 2.0;

    theta.swap(candidate);
    grad.swap(candidate_grad);
    value = candidate_value;
    result.objective_trace.push_back(value);
    // Single BB steps can be short, so judge progress over a window.
    const auto& trace = result.objective_trace;
    const std::size_t window = std::min<std::size_t>(kStallWindow, trace.size() - 1);
    const double decrease = trace[trace.size() - 1 - window] - value;
    if (window == kStallWindow && decrease <= config.tolerance * std::max(1.0, std::abs(value))) {
      ++it;
      result.converged = true;
      break;
    }
  }

  result.iterations = it;
  result.projected_gradient_norm = projected_gradient_norm(theta, grad, free);
  result.log_likelihood = ws.log_likelihood(theta);

  ModelParams params;
  params.alpha.assign(store.pair_dim(), 0.0);
  params.beta.assign(store.content_dim(), 0.0);
  params.gamma.assign(store.pair_dim(), 0.0);
  params.sigma.assign(store.content_dim(), 0.0);
  params.assign(theta);
  params.omega_mu = config.rates.post;
  params.omega_a = config.rates.comment;
  params.pair_manifest = store.pair_manifest();
  params.content_manifest = store.content_manifest();
  result.params = std::move(params);
  return result;
}

std::vector<std::vector<std::size_t>> temporal_folds(std::span<const Cascade> cascades,
                                                     std::size_t folds) {
  if (folds < 2) throw ConfigError("cross-validation needs at least 2 folds");
  if (cascades.size() < folds) {
    throw EstimationError("fewer cascades (" + std::to_string(cascades.size()) + ") than folds (" +
                          std::to_string(folds) + ")");
  }
  std::vector<std::size_t> order(cascades.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (cascades[a].origin != cascades[b].origin) return cascades[a].origin < cascades[b].origin;
    return cascades[a].id < cascades[b].id;
  });
  std::vector<std::vector<std::size_t>> out(folds);
  for (std::size_t f = 0; f < folds; ++f) {
    const std::size_t begin = f * order.size() / folds;
    const std::size_t end = (f + 1) * order.size() / folds;
    out[f].assign(order.begin() + static_cast<std::ptrdiff_t>(begin),
                  order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return out;
}

CrossValidationResult cross_validate(std::span<const Cascade> cascades, const FeatureStore& store,
                                     std::span<const UserId> users, const FitConfig& config) {
  config.validate();
  if (config.zeta_grid.empty()) throw ConfigError("empty regularization grid");
  const auto folds = temporal_folds(cascades, config.folds);

  CrossValidationResult result;
  result.grid = config.zeta_grid;
  result.held_out.assign(config.zeta_grid.size(), std::vector<double>(folds.size(), 0.0));

  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<Cascade> train;
    std::vector<Cascade> test;
    for (std::size_t g = 0; g < folds.size(); ++g) {
      for (std::size_t i : folds[g]) (g == f ? test : train).push_back(cascades[i]);
    }
    const LikelihoodWorkspace train_ws(train, store, users, config.rates);
    const LikelihoodWorkspace test_ws(test, store, users, config.rates);
    for (std::size_t g = 0; g < config.zeta_grid.size(); ++g) {
      FitConfig fold_config = config;
      fold_config.zeta = config.zeta_grid[g];
      const FitResult r = fit(train_ws, store, fold_config);
      result.held_out[g][f] = test_ws.log_likelihood(r.params.flatten());
    }
  }

  std::size_t best = 0;
  for (std::size_t g = 0; g < result.grid.size(); ++g) {
    const auto& row = result.held_out[g];
    result.mean_held_out.push_back(std::accumulate(row.begin(), row.end(), 0.0) /
                                   static_cast<double>(row.size()));
    if (g == 0) continue;
    const double cur = result.mean_held_out[g];
    const double top = result.mean_held_out[best];
    if (cur > top || (cur == top && result.grid[g].total() > result.grid[best].total())) best = g;
  }
  result.best = result.grid[best];
  return result;
}

}  // namespace hawkesfeed
