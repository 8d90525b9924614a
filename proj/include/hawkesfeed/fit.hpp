#pragma once

#include <cstddef>
#include <set>
#include <span>
#include <string_view>
#include <vector>

#include "hawkesfeed/feature_store.hpp"
#include "hawkesfeed/likelihood.hpp"
#include "hawkesfeed/types.hpp"

namespace hawkesfeed {

/// Feature sets enabled for a named variant: ALL, CHR, RLTN, LNG or PSY.
std::set<FeatureSet> feature_sets_for(std::string_view variant);

struct FitConfig {
  Regularization zeta;
  /// Candidates tried by cross_validate.
  std::vector<Regularization> zeta_grid = default_zeta_grid();
  std::size_t folds = 5;

  int max_iterations = 5000;
  /// Stop when the relative objective decrease over the last 10 steps falls below this.
  double tolerance = 1e-12;
  /// Stop when ||projected gradient|| <= gradient_tolerance * (1 + ||theta||).
  double gradient_tolerance = 1e-7;
  /// Starting value of every enabled weight.
  double initial_value = 0.01;
  double initial_step = 1.0;
  /// Step shrink factor during backtracking.
  double backtrack = 0.5;
  int max_backtracks = 60;
  /// Floor on event intensities inside the log during optimization only.
  double log_floor = 1e-12;

  DecayRates rates;
  /// Coordinates whose feature set is not listed stay at zero.
  std::set<FeatureSet> feature_sets = feature_sets_for("ALL");

  void validate() const;
  static std::vector<Regularization> default_zeta_grid();
};

struct FitResult {
  ModelParams params;
  Regularization zeta;
  /// Objective after each accepted step (index 0 is the starting point).
  std::vector<double> objective_trace;
  int iterations = 0;
  bool converged = false;
  double projected_gradient_norm = 0.0;
  /// Unfloored log-likelihood at the solution.
  double log_likelihood = 0.0;
};

/// Minimizes -L + zeta . ||weights||_1 over the nonnegative orthant by
/// projected gradient descent with backtracking.
FitResult fit(std::span<const Cascade> cascades, const FeatureStore& store,
              std::span<const UserId> users, const FitConfig& config);

/// Same, reusing a precomputed workspace.
FitResult fit(const LikelihoodWorkspace& workspace, const FeatureStore& store,
              const FitConfig& config);

/// Norm of the gradient projected onto the feasible directions at theta.
double projected_gradient_norm(std::span<const double> theta, std::span<const double> grad,
                               const std::vector<bool>& free);

struct CrossValidationResult {
  Regularization best;
  std::vector<Regularization> grid;
  /// held_out[g][f]: held-out log-likelihood of fold f under grid entry g.
  std::vector<std::vector<double>> held_out;
  std::vector<double> mean_held_out;
};

/// Splits cascades into contiguous folds by initiation order.
std::vector<std::vector<std::size_t>> temporal_folds(std::span<const Cascade> cascades,
                                                     std::size_t folds);

/// Picks the grid entry with the best mean held-out log-likelihood; ties go to
/// the larger penalty.
CrossValidationResult cross_validate(std::span<const Cascade> cascades, const FeatureStore& store,
                                     std::span<const UserId> users, const FitConfig& config);

}  // namespace hawkesfeed
