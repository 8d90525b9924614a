#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "hawkesfeed/feature_store.hpp"
#include "hawkesfeed/feed.hpp"
#include "hawkesfeed/types.hpp"

namespace hawkesfeed {

// ---------------------------------------------------------------------------
// Reverse chronological

/// Candidates ordered by their latest event before t, newest first.
std::vector<std::size_t> rank_rchr(std::span<const Cascade> feed, double t,
                                   std::span<const std::size_t> candidates);
std::vector<std::size_t> rank_rchr(std::span<const Cascade> feed, double t);

// ---------------------------------------------------------------------------
// Nearest neighbour

struct NearestNeighborOptions {
  /// Weight of the newest comment in the exponentially weighted average.
  double smoothing = 0.3;
  /// Prepend F(user, post publisher) to the content vector (all 35 features).
  bool use_publisher_features = true;
};

/// Feature vector describing `event` in `cascade` from `user`'s point of view.
std::vector<double> nn_event_vector(const UserId& user, const Cascade& cascade,
                                    const Event& event, const FeatureStore& store,
                                    const NearestNeighborOptions& options);

/// Exponentially weighted average over the user's comments before clock time
/// t, oldest to newest. Empty when the user has not commented yet.
std::optional<std::vector<double>> nn_profile(const UserId& user, double t,
                                              std::span<const Cascade> history,
                                              const FeatureStore& store,
                                              const NearestNeighborOptions& options);

/// Mean event vector of the cascade's post and comments before t.
std::vector<double> nn_representative(const UserId& user, const Cascade& cascade, double t,
                                      const FeatureStore& store,
                                      const NearestNeighborOptions& options);

/// Candidates ordered by Euclidean distance between the profile and each
/// cascade's representative, nearest first. Without a profile this is
/// rank_rchr.
std::vector<std::size_t> rank_nn(const UserId& user, std::span<const Cascade> feed, double t,
                                 std::span<const std::size_t> candidates,
                                 const std::optional<std::vector<double>>& profile,
                                 const FeatureStore& store,
                                 const NearestNeighborOptions& options = {});

// ---------------------------------------------------------------------------
// Cox partial likelihood

struct CoxParams {
  std::vector<double> rho;
};

/// One comment event: the commented cascade's covariates against its risk set.
struct CoxRiskSet {
  std::size_t target = 0;  // row of the commented cascade
  std::vector<double> rows;  // risk_size x dimension, row-major
};

struct CoxProblem {
  std::size_t dimension = 0;
  std::vector<CoxRiskSet> events;

  std::size_t risk_size(std::size_t e) const { return events[e].rows.size() / dimension; }
};

/// Covariates of a cascade at clock time t: content of its latest event before t.
std::span<const double> cox_covariates(const Cascade& cascade, double t, const FeatureStore& store);

/// Risk set of a comment at t: cascades posted before t that are active at t,
/// plus the commented cascade itself.
CoxProblem build_cox_problem(std::span<const Cascade> cascades, const FeatureStore& store,
                             double activity_window = kActivityWindow);

double cox_log_partial_likelihood(const CoxProblem& problem, std::span<const double> rho);
double cox_log_partial_likelihood_and_gradient(const CoxProblem& problem,
                                               std::span<const double> rho,
                                               std::span<double> grad);

struct CoxFitOptions {
  /// Content coordinates outside these sets keep rho = 0.
  std::set<FeatureSet> feature_sets{FeatureSet::Lng, FeatureSet::Psy};
  double cap = 20.0;
  int max_iterations = 2000;
  double tolerance = 1e-12;
  double gradient_tolerance = 1e-8;
  double activity_window = kActivityWindow;
};

struct CoxFit {
  CoxParams params;
  double log_partial_likelihood = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Some coordinate ended on the |rho| <= cap box (separable data).
  bool capped = false;
};

/// Projected gradient ascent on the (concave) log partial likelihood.
CoxFit fit_cox(const CoxProblem& problem, const FeatureManifest& content_manifest,
               const CoxFitOptions& options = {});
CoxFit fit_cox(std::span<const Cascade> cascades, const FeatureStore& store,
               const CoxFitOptions& options = {});

/// Candidates ordered by rho . covariates(t), highest first.
std::vector<std::size_t> rank_cox(const CoxParams& params, std::span<const Cascade> feed, double t,
                                  std::span<const std::size_t> candidates,
                                  const FeatureStore& store);

// ---------------------------------------------------------------------------
// Featureless pairwise Hawkes fitted by EM

using UserPair = std::pair<UserId, UserId>;

/// mu[(u, p)]: influence of posts by p on u. a[(u, p)]: influence of comments
/// by p on u. Missing pairs have rate 0.
struct PairwiseHawkesParams {
  std::map<UserPair, double> mu;
  std::map<UserPair, double> a;
  DecayRates rates;

  double mu_rate(const UserId& user, const UserId& publisher) const;
  double a_rate(const UserId& user, const UserId& commenter) const;
};

double pairwise_intensity(const UserId& user, const Cascade& cascade, double local_t,
                          const PairwiseHawkesParams& params);

double pairwise_log_likelihood(std::span<const Cascade> cascades,
                               const PairwiseHawkesParams& params);

/// Gradient of pairwise_log_likelihood over the pairs present in params.
PairwiseHawkesParams pairwise_gradient(std::span<const Cascade> cascades,
                                       const PairwiseHawkesParams& params);

struct EmOptions {
  DecayRates rates;
  int max_iterations = 1000;
  /// Stop once the log-likelihood improves by less than this.
  double tolerance = 1e-8;
};

struct EmFit {
  PairwiseHawkesParams params;
  std::vector<double> log_likelihood_trace;
  int iterations = 0;
  bool converged = false;
};

/// EM over the latent branching structure: each comment is attributed either
/// to the post or to one earlier comment.
EmFit fit_hwk_em(std::span<const Cascade> cascades, const EmOptions& options = {});

}  // namespace hawkesfeed
