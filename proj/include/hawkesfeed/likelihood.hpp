#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hawkesfeed/feature_store.hpp"
#include "hawkesfeed/types.hpp"

namespace hawkesfeed {

/// L1 penalty weights, one per weight vector.
struct Regularization {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double sigma = 0.0;

  static Regularization shared(double zeta) { return {zeta, zeta, zeta, zeta}; }
  double total() const noexcept { return alpha + beta + gamma + sigma; }
  void validate() const;
  bool operator==(const Regularization&) const = default;
};

/// Integral of the intensity of `user` over the cascade's window [0, T).
double compensator(const UserId& user, const Cascade& cascade, const ModelParams& params,
                   const FeatureStore& store);

/// Sum over comments of log intensity(commenter, t_i) minus the compensators
/// of every user in the population. Returns -infinity when an observed comment
/// has zero intensity.
double cascade_log_likelihood(const Cascade& cascade, const ModelParams& params,
                              const FeatureStore& store, std::span<const UserId> users);

double log_likelihood(std::span<const Cascade> cascades, const ModelParams& params,
                      const FeatureStore& store, std::span<const UserId> users);

struct ParamGradient {
  std::vector<double> alpha;
  std::vector<double> beta;
  std::vector<double> gamma;
  std::vector<double> sigma;

  std::vector<double> flatten() const;
};

/// Exact gradient of the total log-likelihood. Throws EstimationError when the
/// likelihood is -infinity.
ParamGradient gradient(std::span<const Cascade> cascades, const ModelParams& params,
                       const FeatureStore& store, std::span<const UserId> users);

/// -L + zeta . ||weights||_1 (weights are nonnegative, so the norms are sums).
double objective(std::span<const Cascade> cascades, const ModelParams& params,
                 const FeatureStore& store, std::span<const UserId> users,
                 const Regularization& zeta);

/// The log-likelihood is linear in the flattened weights theta inside each log
/// and in the compensator:
///
///   L(theta) = sum_i log(theta . x_i) - theta . s
///
/// The workspace precomputes one row x_i per comment and the compensator
/// coefficients s (which fold in the population sums of publisher-user
/// features and the decay integrals up to each window end). Evaluating L or its
/// gradient is then a pass over the rows.
class LikelihoodWorkspace {
 public:
  LikelihoodWorkspace(std::span<const Cascade> cascades, const FeatureStore& store,
                      std::span<const UserId> users, DecayRates rates);

  std::size_t dimension() const noexcept { return dim_; }
  std::size_t pair_dim() const noexcept { return pair_dim_; }
  std::size_t content_dim() const noexcept { return content_dim_; }
  std::size_t event_count() const noexcept { return n_events_; }

  std::span<const double> event_row(std::size_t i) const {
    return {rows_.data() + i * dim_, dim_};
  }
  std::span<const double> compensator_coefficients() const noexcept { return compensator_; }

  /// With floor > 0 each event intensity enters the log as max(rate, floor);
  /// with floor == 0 a nonpositive rate yields -infinity.
  double log_likelihood(std::span<const double> theta, double floor = 0.0) const;
  /// Returns L and writes dL/dtheta into grad.
  double log_likelihood_and_gradient(std::span<const double> theta, std::span<double> grad,
                                     double floor = 0.0) const;

  /// Per-coordinate penalty weights matching the [alpha, beta, gamma, sigma] layout.
  std::vector<double> penalty_weights(const Regularization& zeta) const;

 private:
  std::size_t pair_dim_ = 0;
  std::size_t content_dim_ = 0;
  std::size_t dim_ = 0;
  std::size_t n_events_ = 0;
  std::vector<double> rows_;
  std::vector<double> compensator_;
};

}  // namespace hawkesfeed
