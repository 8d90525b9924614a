#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hawkesfeed/feature_store.hpp"
#include "hawkesfeed/types.hpp"

namespace testsupport {

using hawkesfeed::Cascade;
using hawkesfeed::FeatureStore;
using hawkesfeed::ModelParams;
using hawkesfeed::UserId;

std::vector<UserId> make_users(std::size_t n);

/// Uniform [0,1] character and relationship vectors for every user / ordered pair.
FeatureStore random_store(std::span<const UserId> users, std::size_t character_dim,
                          std::size_t relationship_dim, std::size_t content_dim,
                          std::mt19937_64& rng);

/// Every weight uniform in [lo, hi].
ModelParams random_params(const FeatureStore& store, std::mt19937_64& rng, double lo, double hi,
                          double omega_mu, double omega_a);

/// Cascades with uniformly placed comments by random users and uniform
/// content. Origins are spaced `gap` minutes apart on one clock.
std::vector<Cascade> random_cascades(std::size_t n, std::span<const UserId> users,
                                     std::size_t content_dim, double window,
                                     std::size_t max_comments, std::mt19937_64& rng,
                                     double gap = 30.0, const std::string& group = "g");

// Brute-force references, written straight from the model definition.

std::vector<double> oracle_pair_vector(const UserId& user, const UserId& publisher,
                                       const FeatureStore& store);
double oracle_intensity(const UserId& user, const Cascade& cascade, double t,
                        const ModelParams& params, const FeatureStore& store);
/// Adaptive Gauss-Kronrod integral of oracle_intensity over [0, window_end),
/// split at every comment so each piece is smooth.
double oracle_compensator(const UserId& user, const Cascade& cascade, const ModelParams& params,
                          const FeatureStore& store);
double oracle_log_likelihood(std::span<const Cascade> cascades, const ModelParams& params,
                             const FeatureStore& store, std::span<const UserId> users);

/// Central finite difference of f at x along every coordinate.
template <class F>
std::vector<double> central_difference(F&& f, std::vector<double> x, double h) {
  std::vector<double> g(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double keep = x[k];
    x[k] = keep + h;
    const double up = f(x);
    x[k] = keep - h;
    const double down = f(x);
    x[k] = keep;
    g[k] = (up - down) / (2.0 * h);
  }
  return g;
}

/// Two-sided one-sample KS statistic of samples against a CDF.
template <class Cdf>
double ks_statistic(std::vector<double> samples, Cdf&& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

/// Asymptotic Kolmogorov p-value with the usual small-sample correction.
double ks_pvalue(double d, std::size_t n);

double relative_error(double a, double b);

}  // namespace testsupport
