#include "hawkesfeed/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

#include "hawkesfeed/error.hpp"
#include "hawkesfeed/intensity.hpp"

namespace hawkesfeed {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double decay_integral(double omega, double start, double end) {
  return -std::expm1(-omega * (end - start)) / omega;
}

// Every comment of the corpus in clock order.
struct ClockEvent {
  double time;
  std::size_t cascade;
  std::size_t comment;
};

std::vector<ClockEvent> clock_ordered_comments(std::span<const Cascade> cascades) {
  std::vector<ClockEvent> out;
  for (std::size_t k = 0; k < cascades.size(); ++k) {
    for (std::size_t i = 0; i < cascades[k].comments.size(); ++i) {
      out.push_back({cascades[k].clock_time(cascades[k].comments[i]), k, i});
    }
  }
  std::sort(out.begin(), out.end(), [](const ClockEvent& a, const ClockEvent& b) {
    return std::tie(a.time, a.cascade, a.comment) < std::tie(b.time, b.cascade, b.comment);
  });
  return out;
}

}  // namespace

std::vector<std::size_t> rank_rchr(std::span<const Cascade> feed, double t,
                                   std::span<const std::size_t> candidates) {
  std::vector<ScoredCandidate> scored;
  scored.reserve(candidates.size());
  for (std::size_t k : candidates) {
    const double last = feed[k].last_event_before_clock(t);
    scored.push_back({k, last, last, &feed[k].id});
  }
  return order_candidates(std::move(scored));
}

std::vector<std::size_t> rank_rchr(std::span<const Cascade> feed, double t) {
  const auto candidates = candidate_set(feed, t);
  return rank_rchr(feed, t, candidates);
}

std::vector<double> nn_event_vector(const UserId& user, const Cascade& cascade,
                                    const Event& event, const FeatureStore& store,
                                    const NearestNeighborOptions& options) {
  std::vector<double> v;
  if (options.use_publisher_features) v = store.pair_features(user, cascade.post.publisher);
  const auto content = store.content(event);
  v.insert(v.end(), content.begin(), content.end());
  return v;
}

std::optional<std::vector<double>> nn_profile(const UserId& user, double t,
                                              std::span<const Cascade> history,
                                              const FeatureStore& store,
                                              const NearestNeighborOptions& options) {
  std::vector<ClockEvent> mine;
  for (std::size_t k = 0; k < history.size(); ++k) {
    const Cascade& c = history[k];
    for (std::size_t i = 0; i < c.comments.size(); ++i) {
      if (c.comments[i].publisher == user && c.clock_time(c.comments[i]) < t) {
        mine.push_back({c.clock_time(c.comments[i]), k, i});
      }
    }
  }
  if (mine.empty()) return std::nullopt;
  std::sort(mine.begin(), mine.end(), [](const ClockEvent& a, const ClockEvent& b) {
    return std::tie(a.time, a.cascade, a.comment) < std::tie(b.time, b.cascade, b.comment);
  });
  std::vector<double> profile;
  for (const ClockEvent& e : mine) {
    const Cascade& c = history[e.cascade];
    const auto x = nn_event_vector(user, c, c.comments[e.comment], store, options);
    if (profile.empty()) {
      profile = x;
      continue;
    }
    for (std::size_t k = 0; k < x.size(); ++k) {
      profile[k] = options.smoothing * x[k] + (1.0 - options.smoothing) * profile[k];
    }
  }
  return profile;
}

std::vector<double> nn_representative(const UserId& user, const Cascade& cascade, double t,
                                      const FeatureStore& store,
                                      const NearestNeighborOptions& options) {
  const std::size_t n = cascade.comments_before_clock(t);
  std::vector<double> mean = nn_event_vector(user, cascade, cascade.post, store, options);
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = nn_event_vector(user, cascade, cascade.comments[i], store, options);
    for (std::size_t k = 0; k < x.size(); ++k) mean[k] += x[k];
  }
  for (double& v : mean) v /= static_cast<double>(n + 1);
  return mean;
}

std::vector<std::size_t> rank_nn(const UserId& user, std::span<const Cascade> feed, double t,
                                 std::span<const std::size_t> candidates,
                                 const std::optional<std::vector<double>>& profile,
                                 const FeatureStore& store,
                                 const NearestNeighborOptions& options) {
  if (!profile) return rank_rchr(feed, t, candidates);
  std::vector<ScoredCandidate> scored;
  scored.reserve(candidates.size());
  for (std::size_t k : candidates) {
    const auto rep = nn_representative(user, feed[k], t, store, options);
    if (rep.size() != profile->size()) throw ConfigError("NN profile has the wrong length");
    double sq = 0.0;
    for (std::size_t j = 0; j < rep.size(); ++j) sq += (rep[j] - (*profile)[j]) * (rep[j] - (*profile)[j]);
    scored.push_back({k, -std::sqrt(sq), feed[k].last_event_before_clock(t), &feed[k].id});
  }
  return order_candidates(std::move(scored));
}

std::span<const double> cox_covariates(const Cascade& cascade, double t, const FeatureStore& store) {
  const std::size_t n = cascade.comments_before_clock(t);
  return store.content(n == 0 ? cascade.post : cascade.comments[n - 1]);
}

CoxProblem build_cox_problem(std::span<const Cascade> cascades, const FeatureStore& store,
                             double activity_window) {
  CoxProblem problem;
  problem.dimension = store.content_dim();
  for (const ClockEvent& e : clock_ordered_comments(cascades)) {
    CoxRiskSet risk;
    for (std::size_t k = 0; k < cascades.size(); ++k) {
      const Cascade& c = cascades[k];
      if (k != e.cascade) {
        if (!(c.origin < e.time)) continue;
        if (e.time - c.last_event_before_clock(e.time) > activity_window) continue;
      }
      if (k == e.cascade) risk.target = risk.rows.size() / std::max<std::size_t>(1, problem.dimension);
      const auto x = cox_covariates(c, e.time, store);
      risk.rows.insert(risk.rows.end(), x.begin(), x.end());
    }
    problem.events.push_back(std::move(risk));
  }
  return problem;
}

double cox_log_partial_likelihood_and_gradient(const CoxProblem& problem,
                                               std::span<const double> rho,
                                               std::span<double> grad) {
  const std::size_t d = problem.dimension;
  if (rho.size() != d) throw ConfigError("rho has the wrong length");
  const bool want_grad = !grad.empty();
  if (want_grad) std::fill(grad.begin(), grad.end(), 0.0);
  double total = 0.0;
  std::vector<double> eta;
  for (std::size_t e = 0; e < problem.events.size(); ++e) {
    const CoxRiskSet& risk = problem.events[e];
    const std::size_t m = d == 0 ? 1 : problem.risk_size(e);
    eta.assign(m, 0.0);
    for (std::size_t r = 0; r < m && d > 0; ++r) {
      eta[r] = std::inner_product(rho.begin(), rho.end(), risk.rows.begin() + static_cast<std::ptrdiff_t>(r * d), 0.0);
    }
    const double top = *std::max_element(eta.begin(), eta.end());
    double z = 0.0;
    for (double v : eta) z += std::exp(v - top);
    total += eta[risk.target] - top - std::log(z);
    if (!want_grad) continue;
    for (std::size_t r = 0; r < m; ++r) {
      const double w = std::exp(eta[r] - top) / z;
      for (std::size_t k = 0; k < d; ++k) grad[k] -= w * risk.rows[r * d + k];
    }
    for (std::size_t k = 0; k < d; ++k) grad[k] += risk.rows[risk.target * d + k];
  }
  return total;
}

double cox_log_partial_likelihood(const CoxProblem& problem, std::span<const double> rho) {
  return cox_log_partial_likelihood_and_gradient(problem, rho, {});
}

CoxFit fit_cox(const CoxProblem& problem, const FeatureManifest& content_manifest,
               const CoxFitOptions& options) {
  if (problem.events.empty()) throw EstimationError("Cox fit needs at least one comment");
  if (content_manifest.size() != problem.dimension) {
    throw ConfigError("content manifest does not match the Cox covariates");
  }
  const bool identifiable = std::any_of(
      problem.events.begin(), problem.events.end(),
      [&](const CoxRiskSet& r) { return problem.dimension > 0 && r.rows.size() / problem.dimension > 1; });
  if (!identifiable) {
    throw EstimationError("Cox weights are unidentifiable: every risk set holds a single cascade");
  }
  const std::size_t d = problem.dimension;
  std::vector<bool> free(d);
  for (std::size_t k = 0; k < d; ++k) free[k] = options.feature_sets.contains(content_manifest.sets[k]);

  std::vector<double> rho(d, 0.0);
  std::vector<double> grad(d);
  std::vector<double> cand(d);
  std::vector<double> cand_grad(d);
  double value = cox_log_partial_likelihood_and_gradient(problem, rho, grad);
  double step = 1.0;
  CoxFit fit;

  const auto projected_norm = [&](const std::vector<double>& r, const std::vector<double>& g) {
    double sq = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      if (!free[k]) continue;
      double v = g[k];
      if (r[k] >= options.cap) {
        v = std::min(v, 0.0);
      } else if (r[k] <= -options.cap) {
        v = std::max(v, 0.0);
      }
      sq += v * v;
    }
    return std::sqrt(sq);
  };

  int it = 0;
  for (; it < options.max_iterations; ++it) {
    if (projected_norm(rho, grad) <= options.gradient_tolerance) {
      fit.converged = true;
      break;
    }
    bool accepted = false;
    bool stalled = false;
    double cand_value = value;
    for (int bt = 0; bt < 60; ++bt) {
      double linear = 0.0;
      double sq = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        cand[k] = free[k] ? std::clamp(rho[k] + step * grad[k], -options.cap, options.cap) : 0.0;
        const double diff = cand[k] - rho[k];
        linear += grad[k] * diff;
        sq += diff * diff;
      }
      if (sq == 0.0) {
        stalled = true;
        break;
      }
      cand_value = cox_log_partial_likelihood(problem, cand);
      if (cand_value >= value + linear - sq / (2.0 * step)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (stalled) {
      fit.converged = true;
      break;
    }
    if (!accepted) break;
    cand_value = cox_log_partial_likelihood_and_gradient(problem, cand, cand_grad);
    double ss = 0.0;
    double sy = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double s = cand[k] - rho[k];
      ss += s * s;
      sy -= s * (cand_grad[k] - grad[k]);
    }
    step = sy > 0.0 ? std::clamp(ss / sy, 1e-12, 1e12) : step * 2.0;
    const double gain = cand_value - value;
    rho.swap(cand);
    grad.swap(cand_grad);
    value = cand_value;
    if (gain <= options.tolerance * std::max(1.0, std::abs(value))) {
      ++it;
      fit.converged = true;
      break;
    }
  }
  fit.iterations = it;
  fit.log_partial_likelihood = value;
  fit.capped = std::any_of(rho.begin(), rho.end(),
                           [&](double r) { return std::abs(r) >= options.cap * (1.0 - 1e-12); });
  fit.params.rho = std::move(rho);
  return fit;
}

CoxFit fit_cox(std::span<const Cascade> cascades, const FeatureStore& store,
               const CoxFitOptions& options) {
  return fit_cox(build_cox_problem(cascades, store, options.activity_window),
                 store.content_manifest(), options);
}

std::vector<std::size_t> rank_cox(const CoxParams& params, std::span<const Cascade> feed, double t,
                                  std::span<const std::size_t> candidates,
                                  const FeatureStore& store) {
  std::vector<ScoredCandidate> scored;
  scored.reserve(candidates.size());
  for (std::size_t k : candidates) {
    const double score = dot(params.rho, cox_covariates(feed[k], t, store));
    scored.push_back({k, score, feed[k].last_event_before_clock(t), &feed[k].id});
  }
  return order_candidates(std::move(scored));
}

double PairwiseHawkesParams::mu_rate(const UserId& user, const UserId& publisher) const {
  const auto it = mu.find({user, publisher});
  return it == mu.end() ? 0.0 : it->second;
}

double PairwiseHawkesParams::a_rate(const UserId& user, const UserId& commenter) const {
  const auto it = a.find({user, commenter});
  return it == a.end() ? 0.0 : it->second;
}

double pairwise_intensity(const UserId& user, const Cascade& cascade, double local_t,
                          const PairwiseHawkesParams& params) {
  double total = params.mu_rate(user, cascade.post.publisher) *
                 std::exp(-params.rates.post * (local_t - cascade.post.time));
  for (const Event& c : cascade.comments) {
    if (!(c.time < local_t)) break;
    total += params.a_rate(user, c.publisher) * std::exp(-params.rates.comment * (local_t - c.time));
  }
  return total;
}

namespace {

struct Denominators {
  std::map<UserId, double> post;     // sum of post decay integrals per publisher
  std::map<UserId, double> comment;  // sum of comment decay integrals per commenter
};

Denominators denominators(std::span<const Cascade> cascades, DecayRates rates) {
  Denominators d;
  for (const Cascade& c : cascades) {
    d.post[c.post.publisher] += decay_integral(rates.post, c.post.time, c.window_end);
    for (const Event& e : c.comments) {
      d.comment[e.publisher] += decay_integral(rates.comment, e.time, c.window_end);
    }
  }
  return d;
}

double lookup(const std::map<UserId, double>& m, const UserId& k) {
  const auto it = m.find(k);
  return it == m.end() ? 0.0 : it->second;
}

}  // namespace

double pairwise_log_likelihood(std::span<const Cascade> cascades,
                               const PairwiseHawkesParams& params) {
  const Denominators den = denominators(cascades, params.rates);
  double total = 0.0;
  for (const auto& [key, rate] : params.mu) total -= rate * lookup(den.post, key.second);
  for (const auto& [key, rate] : params.a) total -= rate * lookup(den.comment, key.second);
  for (const Cascade& c : cascades) {
    for (const Event& e : c.comments) {
      const double rate = pairwise_intensity(e.publisher, c, e.time, params);
      if (!(rate > 0.0)) return kNegInf;
      total += std::log(rate);
    }
  }
  return total;
}

PairwiseHawkesParams pairwise_gradient(std::span<const Cascade> cascades,
                                       const PairwiseHawkesParams& params) {
  const Denominators den = denominators(cascades, params.rates);
  PairwiseHawkesParams g;
  g.rates = params.rates;
  for (const auto& [key, _] : params.mu) g.mu[key] = -lookup(den.post, key.second);
  for (const auto& [key, _] : params.a) g.a[key] = -lookup(den.comment, key.second);
  for (const Cascade& c : cascades) {
    for (const Event& e : c.comments) {
      const double rate = pairwise_intensity(e.publisher, c, e.time, params);
      if (!(rate > 0.0)) throw EstimationError("pairwise gradient undefined at zero intensity");
      if (auto it = g.mu.find({e.publisher, c.post.publisher}); it != g.mu.end()) {
        it->second += std::exp(-params.rates.post * (e.time - c.post.time)) / rate;
      }
      for (const Event& prior : c.comments) {
        if (!(prior.time < e.time)) break;
        if (auto it = g.a.find({e.publisher, prior.publisher}); it != g.a.end()) {
          it->second += std::exp(-params.rates.comment * (e.time - prior.time)) / rate;
        }
      }
    }
  }
  return g;
}

EmFit fit_hwk_em(std::span<const Cascade> cascades, const EmOptions& options) {
  if (!(options.rates.post > 0.0) || !(options.rates.comment > 0.0)) {
    throw ConfigError("decay rates must be positive");
  }
  for (const Cascade& c : cascades) validate(c);

  // Parameters are indexed densely: mu pairs and a pairs share one vector.
  std::map<UserPair, std::size_t> mu_index;
  std::map<UserPair, std::size_t> a_index;
  std::vector<const UserPair*> keys;
  std::vector<bool> is_mu;
  const auto index_of = [&](std::map<UserPair, std::size_t>& m, UserPair key, bool mu) {
    auto [it, inserted] = m.try_emplace(std::move(key), keys.size());
    if (inserted) {
      keys.push_back(&it->first);
      is_mu.push_back(mu);
    }
    return it->second;
  };

  // Parent terms per comment: (parameter, kernel weight), earlier comments
  // aggregated per commenter.
  std::vector<std::size_t> offsets{0};
  std::vector<std::pair<std::size_t, double>> terms;
  for (const Cascade& c : cascades) {
    std::vector<std::pair<const UserId*, double>> weights;
    double prev = c.post.time;
    for (const Event& e : c.comments) {
      const double decay = std::exp(-options.rates.comment * (e.time - prev));
      for (auto& w : weights) w.second *= decay;
      terms.emplace_back(index_of(mu_index, {e.publisher, c.post.publisher}, true),
                         std::exp(-options.rates.post * (e.time - c.post.time)));
      for (const auto& [publisher, w] : weights) {
        terms.emplace_back(index_of(a_index, {e.publisher, *publisher}, false), w);
      }
      offsets.push_back(terms.size());
      auto w = std::find_if(weights.begin(), weights.end(),
                            [&](const auto& p) { return *p.first == e.publisher; });
      if (w == weights.end()) {
        weights.emplace_back(&e.publisher, 1.0);
      } else {
        w->second += 1.0;
      }
      prev = e.time;
    }
  }
  if (offsets.size() == 1) throw EstimationError("EM needs at least one comment");

  const Denominators den = denominators(cascades, options.rates);
  std::vector<double> denom(keys.size());
  for (std::size_t k = 0; k < keys.size(); ++k) {
    denom[k] = is_mu[k] ? lookup(den.post, keys[k]->second) : lookup(den.comment, keys[k]->second);
  }

  const std::size_t n_events = offsets.size() - 1;
  std::vector<double> theta(keys.size(), 0.0);
  std::vector<double> mass(keys.size());
  // First M-step from responsibilities proportional to the kernel weights.
  std::fill(mass.begin(), mass.end(), 0.0);
  for (std::size_t i = 0; i < n_events; ++i) {
    double z = 0.0;
    for (std::size_t t = offsets[i]; t < offsets[i + 1]; ++t) z += terms[t].second;
    for (std::size_t t = offsets[i]; t < offsets[i + 1]; ++t) {
      if (z > 0.0) mass[terms[t].first] += terms[t].second / z;
    }
  }
  for (std::size_t k = 0; k < keys.size(); ++k) theta[k] = denom[k] > 0.0 ? mass[k] / denom[k] : 0.0;

  EmFit fit;
  fit.params.rates = options.rates;
  int it = 0;
  for (;; ++it) {
    // E-step and log-likelihood at the current theta.
    std::fill(mass.begin(), mass.end(), 0.0);
    double ll = -std::inner_product(theta.begin(), theta.end(), denom.begin(), 0.0);
    for (std::size_t i = 0; i < n_events; ++i) {
      double rate = 0.0;
      for (std::size_t t = offsets[i]; t < offsets[i + 1]; ++t) {
        rate += theta[terms[t].first] * terms[t].second;
      }
      if (!(rate > 0.0)) {
        ll = kNegInf;
        continue;
      }
      ll += std::log(rate);
      for (std::size_t t = offsets[i]; t < offsets[i + 1]; ++t) {
        mass[terms[t].first] += theta[terms[t].first] * terms[t].second / rate;
      }
    }
    fit.log_likelihood_trace.push_back(ll);
    const std::size_t n = fit.log_likelihood_trace.size();
    if (n >= 2 && fit.log_likelihood_trace[n - 1] - fit.log_likelihood_trace[n - 2] < options.tolerance) {
      fit.converged = true;
      break;
    }
    if (it >= options.max_iterations) break;
    // M-step.
    for (std::size_t k = 0; k < keys.size(); ++k) {
      theta[k] = denom[k] > 0.0 ? mass[k] / denom[k] : 0.0;
    }
  }
  fit.iterations = it;
  for (std::size_t k = 0; k < keys.size(); ++k) {
    if (theta[k] <= 0.0) continue;
    (is_mu[k] ? fit.params.mu : fit.params.a).emplace(*keys[k], theta[k]);
  }
  return fit;
}

}  // namespace hawkesfeed
