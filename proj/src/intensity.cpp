#include "hawkesfeed/intensity.hpp"

#include <cmath>
#include <numeric>
#include <vector>

#include "hawkesfeed/error.hpp"

namespace hawkesfeed {

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ConfigError("dimension mismatch: weights have " + std::to_string(a.size()) +
                      " entries, features " + std::to_string(b.size()));
  }
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

namespace {

double influence(const UserId& user, const Event& event, std::span<const double> pair_weights,
                 std::span<const double> content_weights, const FeatureStore& store) {
  if (pair_weights.size() != store.pair_dim()) {
    throw ConfigError("publisher-user weights have " + std::to_string(pair_weights.size()) +
                      " entries, store provides " + std::to_string(store.pair_dim()));
  }
  std::vector<double> pair(store.pair_dim());
  store.pair_features(user, event.publisher, pair);
  return dot(pair_weights, pair) + dot(content_weights, store.content(event));
}

}  // namespace

double post_influence(const UserId& user, const Event& post, const ModelParams& params,
                      const FeatureStore& store) {
  return influence(user, post, params.alpha, params.beta, store);
}

double comment_influence(const UserId& user, const Event& comment, const ModelParams& params,
                         const FeatureStore& store) {
  return influence(user, comment, params.gamma, params.sigma, store);
}

double intensity(const UserId& user, const Cascade& cascade, double t, const ModelParams& params,
                 const FeatureStore& store) {
  if (!(t >= 0.0)) throw PreconditionError("intensity queried at negative time");
  if (t > cascade.window_end) {
    throw PreconditionError("intensity queried beyond the observation window");
  }
  double total =
      post_influence(user, cascade.post, params, store) * std::exp(-params.omega_mu * t);
  for (const Event& c : cascade.comments) {
    if (!(c.time < t)) break;
    total += comment_influence(user, c, params, store) * std::exp(-params.omega_a * (t - c.time));
  }
  return total;
}

IntensityState initial_state(const UserId& user, const Cascade& cascade,
                             const ModelParams& params, const FeatureStore& store) {
  IntensityState s;
  s.user = user;
  s.cascade_id = cascade.id;
  s.post_term = post_influence(user, cascade.post, params, store);
  s.last_update_time = cascade.post.time;
  return s;
}

IntensityState decay_state(IntensityState state, double t2, DecayRates rates) {
  if (t2 < state.last_update_time) {
    throw PreconditionError("decay_state: time cannot rewind");
  }
  const double dt = t2 - state.last_update_time;
  if (dt > 0.0) {
    state.post_term *= std::exp(-rates.post * dt);
    state.comment_term *= std::exp(-rates.comment * dt);
  }
  state.last_update_time = t2;
  return state;
}

IntensityState absorb_influence(IntensityState state, double event_time, double influence) {
  if (state.last_update_time != event_time) {
    throw PreconditionError("absorb_event: state must be decayed to the event time first");
  }
  state.comment_term += influence;
  return state;
}

IntensityState absorb_event(IntensityState state, const Event& comment, const ModelParams& params,
                            const FeatureStore& store) {
  const double a = comment_influence(state.user, comment, params, store);
  return absorb_influence(std::move(state), comment.time, a);
}

}  // namespace hawkesfeed
