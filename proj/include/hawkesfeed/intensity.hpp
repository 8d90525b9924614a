#pragma once

#include <span>
#include <string>

#include "hawkesfeed/feature_store.hpp"
#include "hawkesfeed/types.hpp"

namespace hawkesfeed {

/// Initial influence of the post on `user`: alpha . F(user, publisher) + beta . F(content).
double post_influence(const UserId& user, const Event& post, const ModelParams& params,
                      const FeatureStore& store);

/// Initial influence of a comment on `user`: gamma . F(user, commenter) + sigma . F(content).
double comment_influence(const UserId& user, const Event& comment, const ModelParams& params,
                         const FeatureStore& store);

/// Rate at which `user` comments on the cascade at local time t. Only comments
/// strictly before t contribute, so at a comment's own timestamp this is the
/// left limit.
double intensity(const UserId& user, const Cascade& cascade, double t, const ModelParams& params,
                 const FeatureStore& store);

/// Decayed post term and comment term for one (user, cascade) pair. Their sum
/// is the intensity at last_update_time.
struct IntensityState {
  UserId user;
  std::string cascade_id;
  double post_term = 0.0;
  double comment_term = 0.0;
  double last_update_time = 0.0;

  double value() const noexcept { return post_term + comment_term; }
};

/// State at the post (local time 0): the full post influence, no comments.
IntensityState initial_state(const UserId& user, const Cascade& cascade,
                             const ModelParams& params, const FeatureStore& store);

/// Exponential decay of both terms up to t2. Time never rewinds.
IntensityState decay_state(IntensityState state, double t2, DecayRates rates);

/// Adds a comment's influence. The state must already sit at the comment time.
IntensityState absorb_event(IntensityState state, const Event& comment, const ModelParams& params,
                            const FeatureStore& store);

/// Same as absorb_event with a precomputed influence.
IntensityState absorb_influence(IntensityState state, double event_time, double influence);

double dot(std::span<const double> a, std::span<const double> b);

}  // namespace hawkesfeed
