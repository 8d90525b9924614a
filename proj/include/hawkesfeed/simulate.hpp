#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "hawkesfeed/feature_store.hpp"
#include "hawkesfeed/types.hpp"

namespace hawkesfeed {

struct SimConfig {
  std::vector<UserId> users;
  FeatureStore store;
  ModelParams truth;
  /// Observation window of every cascade, minutes.
  double horizon = 1000.0;
  std::size_t event_cap = 10000;
  std::uint64_t seed = 1;
  /// Gap between consecutive posts on the group clock.
  double post_interval = 60.0;
  std::string group = "sim";

  /// Throws ConfigError on bad values or a supercritical configuration.
  void validate() const;
};

/// Largest expected number of direct offspring of a single comment, over
/// every possible commenter and any content vector in [0,1]^D.
double branching_ratio(const SimConfig& config);

/// Mixes a master seed with a stream index (splitmix64).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

struct SimulatedCascade {
  Cascade cascade;
  bool truncated = false;
};

/// Draws the comments following `post` by Ogata thinning of the population's
/// total intensity; each accepted event is attributed to a user in proportion
/// to that user's intensity. Comment content is sampled uniformly in [0,1]^D.
SimulatedCascade simulate_cascade(const SimConfig& config, const Event& post, std::uint64_t seed);
SimulatedCascade simulate_cascade(const SimConfig& config, const Event& post);

struct SimulatedCorpus {
  std::vector<Cascade> cascades;
  std::size_t truncated = 0;
};

/// n independent cascades; posts go round-robin to the users, with uniformly
/// sampled content, one every post_interval minutes.
SimulatedCorpus simulate_corpus(const SimConfig& config, std::size_t n);

}  // namespace hawkesfeed
