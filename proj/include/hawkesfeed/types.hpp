#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace hawkesfeed {

using UserId = std::string;

/// Gap inserted between events that share a timestamp within one cascade.
inline constexpr double kTieEpsilon = 1e-6;

/// A post or a comment. Times are minutes since the cascade's post.
struct Event {
  double time = 0.0;
  UserId publisher;
  /// Normalized content features; empty means "no content known" (all zeros).
  std::vector<double> content;

  // IO metadata, never read by the model.
  std::string text;
  std::string wall_clock;
};

/// One post plus its comments observed in the window [0, window_end).
struct Cascade {
  std::string id;
  std::string group;
  Event post;
  std::vector<Event> comments;
  double window_end = 0.0;
  /// Position of the post on the group's shared clock (minutes). Local event
  /// times plus origin give the times used to rank across cascades.
  double origin = 0.0;

  std::size_t size() const noexcept { return comments.size(); }
  /// Time of the latest event strictly before local time t (the post counts).
  double last_event_before(double local_t) const;
  /// Number of comments with local time strictly below t.
  std::size_t comments_before(double local_t) const;

  // Group-clock variants. An event's clock time is always computed as
  // origin + time, so comparing against another event's clock time is exact.
  double clock_time(const Event& e) const noexcept { return origin + e.time; }
  std::size_t comments_before_clock(double t) const;
  /// Clock time of the latest event strictly before t (the post counts).
  double last_event_before_clock(double t) const;
};

/// Throws PreconditionError unless the cascade satisfies its invariants.
void validate(const Cascade& cascade);

/// Nudges exact (or reversed-by-rounding) ties forward by kTieEpsilon, in
/// arrival order. Returns the number of events moved.
std::size_t perturb_ties(std::vector<Event>& comments, double post_time = 0.0);

enum class FeatureSet { ChrPub, ChrUser, RltnPub, RltnUser, Lng, Psy };

const char* to_string(FeatureSet set);
FeatureSet feature_set_from_string(const std::string& name);

/// Names each coordinate of a feature vector and the set it belongs to.
struct FeatureManifest {
  std::vector<std::string> names;
  std::vector<FeatureSet> sets;

  std::size_t size() const noexcept { return names.size(); }
  bool operator==(const FeatureManifest&) const = default;
};

struct DecayRates {
  double post = 0.001;
  double comment = 0.01;
};

/// Weights of the feature-modulated intensity. alpha/gamma act on
/// publisher-user features, beta/sigma on content features; alpha/beta shape
/// the post's influence, gamma/sigma each comment's.
struct ModelParams {
  std::vector<double> alpha;
  std::vector<double> beta;
  std::vector<double> gamma;
  std::vector<double> sigma;
  double omega_mu = 0.001;
  double omega_a = 0.01;
  FeatureManifest pair_manifest;
  FeatureManifest content_manifest;

  DecayRates rates() const noexcept { return {omega_mu, omega_a}; }
  std::size_t dimension() const noexcept {
    return alpha.size() + beta.size() + gamma.size() + sigma.size();
  }

  /// Flattened as [alpha, beta, gamma, sigma].
  std::vector<double> flatten() const;
  void assign(std::span<const double> theta);
  void scale(double factor);

  /// Checks nonnegativity, positive decay rates and manifest lengths.
  void validate() const;

  static ModelParams filled(const FeatureManifest& pair, const FeatureManifest& content,
                            double value, DecayRates rates = {});
};

}  // namespace hawkesfeed
