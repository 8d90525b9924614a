#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hawkesfeed/types.hpp"

namespace hawkesfeed {

/// Per-coordinate min-max scaling into [0,1]. Bounds come from training rows
/// only; values outside them are clamped. A constant coordinate maps to 0.
/// A default-constructed scaler has no bounds and only clamps.
class MinMaxScaler {
 public:
  MinMaxScaler() = default;
  MinMaxScaler(std::vector<double> lower, std::vector<double> upper);

  static MinMaxScaler fit(std::span<const std::vector<double>> rows, std::size_t dimension);

  std::vector<double> transform(std::span<const double> raw) const;
  void transform_in_place(std::vector<double>& values) const;

  bool fitted() const noexcept { return !lower_.empty(); }
  const std::vector<double>& lower() const noexcept { return lower_; }
  const std::vector<double>& upper() const noexcept { return upper_; }

 private:
  std::vector<double> lower_;
  std::vector<double> upper_;
};

/// Normalized character, relationship and content features. Lookups of
/// unknown users or pairs return zero vectors.
///
/// The publisher-user vector for (user u, publisher p) is the concatenation
/// [character(p), character(u), relationship(p -> u), relationship(u -> p)].
class FeatureStore {
 public:
  FeatureStore() = default;
  FeatureStore(std::vector<std::string> character_names,
               std::vector<std::string> relationship_names, FeatureManifest content);

  std::size_t character_dim() const noexcept { return character_names_.size(); }
  std::size_t relationship_dim() const noexcept { return relationship_names_.size(); }
  std::size_t pair_dim() const noexcept { return pair_manifest_.size(); }
  std::size_t content_dim() const noexcept { return content_manifest_.size(); }

  const std::vector<std::string>& character_names() const noexcept { return character_names_; }
  const std::vector<std::string>& relationship_names() const noexcept {
    return relationship_names_;
  }
  const FeatureManifest& pair_manifest() const noexcept { return pair_manifest_; }
  const FeatureManifest& content_manifest() const noexcept { return content_manifest_; }

  void set_character(const UserId& user, std::vector<double> values);
  /// Features of `from` acting on `to`'s activity.
  void set_relationship(const UserId& from, const UserId& to, std::vector<double> values);

  std::span<const double> character(const UserId& user) const;
  std::span<const double> relationship(const UserId& from, const UserId& to) const;

  void pair_features(const UserId& user, const UserId& publisher, std::span<double> out) const;
  std::vector<double> pair_features(const UserId& user, const UserId& publisher) const;

  /// The event's content vector, or zeros when it carries none.
  std::span<const double> content(const Event& event) const;

  const std::map<UserId, std::vector<double>, std::less<>>& characters() const noexcept {
    return character_;
  }
  const std::map<UserId, std::map<UserId, std::vector<double>, std::less<>>, std::less<>>&
  relationships() const noexcept {
    return relationship_;
  }

  /// Users with character features.
  std::vector<UserId> users() const;

  MinMaxScaler& content_scaler() noexcept { return content_scaler_; }
  const MinMaxScaler& content_scaler() const noexcept { return content_scaler_; }

 private:
  std::vector<std::string> character_names_;
  std::vector<std::string> relationship_names_;
  FeatureManifest pair_manifest_;
  FeatureManifest content_manifest_;
  std::map<UserId, std::vector<double>, std::less<>> character_;
  std::map<UserId, std::map<UserId, std::vector<double>, std::less<>>, std::less<>> relationship_;
  std::vector<double> zeros_;
  MinMaxScaler content_scaler_;
};

}  // namespace hawkesfeed
