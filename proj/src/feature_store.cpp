#include "hawkesfeed/feature_store.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hawkesfeed/error.hpp"

namespace hawkesfeed {

MinMaxScaler::MinMaxScaler(std::vector<double> lower, std::vector<double> upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size()) throw ConfigError("scaler bounds differ in length");
  for (std::size_t k = 0; k < lower_.size(); ++k) {
    if (!(lower_[k] <= upper_[k])) throw ConfigError("scaler lower bound exceeds upper bound");
  }
}

MinMaxScaler MinMaxScaler::fit(std::span<const std::vector<double>> rows, std::size_t dimension) {
  if (rows.empty()) return MinMaxScaler(std::vector<double>(dimension, 0.0),
                                        std::vector<double>(dimension, 0.0));
  std::vector<double> lo(dimension, std::numeric_limits<double>::infinity());
  std::vector<double> hi(dimension, -std::numeric_limits<double>::infinity());
  for (const auto& row : rows) {
    if (row.size() != dimension) throw ConfigError("feature row has wrong length");
    for (std::size_t k = 0; k < dimension; ++k) {
      lo[k] = std::min(lo[k], row[k]);
      hi[k] = std::max(hi[k], row[k]);
    }
  }
  return MinMaxScaler(std::move(lo), std::move(hi));
}

std::vector<double> MinMaxScaler::transform(std::span<const double> raw) const {
  std::vector<double> out(raw.begin(), raw.end());
  transform_in_place(out);
  return out;
}

void MinMaxScaler::transform_in_place(std::vector<double>& values) const {
  if (fitted() && values.size() != lower_.size()) {
    throw ConfigError("feature vector length does not match scaler");
  }
  for (std::size_t k = 0; k < values.size(); ++k) {
    double v = values[k];
    if (fitted()) {
      const double range = upper_[k] - lower_[k];
      v = range > 0.0 ? (v - lower_[k]) / range : 0.0;
    }
    values[k] = std::clamp(v, 0.0, 1.0);
  }
}

FeatureStore::FeatureStore(std::vector<std::string> character_names,
                           std::vector<std::string> relationship_names, FeatureManifest content)
    : character_names_(std::move(character_names)),
      relationship_names_(std::move(relationship_names)),
      content_manifest_(std::move(content)) {
  if (content_manifest_.sets.size() != content_manifest_.names.size()) {
    throw ConfigError("content manifest names and sets differ in length");
  }
  const auto add = [this](const std::vector<std::string>& names, const char* prefix,
                          FeatureSet set) {
    for (const auto& n : names) {
      pair_manifest_.names.push_back(std::string(prefix) + n);
      pair_manifest_.sets.push_back(set);
    }
  };
  add(character_names_, "pub.", FeatureSet::ChrPub);
  add(character_names_, "user.", FeatureSet::ChrUser);
  add(relationship_names_, "rltn_pub.", FeatureSet::RltnPub);
  add(relationship_names_, "rltn_user.", FeatureSet::RltnUser);
  zeros_.assign(std::max({character_dim(), relationship_dim(), content_dim()}), 0.0);
}

namespace {

void check_values(const std::vector<double>& values, std::size_t dim, const char* what) {
  if (values.size() != dim) {
    throw ConfigError(std::string(what) + " vector has length " + std::to_string(values.size()) +
                      ", expected " + std::to_string(dim));
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw ConfigError(std::string(what) + " vector is not finite");
  }
}

}  // namespace

void FeatureStore::set_character(const UserId& user, std::vector<double> values) {
  check_values(values, character_dim(), "character");
  character_.insert_or_assign(user, std::move(values));
}

void FeatureStore::set_relationship(const UserId& from, const UserId& to,
                                    std::vector<double> values) {
  check_values(values, relationship_dim(), "relationship");
  relationship_[from].insert_or_assign(to, std::move(values));
}

std::span<const double> FeatureStore::character(const UserId& user) const {
  const auto it = character_.find(user);
  if (it == character_.end()) return {zeros_.data(), character_dim()};
  return it->second;
}

std::span<const double> FeatureStore::relationship(const UserId& from, const UserId& to) const {
  const auto outer = relationship_.find(from);
  if (outer != relationship_.end()) {
    const auto inner = outer->second.find(to);
    if (inner != outer->second.end()) return inner->second;
  }
  return {zeros_.data(), relationship_dim()};
}

void FeatureStore::pair_features(const UserId& user, const UserId& publisher,
                                 std::span<double> out) const {
  if (out.size() != pair_dim()) throw ConfigError("pair feature buffer has wrong length");
  auto it = out.begin();
  for (auto part : {character(publisher), character(user), relationship(publisher, user),
                    relationship(user, publisher)}) {
    it = std::copy(part.begin(), part.end(), it);
  }
}

std::vector<double> FeatureStore::pair_features(const UserId& user,
                                                const UserId& publisher) const {
  std::vector<double> out(pair_dim());
  pair_features(user, publisher, out);
  return out;
}

std::span<const double> FeatureStore::content(const Event& event) const {
  if (event.content.empty()) return {zeros_.data(), content_dim()};
  if (event.content.size() != content_dim()) {
    throw ConfigError("event content has length " + std::to_string(event.content.size()) +
                      ", expected " + std::to_string(content_dim()));
  }
  return event.content;
}

std::vector<UserId> FeatureStore::users() const {
  std::vector<UserId> out;
  out.reserve(character_.size());
  for (const auto& [user, _] : character_) out.push_back(user);
  return out;
}

}  // namespace hawkesfeed
