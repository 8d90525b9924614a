#include "hawkesfeed/types.hpp"

#include <algorithm>
#include <cmath>

#include "hawkesfeed/error.hpp"

namespace hawkesfeed {

double Cascade::last_event_before(double local_t) const {
  const std::size_t n = comments_before(local_t);
  return n == 0 ? post.time : comments[n - 1].time;
}

std::size_t Cascade::comments_before(double local_t) const {
  const auto it = std::lower_bound(comments.begin(), comments.end(), local_t,
                                   [](const Event& e, double t) { return e.time < t; });
  return static_cast<std::size_t>(it - comments.begin());
}

std::size_t Cascade::comments_before_clock(double t) const {
  const auto it = std::lower_bound(comments.begin(), comments.end(), t,
                                   [this](const Event& e, double v) { return clock_time(e) < v; });
  return static_cast<std::size_t>(it - comments.begin());
}

double Cascade::last_event_before_clock(double t) const {
  const std::size_t n = comments_before_clock(t);
  return n == 0 ? clock_time(post) : clock_time(comments[n - 1]);
}

namespace {

void validate_content(const Event& e, const std::string& cascade_id) {
  for (double v : e.content) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw PreconditionError("cascade " + cascade_id + ": content feature outside [0,1]");
    }
  }
}

}  // namespace

void validate(const Cascade& cascade) {
  if (cascade.post.time != 0.0) {
    throw PreconditionError("cascade " + cascade.id + ": post must be at time 0");
  }
  if (!(cascade.window_end > 0.0) || !std::isfinite(cascade.window_end)) {
    throw PreconditionError("cascade " + cascade.id + ": window_end must be positive");
  }
  validate_content(cascade.post, cascade.id);
  double prev = cascade.post.time;
  for (const Event& c : cascade.comments) {
    if (!(c.time > prev)) {
      throw PreconditionError("cascade " + cascade.id + ": event times must strictly increase");
    }
    if (!(c.time < cascade.window_end)) {
      throw PreconditionError("cascade " + cascade.id + ": comment at or beyond window end");
    }
    validate_content(c, cascade.id);
    prev = c.time;
  }
}

std::size_t perturb_ties(std::vector<Event>& comments, double post_time) {
  std::size_t moved = 0;
  double prev = post_time;
  for (Event& c : comments) {
    if (c.time <= prev) {
      c.time = prev + kTieEpsilon;
      ++moved;
    }
    prev = c.time;
  }
  return moved;
}

const char* to_string(FeatureSet set) {
  switch (set) {
    case FeatureSet::ChrPub: return "ChrPub";
    case FeatureSet::ChrUser: return "ChrUser";
    case FeatureSet::RltnPub: return "RltnPub";
    case FeatureSet::RltnUser: return "RltnUser";
    case FeatureSet::Lng: return "Lng";
    case FeatureSet::Psy: return "Psy";
  }
  return "?";
}

FeatureSet feature_set_from_string(const std::string& name) {
  for (FeatureSet s : {FeatureSet::ChrPub, FeatureSet::ChrUser, FeatureSet::RltnPub,
                       FeatureSet::RltnUser, FeatureSet::Lng, FeatureSet::Psy}) {
    if (name == to_string(s)) return s;
  }
  throw ConfigError("unknown feature set '" + name + "'");
}

std::vector<double> ModelParams::flatten() const {
  std::vector<double> theta;
  theta.reserve(dimension());
  for (const auto* v : {&alpha, &beta, &gamma, &sigma}) {
    theta.insert(theta.end(), v->begin(), v->end());
  }
  return theta;
}

void ModelParams::assign(std::span<const double> theta) {
  if (theta.size() != dimension()) {
    throw ConfigError("parameter vector has wrong length");
  }
  auto it = theta.begin();
  for (auto* v : {&alpha, &beta, &gamma, &sigma}) {
    std::copy(it, it + static_cast<std::ptrdiff_t>(v->size()), v->begin());
    it += static_cast<std::ptrdiff_t>(v->size());
  }
}

void ModelParams::scale(double factor) {
  for (auto* v : {&alpha, &beta, &gamma, &sigma}) {
    for (double& x : *v) x *= factor;
  }
}

void ModelParams::validate() const {
  if (!(omega_mu > 0.0) || !(omega_a > 0.0)) {
    throw ConfigError("decay rates must be positive");
  }
  if (alpha.size() != pair_manifest.size() || gamma.size() != pair_manifest.size()) {
    throw ConfigError("alpha/gamma length does not match the publisher-user manifest");
  }
  if (beta.size() != content_manifest.size() || sigma.size() != content_manifest.size()) {
    throw ConfigError("beta/sigma length does not match the content manifest");
  }
  for (const auto* v : {&alpha, &beta, &gamma, &sigma}) {
    for (double x : *v) {
      if (!std::isfinite(x) || x < 0.0) throw ConfigError("weights must be finite and >= 0");
    }
  }
}

ModelParams ModelParams::filled(const FeatureManifest& pair, const FeatureManifest& content,
                                double value, DecayRates rates) {
  ModelParams p;
  p.alpha.assign(pair.size(), value);
  p.gamma.assign(pair.size(), value);
  p.beta.assign(content.size(), value);
  p.sigma.assign(content.size(), value);
  p.omega_mu = rates.post;
  p.omega_a = rates.comment;
  p.pair_manifest = pair;
  p.content_manifest = content;
  return p;
}

}  // namespace hawkesfeed
