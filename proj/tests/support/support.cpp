#include "support.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace testsupport {

std::vector<UserId> make_users(std::size_t n) {
  std::vector<UserId> users;
  for (std::size_t i = 0; i < n; ++i) users.push_back("u" + std::to_string(i));
  return users;
}

FeatureStore random_store(std::span<const UserId> users, std::size_t character_dim,
                          std::size_t relationship_dim, std::size_t content_dim,
                          std::mt19937_64& rng) {
  std::vector<std::string> chr, rel;
  for (std::size_t k = 0; k < character_dim; ++k) chr.push_back("c" + std::to_string(k));
  for (std::size_t k = 0; k < relationship_dim; ++k) rel.push_back("r" + std::to_string(k));
  hawkesfeed::FeatureManifest content;
  for (std::size_t k = 0; k < content_dim; ++k) {
    content.names.push_back("w" + std::to_string(k));
    content.sets.push_back(k % 2 == 0 ? hawkesfeed::FeatureSet::Lng : hawkesfeed::FeatureSet::Psy);
  }
  FeatureStore store(chr, rel, content);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto draw = [&](std::size_t n) {
    std::vector<double> v(n);
    for (double& x : v) x = unit(rng);
    return v;
  };
  for (const auto& u : users) store.set_character(u, draw(character_dim));
  for (const auto& a : users) {
    for (const auto& b : users) {
      if (a != b) store.set_relationship(a, b, draw(relationship_dim));
    }
  }
  return store;
}

ModelParams random_params(const FeatureStore& store, std::mt19937_64& rng, double lo, double hi,
                          double omega_mu, double omega_a) {
  ModelParams p = ModelParams::filled(store.pair_manifest(), store.content_manifest(), 0.0,
                                      {omega_mu, omega_a});
  std::uniform_real_distribution<double> w(lo, hi);
  for (auto* v : {&p.alpha, &p.beta, &p.gamma, &p.sigma}) {
    for (double& x : *v) x = w(rng);
  }
  return p;
}

std::vector<Cascade> random_cascades(std::size_t n, std::span<const UserId> users,
                                     std::size_t content_dim, double window,
                                     std::size_t max_comments, std::mt19937_64& rng, double gap,
                                     const std::string& group) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> who(0, users.size() - 1);
  std::uniform_int_distribution<std::size_t> count(0, max_comments);
  const auto content = [&] {
    std::vector<double> v(content_dim);
    for (double& x : v) x = unit(rng);
    return v;
  };
  std::vector<Cascade> out;
  for (std::size_t i = 0; i < n; ++i) {
    Cascade c;
    c.id = group + "-" + std::to_string(i);
    c.group = group;
    c.origin = gap * static_cast<double>(i);
    c.window_end = window;
    c.post = {0.0, users[who(rng)], content(), "", ""};
    std::vector<double> times(count(rng));
    for (double& t : times) t = window * unit(rng);
    std::sort(times.begin(), times.end());
    for (double t : times) {
      if (t <= 0.0 || (!c.comments.empty() && t <= c.comments.back().time)) continue;
      c.comments.push_back({t, users[who(rng)], content(), "", ""});
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<double> oracle_pair_vector(const UserId& user, const UserId& publisher,
                                       const FeatureStore& store) {
  std::vector<double> v;
  for (auto part : {store.character(publisher), store.character(user),
                    store.relationship(publisher, user), store.relationship(user, publisher)}) {
    v.insert(v.end(), part.begin(), part.end());
  }
  return v;
}

namespace {

double weighted(const std::vector<double>& w, const std::vector<double>& x) {
  double s = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) s += w[k] * (k < x.size() ? x[k] : 0.0);
  return s;
}

}  // namespace

double oracle_intensity(const UserId& user, const Cascade& cascade, double t,
                        const ModelParams& params, const FeatureStore& store) {
  const auto& post = cascade.post;
  double mu = weighted(params.alpha, oracle_pair_vector(user, post.publisher, store)) +
              weighted(params.beta, post.content);
  double rate = mu * std::exp(-params.omega_mu * (t - post.time));
  for (const auto& e : cascade.comments) {
    if (!(e.time < t)) continue;
    const double a = weighted(params.gamma, oracle_pair_vector(user, e.publisher, store)) +
                     weighted(params.sigma, e.content);
    rate += a * std::exp(-params.omega_a * (t - e.time));
  }
  return rate;
}

double oracle_compensator(const UserId& user, const Cascade& cascade, const ModelParams& params,
                          const FeatureStore& store) {
  using boost::math::quadrature::gauss_kronrod;
  const auto& post = cascade.post;
  const double mu = weighted(params.alpha, oracle_pair_vector(user, post.publisher, store)) +
                    weighted(params.beta, post.content);
  std::vector<double> influence;
  for (const auto& e : cascade.comments) {
    influence.push_back(weighted(params.gamma, oracle_pair_vector(user, e.publisher, store)) +
                        weighted(params.sigma, e.content));
  }
  std::vector<double> knots{0.0};
  for (const auto& e : cascade.comments) knots.push_back(e.time);
  knots.push_back(cascade.window_end);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double a = knots[i];
    const double b = knots[i + 1];
    if (!(b > a)) continue;
    // Evaluate inside the open piece, where the set of past events is fixed.
    const auto f = [&](double t) {
      const double inside = std::clamp(t, a, b);
      double rate = mu * std::exp(-params.omega_mu * inside);
      for (std::size_t k = 0; k < cascade.comments.size(); ++k) {
        const double tk = cascade.comments[k].time;
        if (tk > a) break;
        rate += influence[k] * std::exp(-params.omega_a * (inside - tk));
      }
      return rate;
    };
    total += gauss_kronrod<double, 31>::integrate(f, a, b, 15, 1e-14);
  }
  return total;
}

double oracle_log_likelihood(std::span<const Cascade> cascades, const ModelParams& params,
                             const FeatureStore& store, std::span<const UserId> users) {
  double ll = 0.0;
  for (const auto& c : cascades) {
    for (const auto& e : c.comments) ll += std::log(oracle_intensity(e.publisher, c, e.time, params, store));
    for (const auto& u : users) ll -= oracle_compensator(u, c, params, store);
  }
  return ll;
}

double ks_pvalue(double d, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double x = d * (sn + 0.12 + 0.11 / sn);
  if (x < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 == 1 ? 1.0 : -1.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

double relative_error(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

}  // namespace testsupport
