#include "hawkesfeed/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "hawkesfeed/error.hpp"
#include "hawkesfeed/intensity.hpp"

namespace hawkesfeed {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Integral of exp(-omega (t - start)) over [start, end).
double decay_integral(double omega, double start, double end) {
  return -std::expm1(-omega * (end - start)) / omega;
}

}  // namespace

void Regularization::validate() const {
  for (double z : {alpha, beta, gamma, sigma}) {
    if (!(z >= 0.0) || !std::isfinite(z)) {
      throw ConfigError("regularization weights must be finite and >= 0");
    }
  }
}

double compensator(const UserId& user, const Cascade& cascade, const ModelParams& params,
                   const FeatureStore& store) {
  const double T = cascade.window_end;
  double total = post_influence(user, cascade.post, params, store) *
                 decay_integral(params.omega_mu, cascade.post.time, T);
  for (const Event& c : cascade.comments) {
    total += comment_influence(user, c, params, store) * decay_integral(params.omega_a, c.time, T);
  }
  return total;
}

double cascade_log_likelihood(const Cascade& cascade, const ModelParams& params,
                              const FeatureStore& store, std::span<const UserId> users) {
  params.validate();
  validate(cascade);
  double events = 0.0;
  for (const Event& c : cascade.comments) {
    const double rate = intensity(c.publisher, cascade, c.time, params, store);
    if (!(rate > 0.0)) return kNegInf;
    events += std::log(rate);
  }
  double survival = 0.0;
  for (const UserId& u : users) survival += compensator(u, cascade, params, store);
  return events - survival;
}

double log_likelihood(std::span<const Cascade> cascades, const ModelParams& params,
                      const FeatureStore& store, std::span<const UserId> users) {
  double total = 0.0;
  for (const Cascade& c : cascades) total += cascade_log_likelihood(c, params, store, users);
  return total;
}

std::vector<double> ParamGradient::flatten() const {
  std::vector<double> out;
  for (const auto* v : {&alpha, &beta, &gamma, &sigma}) out.insert(out.end(), v->begin(), v->end());
  return out;
}

ParamGradient gradient(std::span<const Cascade> cascades, const ModelParams& params,
                       const FeatureStore& store, std::span<const UserId> users) {
  params.validate();
  const LikelihoodWorkspace ws(cascades, store, users, params.rates());
  const std::vector<double> theta = params.flatten();
  if (theta.size() != ws.dimension()) throw ConfigError("parameters do not match feature store");
  std::vector<double> g(ws.dimension());
  const double L = ws.log_likelihood_and_gradient(theta, g);
  if (!std::isfinite(L)) {
    throw EstimationError("gradient undefined: an observed comment has zero intensity");
  }
  ParamGradient out;
  auto it = g.begin();
  const auto take = [&it](std::vector<double>& dst, std::size_t n) {
    dst.assign(it, it + static_cast<std::ptrdiff_t>(n));
    it += static_cast<std::ptrdiff_t>(n);
  };
  take(out.alpha, params.alpha.size());
  take(out.beta, params.beta.size());
  take(out.gamma, params.gamma.size());
  take(out.sigma, params.sigma.size());
  return out;
}

double objective(std::span<const Cascade> cascades, const ModelParams& params,
                 const FeatureStore& store, std::span<const UserId> users,
                 const Regularization& zeta) {
  zeta.validate();
  const auto l1 = [](const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0);
  };
  const double penalty = zeta.alpha * l1(params.alpha) + zeta.beta * l1(params.beta) +
                         zeta.gamma * l1(params.gamma) + zeta.sigma * l1(params.sigma);
  return -log_likelihood(cascades, params, store, users) + penalty;
}

LikelihoodWorkspace::LikelihoodWorkspace(std::span<const Cascade> cascades,
                                         const FeatureStore& store, std::span<const UserId> users,
                                         DecayRates rates)
    : pair_dim_(store.pair_dim()),
      content_dim_(store.content_dim()),
      dim_(2 * (store.pair_dim() + store.content_dim())) {
  const std::size_t P = pair_dim_;
  const std::size_t D = content_dim_;
  const std::size_t off_beta = P;
  const std::size_t off_gamma = P + D;
  const std::size_t off_sigma = 2 * P + D;
  const double n_users = static_cast<double>(users.size());
  compensator_.assign(dim_, 0.0);

  std::map<UserId, std::vector<double>, std::less<>> population_sums;
  const auto population_sum = [&](const UserId& publisher) -> const std::vector<double>& {
    auto it = population_sums.find(publisher);
    if (it != population_sums.end()) return it->second;
    std::vector<double> sum(P, 0.0);
    std::vector<double> buf(P);
    for (const UserId& u : users) {
      store.pair_features(u, publisher, buf);
      for (std::size_t k = 0; k < P; ++k) sum[k] += buf[k];
    }
    return population_sums.emplace(publisher, std::move(sum)).first->second;
  };

  for (const Cascade& c : cascades) {
    validate(c);
    n_events_ += c.comments.size();
  }
  rows_.assign(n_events_ * dim_, 0.0);

  std::vector<double> buf(P);
  std::size_t row = 0;
  for (const Cascade& c : cascades) {
    const double T = c.window_end;
    const auto post_content = store.content(c.post);

    const double g_mu = decay_integral(rates.post, c.post.time, T);
    const auto& post_sum = population_sum(c.post.publisher);
    for (std::size_t k = 0; k < P; ++k) compensator_[k] += g_mu * post_sum[k];
    for (std::size_t k = 0; k < D; ++k) {
      compensator_[off_beta + k] += n_users * g_mu * post_content[k];
    }

    // Decayed weight of earlier comments, aggregated per commenter, and the
    // decayed sum of their content vectors.
    std::vector<std::pair<const UserId*, double>> weights;
    std::vector<double> content_sum(D, 0.0);
    double prev_time = c.post.time;

    for (const Event& e : c.comments) {
      const double decay = std::exp(-rates.comment * (e.time - prev_time));
      for (auto& w : weights) w.second *= decay;
      for (double& v : content_sum) v *= decay;

      double* x = rows_.data() + row * dim_;
      const double post_decay = std::exp(-rates.post * (e.time - c.post.time));
      store.pair_features(e.publisher, c.post.publisher, buf);
      for (std::size_t k = 0; k < P; ++k) x[k] = buf[k] * post_decay;
      for (std::size_t k = 0; k < D; ++k) x[off_beta + k] = post_content[k] * post_decay;
      for (const auto& [publisher, w] : weights) {
        if (w == 0.0) continue;
        store.pair_features(e.publisher, *publisher, buf);
        for (std::size_t k = 0; k < P; ++k) x[off_gamma + k] += w * buf[k];
      }
      for (std::size_t k = 0; k < D; ++k) x[off_sigma + k] = content_sum[k];

      const double g_a = decay_integral(rates.comment, e.time, T);
      const auto& comment_sum = population_sum(e.publisher);
      const auto content = store.content(e);
      for (std::size_t k = 0; k < P; ++k) compensator_[off_gamma + k] += g_a * comment_sum[k];
      for (std::size_t k = 0; k < D; ++k) {
        compensator_[off_sigma + k] += n_users * g_a * content[k];
        content_sum[k] += content[k];
      }
      auto w = std::find_if(weights.begin(), weights.end(),
                            [&](const auto& p) { return *p.first == e.publisher; });
      if (w == weights.end()) {
        weights.emplace_back(&e.publisher, 1.0);
      } else {
        w->second += 1.0;
      }
      prev_time = e.time;
      ++row;
    }
  }
}

double LikelihoodWorkspace::log_likelihood(std::span<const double> theta, double floor) const {
  if (theta.size() != dim_) throw ConfigError("parameter vector has wrong length");
  double L = -std::inner_product(theta.begin(), theta.end(), compensator_.begin(), 0.0);
  for (std::size_t i = 0; i < n_events_; ++i) {
    const auto x = event_row(i);
    const double rate = std::inner_product(x.begin(), x.end(), theta.begin(), 0.0);
    if (floor > 0.0) {
      L += std::log(std::max(rate, floor));
    } else {
      if (!(rate > 0.0)) return kNegInf;
      L += std::log(rate);
    }
  }
  return L;
}

double LikelihoodWorkspace::log_likelihood_and_gradient(std::span<const double> theta,
                                                        std::span<double> grad,
                                                        double floor) const {
  if (theta.size() != dim_ || grad.size() != dim_) {
    throw ConfigError("parameter or gradient vector has wrong length");
  }
  double L = 0.0;
  for (std::size_t k = 0; k < dim_; ++k) {
    L -= theta[k] * compensator_[k];
    grad[k] = -compensator_[k];
  }
  bool impossible = false;
  for (std::size_t i = 0; i < n_events_; ++i) {
    const auto x = event_row(i);
    const double rate = std::inner_product(x.begin(), x.end(), theta.begin(), 0.0);
    if (rate >= floor && rate > 0.0) {
      L += std::log(rate);
      const double inv = 1.0 / rate;
      for (std::size_t k = 0; k < dim_; ++k) grad[k] += x[k] * inv;
    } else if (floor > 0.0) {
      L += std::log(floor);
    } else {
      impossible = true;
    }
  }
  return impossible ? kNegInf : L;
}

std::vector<double> LikelihoodWorkspace::penalty_weights(const Regularization& zeta) const {
  std::vector<double> w;
  w.reserve(dim_);
  w.insert(w.end(), pair_dim_, zeta.alpha);
  w.insert(w.end(), content_dim_, zeta.beta);
  w.insert(w.end(), pair_dim_, zeta.gamma);
  w.insert(w.end(), content_dim_, zeta.sigma);
  return w;
}

}  // namespace hawkesfeed
