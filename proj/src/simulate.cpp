#include "hawkesfeed/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "hawkesfeed/error.hpp"
#include "hawkesfeed/intensity.hpp"

namespace hawkesfeed {

double branching_ratio(const SimConfig& config) {
  const ModelParams& p = config.truth;
  const double content_bound =
      std::accumulate(p.sigma.begin(), p.sigma.end(), 0.0) * static_cast<double>(config.users.size());
  double worst = 0.0;
  for (const UserId& commenter : config.users) {
    double total = content_bound;
    for (const UserId& u : config.users) {
      total += dot(p.gamma, config.store.pair_features(u, commenter));
    }
    worst = std::max(worst, total);
  }
  return worst / p.omega_a;
}

void SimConfig::validate() const {
  if (users.empty()) throw ConfigError("simulation needs at least one user");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("horizon must be positive");
  if (event_cap < 1) throw ConfigError("event cap must be at least 1");
  if (!(post_interval >= 0.0)) throw ConfigError("post interval must be >= 0");
  truth.validate();
  if (truth.alpha.size() != store.pair_dim() || truth.beta.size() != store.content_dim()) {
    throw ConfigError("true parameters do not match the feature store");
  }
  const double ratio = branching_ratio(*this);
  if (!(ratio < 1.0)) {
    throw ConfigError("supercritical configuration: branching ratio " + std::to_string(ratio) +
                      " >= 1");
  }
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

std::vector<double> sample_content(std::size_t dim, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> v(dim);
  for (double& x : v) x = unif(rng);
  return v;
}

}  // namespace

SimulatedCascade simulate_cascade(const SimConfig& config, const Event& post, std::uint64_t seed) {
  config.validate();
  const ModelParams& params = config.truth;
  const DecayRates rates = params.rates();

  SimulatedCascade out;
  Cascade& c = out.cascade;
  c.post = post;
  c.post.time = 0.0;
  c.window_end = config.horizon;

  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> expo(1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  std::vector<IntensityState> states;
  states.reserve(config.users.size());
  for (const UserId& u : config.users) states.push_back(initial_state(u, c, params, config.store));
  const auto total = [&states] {
    double s = 0.0;
    for (const auto& st : states) s += st.value();
    return s;
  };

  double t = 0.0;
  double bound = total();
  while (bound > 0.0) {
    const double next = t + expo(rng) / bound;
    if (!(next > t)) continue;
    t = next;
    if (t >= config.horizon) break;
    for (auto& st : states) st = decay_state(std::move(st), t, rates);
    const double rate = total();
    if (unif(rng) * bound <= rate) {
      if (c.comments.size() >= config.event_cap) {
        out.truncated = true;
        break;
      }
      double pick = unif(rng) * rate;
      std::size_t who = 0;
      for (; who + 1 < states.size(); ++who) {
        pick -= states[who].value();
        if (pick < 0.0) break;
      }
      Event e;
      e.time = t;
      e.publisher = config.users[who];
      e.content = sample_content(config.store.content_dim(), rng);
      for (auto& st : states) st = absorb_event(std::move(st), e, params, config.store);
      c.comments.push_back(std::move(e));
      bound = total();
    } else {
      bound = rate;
    }
  }
  return out;
}

SimulatedCascade simulate_cascade(const SimConfig& config, const Event& post) {
  return simulate_cascade(config, post, config.seed);
}

SimulatedCorpus simulate_corpus(const SimConfig& config, std::size_t n) {
  config.validate();
  SimulatedCorpus corpus;
  corpus.cascades.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t cascade_seed = derive_seed(config.seed, i);
    std::mt19937_64 content_rng(derive_seed(cascade_seed, 0));
    Event post;
    post.publisher = config.users[i % config.users.size()];
    post.content = sample_content(config.store.content_dim(), content_rng);
    SimulatedCascade sim = simulate_cascade(config, post, derive_seed(cascade_seed, 1));
    sim.cascade.id = config.group + "-" + std::to_string(i);
    sim.cascade.group = config.group;
    sim.cascade.origin = static_cast<double>(i) * config.post_interval;
    if (sim.truncated) ++corpus.truncated;
    corpus.cascades.push_back(std::move(sim.cascade));
  }
  return corpus;
}

}  // namespace hawkesfeed
