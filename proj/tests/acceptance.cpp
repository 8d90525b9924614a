#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "hawkesfeed/baselines.hpp"
#include "hawkesfeed/feed.hpp"
#include "hawkesfeed/fit.hpp"
#include "hawkesfeed/intensity.hpp"
#include "hawkesfeed/likelihood.hpp"
#include "hawkesfeed/rank_eval.hpp"
#include "hawkesfeed/simulate.hpp"
#include "support/support.hpp"

using namespace hawkesfeed;
using namespace testsupport;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

template <class... Args>
std::string fmt(const char* f, Args... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ModelParams scaled(ModelParams p, double c) {
  for (auto* v : {&p.alpha, &p.beta, &p.gamma, &p.sigma}) {
    for (double& x : *v) x *= c;
  }
  return p;
}

// 1. Analytic gradient against central differences of the log-likelihood.
Outcome gradient_check() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  const auto users = make_users(4);
  const FeatureStore store = random_store(users, 1, 1, 2, rng);
  const auto cascades = random_cascades(5, users, 2, 120.0, 12, rng);
  double worst = 0.0;
  for (int point = 0; point < 20; ++point) {
    const ModelParams p = random_params(store, rng, 0.05, 1.0, 0.02, 0.2);
    const auto g = gradient(cascades, p, store, users).flatten();
    const auto fd = central_difference(
        [&](const std::vector<double>& theta) {
          ModelParams q = p;
          q.assign(theta);
          return log_likelihood(cascades, q, store, users);
        },
        p.flatten(), 1e-6);
    for (std::size_t k = 0; k < g.size(); ++k) worst = std::max(worst, relative_error(g[k], fd[k]));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-5 && secs < 10.0,
          fmt("max relative error %.2e, %.2f s", worst, secs)};
}

// 2. Closed-form cascade log-likelihood against adaptive quadrature.
Outcome compensator_check() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(102);
  const auto users = make_users(5);
  const FeatureStore store = random_store(users, 2, 2, 3, rng);
  const ModelParams p = random_params(store, rng, 0.01, 0.5, 0.01, 0.1);
  const auto cascades = random_cascades(20, users, 3, 300.0, 25, rng);
  double worst = 0.0;
  for (const auto& c : cascades) {
    const double got = cascade_log_likelihood(c, p, store, users);
    const double want = oracle_log_likelihood(std::span(&c, 1), p, store, users);
    worst = std::max(worst, relative_error(got, want));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-6 && secs < 30.0, fmt("max relative error %.2e, %.2f s", worst, secs)};
}

// 3. Incremental states against a direct sum over absorbed events.
Outcome streaming_check() {
  std::mt19937_64 rng(103);
  const auto users = make_users(4);
  const FeatureStore store = random_store(users, 1, 1, 2, rng);
  const ModelParams p = random_params(store, rng, 0.01, 0.5, 0.005, 0.05);
  const auto cascades = random_cascades(10, users, 2, 2000.0, 150, rng);

  struct Stream {
    const Cascade* cascade;
    UserId user;
    IntensityState state;
    std::size_t next = 0;
  };
  std::vector<Stream> streams;
  for (const auto& c : cascades) {
    for (const auto& u : users) streams.push_back({&c, u, initial_state(u, c, p, store)});
  }
  const auto direct = [&](const Stream& s) {
    const double t = s.state.last_update_time;
    const auto& post = s.cascade->post;
    double rate = (dot(p.alpha, oracle_pair_vector(s.user, post.publisher, store)) +
                   dot(p.beta, post.content)) *
                  std::exp(-p.omega_mu * t);
    for (std::size_t i = 0; i < s.next; ++i) {
      const Event& e = s.cascade->comments[i];
      rate += (dot(p.gamma, oracle_pair_vector(s.user, e.publisher, store)) +
               dot(p.sigma, e.content)) *
              std::exp(-p.omega_a * (t - e.time));
    }
    return rate;
  };

  std::uniform_int_distribution<std::size_t> pick(0, streams.size() - 1);
  std::uniform_int_distribution<int> op(0, 2);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  int queries = 0;
  for (int i = 0; i < 10000; ++i) {
    Stream& s = streams[pick(rng)];
    const Cascade& c = *s.cascade;
    const double now = s.state.last_update_time;
    const double limit = s.next < c.size() ? c.comments[s.next].time : c.window_end;
    switch (op(rng)) {
      case 0:
        s.state = decay_state(s.state, now + unit(rng) * (limit - now), p.rates());
        break;
      case 1:
        if (s.next < c.size()) {
          s.state = decay_state(s.state, limit, p.rates());
          s.state = absorb_event(s.state, c.comments[s.next++], p, store);
        } else {
          s.state = initial_state(s.user, c, p, store);
          s.next = 0;
        }
        break;
      default:
        worst = std::max(worst, relative_error(s.state.value(), direct(s)));
        ++queries;
    }
  }
  return {worst <= 1e-9, fmt("max relative error %.2e over %d queries", worst, queries)};
}

// 4. Post-only single-user simulator: mean count and time rescaling.
Outcome simulator_check() {
  SimConfig c;
  c.users = {"u0"};
  std::mt19937_64 rng(104);
  c.store = random_store(c.users, 1, 1, 2, rng);
  c.truth = ModelParams::filled(c.store.pair_manifest(), c.store.content_manifest(), 0.0,
                                {0.01, 1.0});
  c.truth.alpha = {0.01, 0.01, 0.0, 0.0};
  c.truth.beta = {0.02, 0.01};
  c.horizon = 300.0;
  const Event post{0.0, "u0", {0.4, 0.7}, "", ""};
  const double mu = post_influence("u0", post, c.truth, c.store);
  const double w = c.truth.omega_mu;
  const double T = c.horizon;
  const double expected = mu * (1.0 - std::exp(-w * T)) / w;
  const auto Lambda = [&](double t) { return mu * (1.0 - std::exp(-w * t)) / w; };

  const int n = 10000;
  double sum = 0.0, sq = 0.0, offset = 0.0, prev = 0.0;
  std::vector<double> gaps;
  for (int i = 0; i < n; ++i) {
    const Cascade cas = simulate_cascade(c, post, derive_seed(2024, i)).cascade;
    const double k = static_cast<double>(cas.size());
    sum += k;
    sq += k * k;
    for (const Event& e : cas.comments) {
      const double x = offset + Lambda(e.time);
      gaps.push_back(x - prev);
      prev = x;
    }
    offset += Lambda(T);
  }
  const double mean = sum / n;
  const double se = std::sqrt((sq / n - mean * mean) / n);
  const double z = std::abs(mean - expected) / se;
  const double d = ks_statistic(gaps, [](double x) { return 1.0 - std::exp(-x); });
  const double pv = ks_pvalue(d, gaps.size());
  return {z <= 3.0 && pv > 0.01,
          fmt("mean %.4f vs %.4f (%.2f SE), KS p=%.3f over %zu gaps", mean, expected, z, pv,
              gaps.size())};
}

// 5. Parameter recovery from simulated cascades with a sparse truth.
Outcome recovery_check() {
  const auto t0 = std::chrono::steady_clock::now();
  SimConfig c;
  c.users = make_users(8);
  std::mt19937_64 rng(2024);
  c.store = random_store(c.users, 1, 1, 2, rng);
  c.truth = ModelParams::filled(c.store.pair_manifest(), c.store.content_manifest(), 0.0,
                                {0.05, 15.0});
  c.truth.alpha = {0.4, 0.0, 0.3, 0.0};
  c.truth.beta = {0.0, 0.5};
  c.truth.gamma = {0.0, 0.6, 0.0, 0.4};
  c.truth.sigma = {0.3, 0.0};
  c.horizon = 200.0;
  c.seed = 7;
  const auto corpus = simulate_corpus(c, 200);

  FitConfig cfg;
  cfg.rates = c.truth.rates();
  const FitResult r = fit(corpus.cascades, c.store, c.users, cfg);
  const auto truth = c.truth.flatten();
  const auto est = r.params.flatten();
  double num = 0.0, den = 0.0;
  bool pattern = true;
  // Estimates above half the smallest qualifying signal count as nonzero.
  const double threshold = 0.1;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    num += (est[k] - truth[k]) * (est[k] - truth[k]);
    den += truth[k] * truth[k];
    if (truth[k] == 0.0 && est[k] > threshold) pattern = false;
    if (truth[k] >= 0.2 && est[k] <= threshold) pattern = false;
  }
  const double rel = std::sqrt(num / den);
  const double secs = seconds_since(t0);
  return {rel <= 0.15 && pattern && corpus.truncated == 0 && secs < 300.0,
          fmt("relative L2 %.4f, pattern %s, %.1f s", rel, pattern ? "ok" : "wrong", secs)};
}

// 6. Convexity of -L + L1 and concavity of the Cox partial likelihood on chords.
Outcome convexity_check() {
  std::mt19937_64 rng(106);
  const auto users = make_users(4);
  const FeatureStore store = random_store(users, 1, 1, 3, rng);
  const auto cascades = random_cascades(8, users, 3, 150.0, 10, rng);
  const Regularization zeta{0.1, 0.2, 0.3, 0.4};
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const ModelParams x = random_params(store, rng, 0.0, 1.0, 0.01, 0.1);
    const ModelParams y = random_params(store, rng, 0.0, 1.0, 0.01, 0.1);
    const double lam = unit(rng);
    ModelParams m = x;
    const auto fx = x.flatten(), fy = y.flatten();
    std::vector<double> mid(fx.size());
    for (std::size_t k = 0; k < mid.size(); ++k) mid[k] = lam * fx[k] + (1.0 - lam) * fy[k];
    m.assign(mid);
    const double ox = objective(cascades, x, store, users, zeta);
    const double oy = objective(cascades, y, store, users, zeta);
    const double om = objective(cascades, m, store, users, zeta);
    const double chord = lam * ox + (1.0 - lam) * oy;
    worst = std::max(worst, (om - chord) / std::max({1.0, std::abs(ox), std::abs(oy)}));
  }
  const CoxProblem cox = build_cox_problem(cascades, store);
  std::normal_distribution<double> z(0.0, 2.0);
  double cox_worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    std::vector<double> a(cox.dimension), b(cox.dimension), m(cox.dimension);
    for (double& v : a) v = z(rng);
    for (double& v : b) v = z(rng);
    const double lam = unit(rng);
    for (std::size_t k = 0; k < m.size(); ++k) m[k] = lam * a[k] + (1.0 - lam) * b[k];
    const double la = cox_log_partial_likelihood(cox, a);
    const double lb = cox_log_partial_likelihood(cox, b);
    const double lm = cox_log_partial_likelihood(cox, m);
    cox_worst = std::max(cox_worst, (lam * la + (1.0 - lam) * lb - lm) /
                                        std::max({1.0, std::abs(la), std::abs(lb)}));
  }
  return {worst <= 1e-9 && cox_worst <= 1e-9,
          fmt("worst objective excess %.2e, worst Cox deficit %.2e", worst, cox_worst)};
}

// 7. EM monotonicity and the single-pair closed form.
Outcome em_check() {
  double worst_drop = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    std::mt19937_64 rng(700 + trial);
    const auto users = make_users(3 + trial % 3);
    const auto cascades = random_cascades(12, users, 0, 200.0, 10, rng);
    const EmFit f = fit_hwk_em(cascades, {{0.01, 0.1}, 500, 1e-10});
    const auto& tr = f.log_likelihood_trace;
    for (std::size_t i = 1; i < tr.size(); ++i) {
      worst_drop = std::max(worst_drop, (tr[i - 1] - tr[i]) / std::max(1.0, std::abs(tr[i])));
    }
  }
  // u comments once on each of v's posts: mu(u,v) = n / sum_c (1 - exp(-omega T_c)) / omega.
  std::vector<Cascade> cascades;
  const std::vector<double> windows{100.0, 250.0, 400.0};
  const std::vector<double> times{3.0, 40.0, 7.5};
  const double omega = 0.01;
  double denom = 0.0;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    Cascade c;
    c.id = "c" + std::to_string(i);
    c.window_end = windows[i];
    c.post = {0.0, "v", {}, "", ""};
    c.comments.push_back({times[i], "u", {}, "", ""});
    cascades.push_back(c);
    denom += (1.0 - std::exp(-omega * windows[i])) / omega;
  }
  const EmFit f = fit_hwk_em(cascades, {{omega, 0.1}, 100, 1e-12});
  const double err = std::abs(f.params.mu_rate("u", "v") - 3.0 / denom);
  return {worst_drop <= 1e-12 && err <= 1e-8,
          fmt("largest relative trace drop %.2e, closed-form error %.2e", worst_drop, err)};
}

// 8. Ranking with the true generator beats reverse chronological order.
Outcome harness_check() {
  SimConfig c;
  c.users = make_users(8);
  std::mt19937_64 rng(7);
  c.store = random_store(c.users, 1, 1, 2, rng);
  c.truth = ModelParams::filled(c.store.pair_manifest(), c.store.content_manifest(), 0.0,
                                {0.01, 1.0});
  c.truth.alpha = {0.005, 0.0, 0.01, 0.0};
  c.truth.beta = {0.002, 0.0};
  c.truth.gamma = {0.02, 0.0, 0.01, 0.0};
  c.truth.sigma = {0.0, 0.01};
  c.horizon = 300.0;
  c.post_interval = 45.0;
  c.seed = 8;
  const auto feed = simulate_corpus(c, 50).cascades;
  IntensityRanker hwk(feed, feature_influence(c.truth, c.store), "HWK-ALL");
  ReverseChronologicalRanker rchr(feed);
  const RankReport a = evaluate(hwk);
  const RankReport b = evaluate(rchr);
  const double nav = normalized_average_rank(2.0, 4.0);
  return {a.average_rank < b.average_rank && nav == 0.5,
          fmt("HWK-ALL %.4f vs RCHR %.4f over %zu comments, NAveRank(2,4)=%.3f", a.average_rank,
              b.average_rank, a.ranks.size(), nav)};
}

// 9. Post influence remaining after 1000 minutes at omega_mu = 0.001.
Outcome decay_check() {
  IntensityState s;
  s.post_term = 1.0;
  s = decay_state(s, 1000.0, {0.001, 0.01});
  const double want = std::exp(-1.0);
  return {std::abs(s.post_term - want) <= 1e-12 && std::abs(s.post_term - 0.3679) < 5e-5,
          fmt("remaining fraction %.6f", s.post_term)};
}

IntensityState state_at(const UserId& u, const Cascade& c, double local, const ModelParams& p,
                        const FeatureStore& store) {
  IntensityState st = initial_state(u, c, p, store);
  for (const Event& e : c.comments) {
    if (!(e.time < local)) break;
    st = decay_state(st, e.time, p.rates());
    st = absorb_event(st, e, p, store);
  }
  return decay_state(st, local, p.rates());
}

// 10. Scaling every weight leaves prioritize() orderings unchanged.
Outcome invariance_check() {
  std::mt19937_64 rng(110);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int snapshots = 0;
  int changed = 0;
  while (snapshots < 50) {
    const auto users = make_users(5);
    const FeatureStore store = random_store(users, 2, 2, 3, rng);
    const ModelParams p = random_params(store, rng, 0.0, 1.0, 0.005, 0.05);
    const auto feed = random_cascades(12, users, 3, 400.0, 15, rng, 20.0);
    const double t = 50.0 + unit(rng) * 400.0;
    const auto cand = candidate_set(feed, t);
    if (cand.size() < 2) continue;
    const UserId& u = users[snapshots % users.size()];
    const auto order = [&](const ModelParams& q) {
      std::vector<IntensityState> states;
      for (std::size_t k : cand) states.push_back(state_at(u, feed[k], t - feed[k].origin, q, store));
      return prioritize(feed, cand, states, t);
    };
    const auto base = order(p);
    for (double cst : {0.5, 3.0}) changed += order(scaled(p, cst)) != base;
    ++snapshots;
  }
  return {changed == 0, fmt("%d of %d scaled orderings changed", changed, 2 * snapshots)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"gradient vs central differences", gradient_check},
      {"log-likelihood vs adaptive quadrature", compensator_check},
      {"streaming intensity vs scratch", streaming_check},
      {"simulator calibration", simulator_check},
      {"parameter recovery", recovery_check},
      {"convexity probes", convexity_check},
      {"EM monotonicity and closed form", em_check},
      {"harness sanity", harness_check},
      {"decay constant", decay_check},
      {"argmax invariance", invariance_check},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s criterion %zu: %s (%s)\n", o.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
