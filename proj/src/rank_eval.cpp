#include "hawkesfeed/rank_eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

#include "hawkesfeed/error.hpp"

namespace hawkesfeed {

const char* to_string(CandidatePolicy policy) {
  return policy == CandidatePolicy::AllOpen ? "all" : "active";
}

CandidatePolicy candidate_policy_from_string(const std::string& name) {
  if (name == "all") return CandidatePolicy::AllOpen;
  if (name == "active") return CandidatePolicy::ActiveOnly;
  throw ConfigError("unknown candidate policy '" + name + "' (expected all or active)");
}

std::vector<std::size_t> candidate_set(std::span<const Cascade> feed, double t,
                                       CandidatePolicy policy) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < feed.size(); ++k) {
    const Cascade& c = feed[k];
    if (!(c.origin < t) || t - c.origin > c.window_end) continue;
    if (policy == CandidatePolicy::ActiveOnly && t - c.last_event_before_clock(t) > kActivityWindow) {
      continue;
    }
    out.push_back(k);
  }
  return out;
}

std::vector<std::size_t> order_candidates(std::vector<ScoredCandidate> scored) {
  std::sort(scored.begin(), scored.end(), [](const ScoredCandidate& a, const ScoredCandidate& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.last_event != b.last_event) return a.last_event > b.last_event;
    return *a.id < *b.id;
  });
  std::vector<std::size_t> out;
  out.reserve(scored.size());
  for (const auto& s : scored) out.push_back(s.index);
  return out;
}

InfluenceModel feature_influence(const ModelParams& params, const FeatureStore& store) {
  params.validate();
  return {[&params, &store](const UserId& u, const Event& e) {
            return post_influence(u, e, params, store);
          },
          [&params, &store](const UserId& u, const Event& e) {
            return comment_influence(u, e, params, store);
          },
          params.rates()};
}

InfluenceModel pairwise_influence(const PairwiseHawkesParams& params) {
  // The post/comment events carry their publisher; the pair maps are keyed by
  // (user, publisher).
  return {[&params](const UserId& u, const Event& e) { return params.mu_rate(u, e.publisher); },
          [&params](const UserId& u, const Event& e) { return params.a_rate(u, e.publisher); },
          params.rates};
}

std::vector<std::size_t> prioritize(std::span<const Cascade> feed,
                                    std::span<const std::size_t> candidates,
                                    std::span<const IntensityState> states, double t) {
  if (states.size() != candidates.size()) {
    throw PreconditionError("prioritize: one state per candidate required");
  }
  std::vector<ScoredCandidate> scored;
  scored.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const Cascade& c = feed[candidates[i]];
    const IntensityState& s = states[i];
    if (s.cascade_id != c.id) throw PreconditionError("prioritize: state belongs to another cascade");
    const double local = t - c.origin;
    if (std::abs(s.last_update_time - local) > 1e-9 * (1.0 + std::abs(t))) {
      throw PreconditionError("prioritize: state is not decayed to the ranking time");
    }
    scored.push_back({candidates[i], s.value(), c.last_event_before_clock(t), &c.id});
  }
  return order_candidates(std::move(scored));
}

std::vector<std::size_t> ReverseChronologicalRanker::rank(const UserId&, double t,
                                                          std::span<const std::size_t> candidates) {
  return rank_rchr(feed_, t, candidates);
}

NearestNeighborRanker::NearestNeighborRanker(std::span<const Cascade> feed,
                                             std::span<const Cascade> history,
                                             const FeatureStore& store,
                                             NearestNeighborOptions options)
    : Ranker(feed), history_(history.begin(), history.end()), store_(store), options_(options) {}

NearestNeighborRanker::Profile& NearestNeighborRanker::profile_for(const UserId& user) {
  auto [it, inserted] = profiles_.try_emplace(user);
  if (!inserted) return it->second;
  auto& comments = it->second.comments;
  for (auto source : {std::span<const Cascade>(history_), feed_}) {
    for (const Cascade& c : source) {
      for (const Event& e : c.comments) {
        if (e.publisher != user) continue;
        comments.emplace_back(c.clock_time(e), nn_event_vector(user, c, e, store_, options_));
      }
    }
  }
  std::stable_sort(comments.begin(), comments.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  return it->second;
}

std::vector<std::size_t> NearestNeighborRanker::rank(const UserId& user, double t,
                                                     std::span<const std::size_t> candidates) {
  Profile& p = profile_for(user);
  if (t < p.last_query) {
    p.consumed = 0;
    p.average.clear();
  }
  p.last_query = t;
  while (p.consumed < p.comments.size() && p.comments[p.consumed].first < t) {
    const auto& x = p.comments[p.consumed].second;
    if (p.average.empty()) {
      p.average = x;
    } else {
      for (std::size_t k = 0; k < x.size(); ++k) {
        p.average[k] = options_.smoothing * x[k] + (1.0 - options_.smoothing) * p.average[k];
      }
    }
    ++p.consumed;
  }
  std::optional<std::vector<double>> profile;
  if (!p.average.empty()) profile = p.average;
  return rank_nn(user, feed_, t, candidates, profile, store_, options_);
}

CoxRanker::CoxRanker(std::span<const Cascade> feed, const FeatureStore& store, CoxParams params,
                     std::string name)
    : Ranker(feed), store_(store), params_(std::move(params)), name_(std::move(name)) {}

std::vector<std::size_t> CoxRanker::rank(const UserId&, double t,
                                         std::span<const std::size_t> candidates) {
  return rank_cox(params_, feed_, t, candidates, store_);
}

IntensityRanker::IntensityRanker(std::span<const Cascade> feed, InfluenceModel model,
                                 std::string name, Mode mode)
    : Ranker(feed), model_(std::move(model)), name_(std::move(name)), mode_(mode) {}

IntensityState& IntensityRanker::advance(const UserId& user, std::size_t k, double t) {
  auto& per_cascade = slots_[user];
  if (per_cascade.empty()) per_cascade.resize(feed_.size());
  auto& slot = per_cascade[k];
  const Cascade& c = feed_[k];
  const double local = std::max(t - c.origin, 0.0);
  if (!slot || slot->state.last_update_time > local) {
    IntensityState s;
    s.user = user;
    s.cascade_id = c.id;
    s.post_term = model_.post(user, c.post);
    s.last_update_time = c.post.time;
    slot = Slot{std::move(s), 0};
  }
  while (slot->next < c.comments.size() && c.clock_time(c.comments[slot->next]) < t) {
    const Event& e = c.comments[slot->next];
    // Clock and local comparisons can disagree by an ulp; never step back.
    const double at = std::max(e.time, slot->state.last_update_time);
    slot->state = decay_state(std::move(slot->state), at, model_.rates);
    slot->state = absorb_influence(std::move(slot->state), at, model_.comment(user, e));
    ++slot->next;
  }
  slot->state = decay_state(std::move(slot->state),
                            std::max(local, slot->state.last_update_time), model_.rates);
  return slot->state;
}

double IntensityRanker::scratch(const UserId& user, std::size_t k, double t) const {
  const Cascade& c = feed_[k];
  const double local = t - c.origin;
  double total = model_.post(user, c.post) * std::exp(-model_.rates.post * (local - c.post.time));
  for (const Event& e : c.comments) {
    if (!(c.clock_time(e) < t)) break;
    total += model_.comment(user, e) * std::exp(-model_.rates.comment * (local - e.time));
  }
  return total;
}

double IntensityRanker::score(const UserId& user, std::size_t k, double t) {
  return mode_ == Mode::Streaming ? advance(user, k, t).value() : scratch(user, k, t);
}

std::vector<std::size_t> IntensityRanker::rank(const UserId& user, double t,
                                               std::span<const std::size_t> candidates) {
  if (mode_ == Mode::Streaming) {
    std::vector<IntensityState> states;
    states.reserve(candidates.size());
    for (std::size_t k : candidates) states.push_back(advance(user, k, t));
    return prioritize(feed_, candidates, states, t);
  }
  std::vector<ScoredCandidate> scored;
  scored.reserve(candidates.size());
  for (std::size_t k : candidates) {
    scored.push_back({k, scratch(user, k, t), feed_[k].last_event_before_clock(t), &feed_[k].id});
  }
  return order_candidates(std::move(scored));
}

double mean_activity(std::span<const Cascade> cascades, double begin, double end, double window) {
  if (!(end > begin)) throw PreconditionError("mean_activity: empty time window");
  double covered = 0.0;
  for (const Cascade& c : cascades) {
    std::vector<double> times{c.clock_time(c.post)};
    for (const Event& e : c.comments) times.push_back(c.clock_time(e));
    double run_start = times.front();
    double run_end = run_start + window;
    const auto flush = [&] {
      const double lo = std::max(run_start, begin);
      const double hi = std::min(run_end, end);
      if (hi > lo) covered += hi - lo;
    };
    for (std::size_t i = 1; i < times.size(); ++i) {
      if (times[i] <= run_end) {
        run_end = times[i] + window;
      } else {
        flush();
        run_start = times[i];
        run_end = times[i] + window;
      }
    }
    flush();
  }
  return covered / (end - begin);
}

double normalized_average_rank(double average_rank, double mean_activity) {
  if (!(mean_activity > 0.0)) throw PreconditionError("mean activity must be positive");
  return average_rank / mean_activity;
}

RankReport evaluate(Ranker& ranker, const EvalOptions& options) {
  const auto feed = ranker.feed();
  struct Arrival {
    double time;
    std::size_t cascade;
    std::size_t comment;
  };
  std::vector<Arrival> stream;
  for (std::size_t k = 0; k < feed.size(); ++k) {
    for (std::size_t i = 0; i < feed[k].comments.size(); ++i) {
      stream.push_back({feed[k].clock_time(feed[k].comments[i]), k, i});
    }
  }
  if (stream.empty()) throw PreconditionError("evaluate: the test feed has no comments");
  std::sort(stream.begin(), stream.end(), [](const Arrival& a, const Arrival& b) {
    return std::tie(a.time, a.cascade, a.comment) < std::tie(b.time, b.cascade, b.comment);
  });

  RankReport report;
  report.ranker = ranker.name();
  report.group = feed.front().group;
  double candidate_total = 0.0;
  for (const Arrival& a : stream) {
    const Event& comment = feed[a.cascade].comments[a.comment];
    std::vector<std::size_t> candidates = candidate_set(feed, a.time, options.policy);
    if (std::find(candidates.begin(), candidates.end(), a.cascade) == candidates.end()) {
      throw PreconditionError("evaluate: cascade " + feed[a.cascade].id +
                              " is not a candidate when it receives a comment; check the "
                              "candidate policy");
    }
    candidate_total += static_cast<double>(candidates.size());
    const auto order = ranker.rank(comment.publisher, a.time, candidates);
    const auto pos = std::find(order.begin(), order.end(), a.cascade);
    if (pos == order.end()) {
      throw Error("ranker " + ranker.name() + " dropped the commented cascade");
    }
    report.ranks.push_back(static_cast<std::size_t>(pos - order.begin()));
  }

  double begin = feed.front().origin;
  for (const Cascade& c : feed) begin = std::min(begin, c.origin);
  const double end = stream.back().time;
  report.average_rank =
      static_cast<double>(std::accumulate(report.ranks.begin(), report.ranks.end(), std::size_t{0})) /
      static_cast<double>(report.ranks.size());
  report.mean_candidates = candidate_total / static_cast<double>(stream.size());
  report.mean_activity = mean_activity(feed, begin, end, options.activity_window);
  report.normalized_average_rank = normalized_average_rank(report.average_rank, report.mean_activity);
  return report;
}

std::set<UserId> participants(std::span<const Cascade> cascades) {
  std::set<UserId> users;
  for (const Cascade& c : cascades) {
    users.insert(c.post.publisher);
    for (const Event& e : c.comments) users.insert(e.publisher);
  }
  return users;
}

std::vector<Cascade> select_test_cascades(std::span<const Cascade> cascades,
                                          const std::set<UserId>& known) {
  std::vector<Cascade> out;
  for (const Cascade& c : cascades) {
    bool ok = known.contains(c.post.publisher);
    for (const Event& e : c.comments) ok = ok && known.contains(e.publisher);
    if (ok) out.push_back(c);
  }
  return out;
}

}  // namespace hawkesfeed
