#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "hawkesfeed/baselines.hpp"
#include "hawkesfeed/feature_store.hpp"
#include "hawkesfeed/feed.hpp"
#include "hawkesfeed/intensity.hpp"
#include "hawkesfeed/types.hpp"

namespace hawkesfeed {

/// Initial influence of posts and comments on a user, plus decay rates. Both
/// the feature model and the pairwise baseline fit this shape.
struct InfluenceModel {
  std::function<double(const UserId&, const Event&)> post;
  std::function<double(const UserId&, const Event&)> comment;
  DecayRates rates;
};

/// The referenced params and store must outlive the returned model.
InfluenceModel feature_influence(const ModelParams& params, const FeatureStore& store);
InfluenceModel pairwise_influence(const PairwiseHawkesParams& params);

/// Orders candidates by the intensity held in their states, which must
/// already be decayed to clock time t (states[i] belongs to candidates[i]).
std::vector<std::size_t> prioritize(std::span<const Cascade> feed,
                                    std::span<const std::size_t> candidates,
                                    std::span<const IntensityState> states, double t);

/// Orders a user's candidate cascades at clock time t. Rankers only look at
/// events strictly before t.
class Ranker {
 public:
  explicit Ranker(std::span<const Cascade> feed) : feed_(feed) {}
  virtual ~Ranker() = default;

  virtual std::string name() const = 0;
  virtual std::vector<std::size_t> rank(const UserId& user, double t,
                                        std::span<const std::size_t> candidates) = 0;

  std::span<const Cascade> feed() const noexcept { return feed_; }

 protected:
  std::span<const Cascade> feed_;
};

class ReverseChronologicalRanker final : public Ranker {
 public:
  using Ranker::Ranker;
  std::string name() const override { return "RCHR"; }
  std::vector<std::size_t> rank(const UserId& user, double t,
                                std::span<const std::size_t> candidates) override;
};

/// Profiles are built from the user's comments in the training history and in
/// the feed, up to the ranking time.
class NearestNeighborRanker final : public Ranker {
 public:
  NearestNeighborRanker(std::span<const Cascade> feed, std::span<const Cascade> history,
                        const FeatureStore& store, NearestNeighborOptions options = {});
  std::string name() const override { return "NN"; }
  std::vector<std::size_t> rank(const UserId& user, double t,
                                std::span<const std::size_t> candidates) override;

 private:
  struct Profile {
    std::vector<std::pair<double, std::vector<double>>> comments;  // clock order
    std::size_t consumed = 0;
    std::vector<double> average;
    double last_query = -std::numeric_limits<double>::infinity();
  };
  Profile& profile_for(const UserId& user);

  std::vector<Cascade> history_;
  const FeatureStore& store_;
  NearestNeighborOptions options_;
  std::map<UserId, Profile> profiles_;
};

class CoxRanker final : public Ranker {
 public:
  CoxRanker(std::span<const Cascade> feed, const FeatureStore& store, CoxParams params,
            std::string name = "COX");
  std::string name() const override { return name_; }
  std::vector<std::size_t> rank(const UserId& user, double t,
                                std::span<const std::size_t> candidates) override;

 private:
  const FeatureStore& store_;
  CoxParams params_;
  std::string name_;
};

/// Ranks by intensity. In streaming mode each (user, cascade) pair keeps an
/// IntensityState that is decayed and absorbs comments as time advances; in
/// scratch mode every query re-sums all earlier events.
class IntensityRanker final : public Ranker {
 public:
  enum class Mode { Streaming, Scratch };

  IntensityRanker(std::span<const Cascade> feed, InfluenceModel model, std::string name,
                  Mode mode = Mode::Streaming);
  std::string name() const override { return name_; }
  std::vector<std::size_t> rank(const UserId& user, double t,
                                std::span<const std::size_t> candidates) override;

  /// Intensity of `user` on feed cascade k at clock time t, through the
  /// ranker's own path (streaming state or scratch sum).
  double score(const UserId& user, std::size_t k, double t);

 private:
  struct Slot {
    IntensityState state;
    std::size_t next = 0;  // first comment not yet absorbed
  };
  IntensityState& advance(const UserId& user, std::size_t k, double t);
  double scratch(const UserId& user, std::size_t k, double t) const;

  InfluenceModel model_;
  std::string name_;
  Mode mode_;
  std::map<UserId, std::vector<std::optional<Slot>>> slots_;
};

struct RankReport {
  std::string group;
  std::string ranker;
  double average_rank = 0.0;
  double normalized_average_rank = 0.0;
  double mean_activity = 0.0;
  double mean_candidates = 0.0;
  /// 0-based rank of the commented cascade, one per test comment.
  std::vector<std::size_t> ranks;
};

struct EvalOptions {
  CandidatePolicy policy = CandidatePolicy::AllOpen;
  double activity_window = kActivityWindow;
};

/// Replays the feed's comments in clock order. Each comment's cascade is
/// ranked among the candidates just before the comment arrives.
RankReport evaluate(Ranker& ranker, const EvalOptions& options = {});

/// Time average over [begin, end) of the number of cascades whose latest
/// event is at most `window` minutes old, computed exactly.
double mean_activity(std::span<const Cascade> cascades, double begin, double end,
                     double window = kActivityWindow);

double normalized_average_rank(double average_rank, double mean_activity);

/// Users who posted or commented anywhere in the corpus.
std::set<UserId> participants(std::span<const Cascade> cascades);

/// Keeps cascades whose every participant appears in `known`.
std::vector<Cascade> select_test_cascades(std::span<const Cascade> cascades,
                                          const std::set<UserId>& known);

}  // namespace hawkesfeed
