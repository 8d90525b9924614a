#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hawkesfeed/error.hpp"
#include "hawkesfeed/intensity.hpp"
#include "support/support.hpp"

using namespace hawkesfeed;
using namespace testsupport;

namespace {

struct Small {
  std::vector<UserId> users = make_users(3);
  std::mt19937_64 rng{11};
  FeatureStore store = random_store(users, 2, 2, 3, rng);
  ModelParams params = random_params(store, rng, 0.0, 0.5, 0.05, 0.3);
};

}  // namespace

TEST(Intensity, MatchesDirectSum) {
  Small s;
  const auto cascades = random_cascades(5, s.users, 3, 100.0, 12, s.rng);
  std::uniform_real_distribution<double> t(0.0, 100.0);
  for (const auto& c : cascades) {
    for (int i = 0; i < 20; ++i) {
      const double at = t(s.rng);
      for (const auto& u : s.users) {
        EXPECT_NEAR(intensity(u, c, at, s.params, s.store),
                    oracle_intensity(u, c, at, s.params, s.store), 1e-12);
      }
    }
  }
}

TEST(Intensity, LeftLimitAtCommentTime) {
  Small s;
  Cascade c;
  c.id = "c";
  c.window_end = 50.0;
  c.post = {0.0, "u0", {0.2, 0.4, 0.6}, "", ""};
  c.comments.push_back({10.0, "u1", {1.0, 1.0, 1.0}, "", ""});
  const double before = intensity("u2", c, 10.0, s.params, s.store);
  const double mu = post_influence("u2", c.post, s.params, s.store);
  EXPECT_DOUBLE_EQ(before, mu * std::exp(-0.05 * 10.0));
  const double a = comment_influence("u2", c.comments[0], s.params, s.store);
  EXPECT_NEAR(intensity("u2", c, std::nextafter(10.0, 11.0), s.params, s.store), before + a, 1e-12);
}

TEST(Intensity, PairVectorLayout) {
  Small s;
  const auto v = s.store.pair_features("u1", "u2");
  EXPECT_EQ(v, oracle_pair_vector("u1", "u2", s.store));
  EXPECT_EQ(s.store.pair_manifest().names.front(), "pub.c0");
  EXPECT_EQ(s.store.pair_manifest().sets.back(), FeatureSet::RltnUser);
}

TEST(Intensity, UnknownUserHasZeroFeatures) {
  Small s;
  for (double x : s.store.pair_features("ghost", "nobody")) EXPECT_EQ(x, 0.0);
  Event blank{0.0, "ghost", {}, "", ""};
  for (double x : s.store.content(blank)) EXPECT_EQ(x, 0.0);
  Event wrong{0.0, "ghost", {0.1}, "", ""};
  EXPECT_THROW(s.store.content(wrong), ConfigError);
}

TEST(Intensity, RejectsTimesOutsideWindow) {
  Small s;
  auto c = random_cascades(1, s.users, 3, 20.0, 3, s.rng).front();
  EXPECT_THROW(intensity("u0", c, -1.0, s.params, s.store), PreconditionError);
  EXPECT_THROW(intensity("u0", c, 21.0, s.params, s.store), PreconditionError);
}

TEST(Intensity, PostInfluenceDecayAfterThousandMinutes) {
  IntensityState s;
  s.post_term = 2.5;
  s = decay_state(s, 1000.0, DecayRates{});
  EXPECT_NEAR(s.post_term / 2.5, 0.36787944117144233, 1e-15);
}

TEST(IntensityState, StreamingMatchesScratch) {
  Small s;
  const auto c = random_cascades(1, s.users, 3, 80.0, 30, s.rng).front();
  for (const auto& u : s.users) {
    IntensityState st = initial_state(u, c, s.params, s.store);
    for (const auto& e : c.comments) {
      st = decay_state(st, e.time, s.params.rates());
      EXPECT_NEAR(st.value(), oracle_intensity(u, c, e.time, s.params, s.store), 1e-12);
      st = absorb_event(st, e, s.params, s.store);
    }
    st = decay_state(st, 79.0, s.params.rates());
    EXPECT_NEAR(st.value(), oracle_intensity(u, c, 79.0, s.params, s.store), 1e-12);
  }
}

TEST(IntensityState, RefusesToRewindOrAbsorbOffTime) {
  IntensityState st;
  st = decay_state(st, 5.0, DecayRates{});
  EXPECT_THROW(decay_state(st, 4.0, DecayRates{}), PreconditionError);
  EXPECT_THROW(absorb_influence(st, 6.0, 1.0), PreconditionError);
}

TEST(ModelParams, FlattenAssignRoundTrip) {
  Small s;
  const auto theta = s.params.flatten();
  EXPECT_EQ(theta.size(), s.params.dimension());
  ModelParams q = ModelParams::filled(s.store.pair_manifest(), s.store.content_manifest(), 0.0);
  q.assign(theta);
  EXPECT_EQ(q.flatten(), theta);
  q.scale(2.0);
  EXPECT_DOUBLE_EQ(q.flatten()[0], 2.0 * theta[0]);
}

TEST(ModelParams, ValidateRejectsNegativeWeightsAndRates) {
  Small s;
  auto p = s.params;
  p.gamma[0] = -0.1;
  EXPECT_THROW(p.validate(), ConfigError);
  p = s.params;
  p.omega_a = 0.0;
  EXPECT_THROW(p.validate(), ConfigError);
  p = s.params;
  p.beta.pop_back();
  EXPECT_THROW(p.validate(), ConfigError);
}

TEST(Cascade, ValidateAndTies) {
  Cascade c;
  c.id = "c";
  c.window_end = 10.0;
  c.post = {0.0, "a", {}, "", ""};
  c.comments = {{1.0, "b", {}, "", ""}, {1.0, "c", {}, "", ""}, {2.0, "a", {}, "", ""}};
  EXPECT_THROW(validate(c), PreconditionError);
  EXPECT_EQ(perturb_ties(c.comments), 1u);
  EXPECT_DOUBLE_EQ(c.comments[1].time, 1.0 + kTieEpsilon);
  EXPECT_NO_THROW(validate(c));
  c.comments.push_back({10.0, "d", {}, "", ""});
  EXPECT_THROW(validate(c), PreconditionError);
}

TEST(Cascade, ClockQueries) {
  Cascade c;
  c.origin = 100.0;
  c.window_end = 50.0;
  c.post = {0.0, "a", {}, "", ""};
  c.comments = {{5.0, "b", {}, "", ""}, {7.0, "c", {}, "", ""}};
  EXPECT_EQ(c.comments_before_clock(105.0), 0u);
  EXPECT_EQ(c.comments_before_clock(105.5), 1u);
  EXPECT_DOUBLE_EQ(c.last_event_before_clock(103.0), 100.0);
  EXPECT_DOUBLE_EQ(c.last_event_before_clock(110.0), 107.0);
}

TEST(Errors, ExitCodesPerClass) {
  EXPECT_EQ(ParseError("x", 3).exit_code(), 2);
  EXPECT_NE(std::string(ParseError("bad", 3).what()).find("line 3"), std::string::npos);
  EXPECT_EQ(ConfigError("x").exit_code(), 3);
  EXPECT_EQ(PreconditionError("x").exit_code(), 4);
  EXPECT_EQ(EstimationError("x").exit_code(), 5);
}

TEST(MinMaxScaler, ScalesClampsAndHandlesConstants) {
  const std::vector<std::vector<double>> rows{{0.0, 5.0, 2.0}, {10.0, 5.0, 4.0}};
  const auto s = MinMaxScaler::fit(rows, 3);
  EXPECT_EQ(s.transform(std::vector<double>{5.0, 5.0, 3.0}), (std::vector<double>{0.5, 0.0, 0.5}));
  EXPECT_EQ(s.transform(std::vector<double>{-1.0, 9.0, 8.0}), (std::vector<double>{0.0, 0.0, 1.0}));
  MinMaxScaler unfitted;
  std::vector<double> v{1.5, -0.5, 0.3};
  unfitted.transform_in_place(v);
  EXPECT_EQ(v, (std::vector<double>{1.0, 0.0, 0.3}));
}
