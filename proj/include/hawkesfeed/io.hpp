#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hawkesfeed/feature_store.hpp"
#include "hawkesfeed/features.hpp"
#include "hawkesfeed/fit.hpp"
#include "hawkesfeed/rank_eval.hpp"
#include "hawkesfeed/simulate.hpp"
#include "hawkesfeed/types.hpp"

namespace hawkesfeed {

inline constexpr const char* kModelFormat = "hawkesfeed-model/1";
inline constexpr const char* kFeatureFormat = "hawkesfeed-features/1";

// ---------------------------------------------------------------------------
// Corpus: one cascade per line,
//   {"cascade_id", "group_id", "events": [{"t", "publisher", "wall_clock"?,
//    "text"?, "content_features"?}], "origin"?, "window_end"?}
// The first event is the post. Event times are minutes. When "origin" is
// absent the post's t is the group-clock origin and times are rebased to it.

struct CorpusReadOptions {
  /// Window used when a record carries no "window_end"; it is widened to
  /// cover the last event.
  double default_window = 10080.0;
};

std::vector<Cascade> read_corpus(std::istream& in, const CorpusReadOptions& options = {});
std::vector<Cascade> read_corpus_file(const std::string& path,
                                      const CorpusReadOptions& options = {});
void write_corpus(std::ostream& out, std::span<const Cascade> cascades);
void write_corpus_file(const std::string& path, std::span<const Cascade> cascades);

// ---------------------------------------------------------------------------
// Lexicon: one category per line, {"category", "words": [...], "set"?}.

Lexicon read_lexicon(std::istream& in, LexiconMatch mode = LexiconMatch::Exact);
Lexicon read_lexicon_file(const std::string& path, LexiconMatch mode = LexiconMatch::Exact);
void write_lexicon(std::ostream& out, const Lexicon& lexicon);

// ---------------------------------------------------------------------------
// Feature store, optionally with the lexicon that produced its content
// features.

struct FeatureFile {
  FeatureStore store;
  std::optional<Lexicon> lexicon;
};

void write_features(std::ostream& out, const FeatureFile& features);
void write_features_file(const std::string& path, const FeatureFile& features);
FeatureFile read_features(std::istream& in);
FeatureFile read_features_file(const std::string& path);

/// Fills in content vectors for events that have none: derived from text
/// through the lexicon and scaled with the store's content scaler. Events
/// that already carry content are left alone. Without a lexicon this is a
/// no-op.
void prepare_content(std::span<Cascade> corpus, const FeatureFile& features);

// ---------------------------------------------------------------------------
// Model

struct ModelFile {
  ModelParams params;
  Regularization zeta;
  std::optional<FitResult> diagnostics;
};

ModelFile model_file(const FitResult& result);
void write_model(std::ostream& out, const ModelFile& model);
void write_model_file(const std::string& path, const ModelFile& model);
ModelFile read_model(std::istream& in);
ModelFile read_model_file(const std::string& path);

// ---------------------------------------------------------------------------
// Reports: one record per group.

void write_report(std::ostream& out, std::span<const RankReport> reports);
std::vector<RankReport> read_report(std::istream& in);

// ---------------------------------------------------------------------------
// Simulation config. Features are either given as a feature store object or
// drawn uniformly from [0,1] with their own seed:
//   {"users": 8 | [...], "horizon", "post_interval", "event_cap", "seed",
//    "group", "cascades", "omega_mu", "omega_a",
//    "features": {"character": k, "relationship": k, "content": d,
//                 "seed": s, "density": p} | <feature store>,
//    "truth": {"alpha": [...], "beta": [...], "gamma": [...], "sigma": [...]}}

struct SimFile {
  SimConfig config;
  std::size_t cascades = 50;
};

SimFile read_sim_config(std::istream& in);
SimFile read_sim_config_file(const std::string& path);

/// Store with every user's character vector and every ordered pair's
/// relationship vector drawn uniformly from [0,1]; each relationship vector is
/// kept with probability `density`, otherwise left at zero.
FeatureStore random_feature_store(std::span<const UserId> users, std::size_t character_dim,
                                  std::size_t relationship_dim, std::size_t content_dim,
                                  std::uint64_t seed, double density = 1.0);

}  // namespace hawkesfeed
