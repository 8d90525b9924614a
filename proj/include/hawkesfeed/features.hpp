#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "hawkesfeed/feature_store.hpp"
#include "hawkesfeed/types.hpp"

namespace hawkesfeed {

inline constexpr std::size_t kCharacterFeatures = 5;
inline constexpr std::size_t kRelationshipFeatures = 5;

/// activity, attractiveness, sociability, responsiveness, connectivity
const std::vector<std::string>& character_feature_names();
/// post_influence, comment_influence, direct_post_influence,
/// direct_comment_influence, co_commenting
const std::vector<std::string>& relationship_feature_names();

enum class LexiconMatch { Exact, PrefixWildcard };

struct LexiconCategory {
  std::string name;
  FeatureSet set = FeatureSet::Psy;
  std::vector<std::string> words;
};

/// Word categories used for content features. In PrefixWildcard mode an
/// entry ending in '*' matches every word starting with the part before it.
class Lexicon {
 public:
  explicit Lexicon(std::vector<LexiconCategory> categories,
                   LexiconMatch mode = LexiconMatch::Exact);

  const std::vector<LexiconCategory>& categories() const noexcept { return categories_; }
  LexiconMatch mode() const noexcept { return mode_; }
  bool matches(std::size_t category, std::string_view word) const;

  /// word_count and long_words (both Lng) followed by one entry per category.
  FeatureManifest content_manifest() const;

  /// Small lexicon holding the example words of the standard 13 categories.
  static Lexicon demo();
  /// The feature set a category belongs to when a lexicon file does not say.
  static FeatureSet default_set(std::string_view category);

 private:
  struct Index {
    std::unordered_set<std::string> exact;
    std::vector<std::string> prefixes;
  };
  std::vector<LexiconCategory> categories_;
  LexiconMatch mode_;
  std::vector<Index> index_;
};

/// Lowercases ASCII and splits on anything that is not a letter or digit.
std::vector<std::string> tokenize(std::string_view text);

/// [word count, words longer than 6 letters, hits per lexicon category].
std::vector<double> content_features(std::string_view text, const Lexicon& lexicon);

/// Raw counts for `user` over the corpus; all zeros for unknown users.
std::array<double, kCharacterFeatures> character_features(const UserId& user,
                                                          std::span<const Cascade> corpus);

/// Raw directed counts of `a` acting on `b`'s posts and comments.
std::array<double, kRelationshipFeatures> relationship_features(const UserId& a, const UserId& b,
                                                                std::span<const Cascade> corpus);

/// All raw character and relationship counts from a single scan. Only pairs
/// with some interaction are listed.
struct RawFeatures {
  std::map<UserId, std::vector<double>> character;
  std::map<std::pair<UserId, UserId>, std::vector<double>> relationship;
};
RawFeatures extract_raw_features(std::span<const Cascade> corpus);

/// Builds a normalized store from a training corpus. Character and
/// relationship bounds come from the training counts (unobserved pairs count
/// as zero rows); the content scaler is fit on the training events' current
/// content vectors. Event content is not modified.
FeatureStore build_feature_store(std::span<const Cascade> training,
                                 const FeatureManifest& content_manifest);

/// Replaces each event's content with features computed from its text.
/// Events without text get a zero vector.
void assign_text_features(std::span<Cascade> corpus, const Lexicon& lexicon);

/// Min-max scales (and clamps) every event's content vector.
void apply_content_scaler(std::span<Cascade> corpus, const MinMaxScaler& scaler);

/// Manifest for content vectors that carry no names (e.g. simulated data).
FeatureManifest generic_content_manifest(std::size_t dimension);

}  // namespace hawkesfeed
