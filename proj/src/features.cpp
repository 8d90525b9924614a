#include "hawkesfeed/features.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "hawkesfeed/error.hpp"

namespace hawkesfeed {

const std::vector<std::string>& character_feature_names() {
  static const std::vector<std::string> names{"activity", "attractiveness", "sociability",
                                              "responsiveness", "connectivity"};
  return names;
}

const std::vector<std::string>& relationship_feature_names() {
  static const std::vector<std::string> names{"post_influence", "comment_influence",
                                              "direct_post_influence",
                                              "direct_comment_influence", "co_commenting"};
  return names;
}

Lexicon::Lexicon(std::vector<LexiconCategory> categories, LexiconMatch mode)
    : categories_(std::move(categories)), mode_(mode) {
  std::set<std::string> seen;
  for (const auto& cat : categories_) {
    if (cat.name.empty()) throw ConfigError("lexicon category without a name");
    if (!seen.insert(cat.name).second) {
      throw ConfigError("duplicate lexicon category '" + cat.name + "'");
    }
    if (cat.words.empty()) throw ConfigError("lexicon category '" + cat.name + "' is empty");
    Index idx;
    for (const auto& w : cat.words) {
      if (w.empty()) throw ConfigError("empty word in lexicon category '" + cat.name + "'");
      for (unsigned char ch : w) {
        if (std::isupper(ch)) {
          throw ConfigError("lexicon word '" + w + "' is not lowercase");
        }
      }
      if (mode_ == LexiconMatch::PrefixWildcard && w.back() == '*') {
        idx.prefixes.push_back(w.substr(0, w.size() - 1));
      } else {
        idx.exact.insert(w);
      }
    }
    index_.push_back(std::move(idx));
  }
}

bool Lexicon::matches(std::size_t category, std::string_view word) const {
  const Index& idx = index_.at(category);
  if (idx.exact.contains(std::string(word))) return true;
  return std::any_of(idx.prefixes.begin(), idx.prefixes.end(),
                     [&](const std::string& p) { return word.starts_with(p); });
}

FeatureManifest Lexicon::content_manifest() const {
  FeatureManifest m;
  m.names = {"word_count", "long_words"};
  m.sets = {FeatureSet::Lng, FeatureSet::Lng};
  for (const auto& cat : categories_) {
    m.names.push_back(cat.name);
    m.sets.push_back(cat.set);
  }
  return m;
}

FeatureSet Lexicon::default_set(std::string_view category) {
  static const std::set<std::string, std::less<>> linguistic{
      "pronouns", "common_verbs", "adverbs", "quantifiers", "numbers", "swear_words"};
  return linguistic.contains(category) ? FeatureSet::Lng : FeatureSet::Psy;
}

Lexicon Lexicon::demo() {
  const std::vector<std::pair<std::string, std::vector<std::string>>> table{
      {"pronouns", {"i", "them", "itself"}},
      {"common_verbs", {"walk", "went", "see"}},
      {"adverbs", {"very", "really", "quickly"}},
      {"quantifiers", {"few", "many", "much"}},
      {"numbers", {"second", "thousand"}},
      {"swear_words", {"damn", "piss", "fuck"}},
      {"social_processes", {"mate", "talk", "they", "child"}},
      {"affective_processes", {"happy", "cried", "abandon"}},
      {"positive_emotion", {"love", "nice", "sweet"}},
      {"negative_emotion", {"hurt", "ugly", "nasty"}},
      {"cognitive_processes", {"cause", "know", "ought"}},
      {"perceptual_processes", {"observing", "heard", "feeling"}},
      {"biological_processes", {"eat", "blood", "pain"}},
  };
  std::vector<LexiconCategory> cats;
  for (const auto& [name, words] : table) cats.push_back({name, default_set(name), words});
  return Lexicon(std::move(cats));
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char ch : text) {
    if (std::isalnum(ch)) {
      current.push_back(static_cast<char>(std::tolower(ch)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::vector<double> content_features(std::string_view text, const Lexicon& lexicon) {
  const std::size_t n_cat = lexicon.categories().size();
  std::vector<double> out(2 + n_cat, 0.0);
  for (const auto& tok : tokenize(text)) {
    out[0] += 1.0;
    if (tok.size() > 6) out[1] += 1.0;
    for (std::size_t k = 0; k < n_cat; ++k) {
      if (lexicon.matches(k, tok)) out[2 + k] += 1.0;
    }
  }
  return out;
}

std::array<double, kCharacterFeatures> character_features(const UserId& user,
                                                          std::span<const Cascade> corpus) {
  if (corpus.empty()) throw PreconditionError("character_features: empty corpus");
  std::array<double, kCharacterFeatures> f{};
  std::set<std::string> posts_commented;
  std::set<UserId> authors_commented;
  for (const Cascade& c : corpus) {
    const bool own = c.post.publisher == user;
    if (own) f[0] += 1.0;
    for (const Event& e : c.comments) {
      if (own && e.publisher != user) f[1] += 1.0;
      if (e.publisher == user) {
        f[2] += 1.0;
        posts_commented.insert(c.id);
        if (!own) authors_commented.insert(c.post.publisher);
      }
    }
  }
  f[3] = static_cast<double>(posts_commented.size());
  f[4] = static_cast<double>(authors_commented.size());
  return f;
}

std::array<double, kRelationshipFeatures> relationship_features(const UserId& a, const UserId& b,
                                                                std::span<const Cascade> corpus) {
  if (corpus.empty()) throw PreconditionError("relationship_features: empty corpus");
  std::array<double, kRelationshipFeatures> f{};
  for (const Cascade& c : corpus) {
    const bool on_b_post = c.post.publisher == b;
    bool b_commented = false;
    bool co_commented = false;
    for (std::size_t i = 0; i < c.comments.size(); ++i) {
      const Event& e = c.comments[i];
      if (e.publisher == a) {
        if (on_b_post) f[0] += 1.0;
        if (b_commented) {
          f[1] += 1.0;
          co_commented = true;
        }
        if (on_b_post && i == 0) f[2] += 1.0;
        if (i > 0 && c.comments[i - 1].publisher == b) f[3] += 1.0;
      }
      if (e.publisher == b) b_commented = true;
    }
    if (co_commented) f[4] += 1.0;
  }
  return f;
}

RawFeatures extract_raw_features(std::span<const Cascade> corpus) {
  RawFeatures raw;
  const auto chr = [&raw](const UserId& u) -> std::vector<double>& {
    auto [it, _] = raw.character.try_emplace(u, kCharacterFeatures, 0.0);
    return it->second;
  };
  const auto rel = [&raw](const UserId& a, const UserId& b) -> std::vector<double>& {
    auto [it, _] = raw.relationship.try_emplace({a, b}, kRelationshipFeatures, 0.0);
    return it->second;
  };
  std::map<UserId, std::set<std::string>> posts_commented;
  std::map<UserId, std::set<UserId>> authors_commented;

  for (const Cascade& c : corpus) {
    const UserId& author = c.post.publisher;
    chr(author)[0] += 1.0;
    std::set<UserId> earlier;  // distinct commenters seen so far
    std::set<std::pair<UserId, UserId>> co_pairs;
    for (std::size_t i = 0; i < c.comments.size(); ++i) {
      const UserId& a = c.comments[i].publisher;
      chr(a)[2] += 1.0;
      posts_commented[a].insert(c.id);
      if (a != author) {
        chr(author)[1] += 1.0;
        authors_commented[a].insert(author);
      }
      rel(a, author)[0] += 1.0;
      if (i == 0) rel(a, author)[2] += 1.0;
      if (i > 0) rel(a, c.comments[i - 1].publisher)[3] += 1.0;
      for (const UserId& b : earlier) {
        rel(a, b)[1] += 1.0;
        co_pairs.emplace(a, b);
      }
      earlier.insert(a);
    }
    for (const auto& [a, b] : co_pairs) rel(a, b)[4] += 1.0;
  }
  for (const auto& [u, posts] : posts_commented) chr(u)[3] = static_cast<double>(posts.size());
  for (const auto& [u, authors] : authors_commented) {
    chr(u)[4] = static_cast<double>(authors.size());
  }
  return raw;
}

FeatureStore build_feature_store(std::span<const Cascade> training,
                                 const FeatureManifest& content_manifest) {
  if (training.empty()) throw PreconditionError("build_feature_store: empty training corpus");
  const RawFeatures raw = extract_raw_features(training);
  FeatureStore store(character_feature_names(), relationship_feature_names(), content_manifest);

  std::vector<std::vector<double>> rows;
  for (const auto& [_, v] : raw.character) rows.push_back(v);
  const MinMaxScaler chr_scaler = MinMaxScaler::fit(rows, kCharacterFeatures);

  rows.assign(1, std::vector<double>(kRelationshipFeatures, 0.0));
  for (const auto& [_, v] : raw.relationship) rows.push_back(v);
  const MinMaxScaler rel_scaler = MinMaxScaler::fit(rows, kRelationshipFeatures);

  for (const auto& [u, v] : raw.character) store.set_character(u, chr_scaler.transform(v));
  for (const auto& [key, v] : raw.relationship) {
    store.set_relationship(key.first, key.second, rel_scaler.transform(v));
  }

  rows.clear();
  const auto add_content = [&rows](const Event& e) {
    if (!e.content.empty()) rows.push_back(e.content);
  };
  for (const Cascade& c : training) {
    add_content(c.post);
    for (const Event& e : c.comments) add_content(e);
  }
  store.content_scaler() = MinMaxScaler::fit(rows, content_manifest.size());
  return store;
}

void assign_text_features(std::span<Cascade> corpus, const Lexicon& lexicon) {
  for (Cascade& c : corpus) {
    c.post.content = content_features(c.post.text, lexicon);
    for (Event& e : c.comments) e.content = content_features(e.text, lexicon);
  }
}

void apply_content_scaler(std::span<Cascade> corpus, const MinMaxScaler& scaler) {
  for (Cascade& c : corpus) {
    if (!c.post.content.empty()) scaler.transform_in_place(c.post.content);
    for (Event& e : c.comments) {
      if (!e.content.empty()) scaler.transform_in_place(e.content);
    }
  }
}

FeatureManifest generic_content_manifest(std::size_t dimension) {
  FeatureManifest m;
  for (std::size_t k = 0; k < dimension; ++k) {
    m.names.push_back("content_" + std::to_string(k));
    m.sets.push_back(k < (dimension + 1) / 2 ? FeatureSet::Lng : FeatureSet::Psy);
  }
  return m;
}

}  // namespace hawkesfeed
