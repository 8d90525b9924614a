#include "hawkesfeed/io.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "hawkesfeed/error.hpp"

namespace hawkesfeed {

using nlohmann::json;

namespace {

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  return out;
}

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

// Runs `body` on one parsed JSON line; any shape problem becomes a ParseError
// carrying the line number.
template <class F>
void each_record(std::istream& in, F&& body) {
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (blank(line)) continue;
    try {
      body(json::parse(line), number);
    } catch (const json::exception& e) {
      throw ParseError(e.what(), number);
    } catch (const ParseError& e) {
      if (e.line() != 0) throw;
      throw ParseError(e.what(), number);
    } catch (const Error& e) {
      throw ParseError(e.what(), number);
    }
  }
}

json parse_document(std::istream& in, const std::string& what) {
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(what + ": " + e.what());
  }
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_or_nan(const json& v) {
  return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
}

json manifest_json(const FeatureManifest& m) {
  json sets = json::array();
  for (FeatureSet s : m.sets) sets.push_back(to_string(s));
  return {{"names", m.names}, {"sets", sets}};
}

FeatureManifest manifest_from(const json& j) {
  FeatureManifest m;
  m.names = j.at("names").get<std::vector<std::string>>();
  for (const auto& s : j.at("sets")) m.sets.push_back(feature_set_from_string(s.get<std::string>()));
  if (m.names.size() != m.sets.size()) throw ParseError("manifest names and sets differ in length");
  return m;
}

json regularization_json(const Regularization& z) {
  return {{"alpha", z.alpha}, {"beta", z.beta}, {"gamma", z.gamma}, {"sigma", z.sigma}};
}

Regularization regularization_from(const json& j) {
  if (j.is_number()) return Regularization::shared(j.get<double>());
  return {j.at("alpha").get<double>(), j.at("beta").get<double>(), j.at("gamma").get<double>(),
          j.at("sigma").get<double>()};
}

json lexicon_json(const Lexicon& lexicon) {
  json out = json::array();
  for (const auto& c : lexicon.categories()) {
    out.push_back({{"category", c.name}, {"set", to_string(c.set)}, {"words", c.words}});
  }
  return out;
}

LexiconCategory category_from(const json& j) {
  LexiconCategory c;
  c.name = j.at("category").get<std::string>();
  c.words = j.at("words").get<std::vector<std::string>>();
  c.set = j.contains("set") ? feature_set_from_string(j.at("set").get<std::string>())
                            : Lexicon::default_set(c.name);
  return c;
}

const char* match_name(LexiconMatch m) { return m == LexiconMatch::Exact ? "exact" : "prefix"; }

LexiconMatch match_from(const std::string& s) {
  if (s == "exact") return LexiconMatch::Exact;
  if (s == "prefix") return LexiconMatch::PrefixWildcard;
  throw ParseError("unknown lexicon match mode '" + s + "'");
}

json store_json(const FeatureStore& store) {
  json characters = json::object();
  for (const auto& [u, v] : store.characters()) characters[u] = v;
  json relationships = json::array();
  for (const auto& [from, row] : store.relationships()) {
    for (const auto& [to, v] : row) {
      relationships.push_back({{"from", from}, {"to", to}, {"values", v}});
    }
  }
  json out = {{"format", kFeatureFormat},
              {"character_names", store.character_names()},
              {"relationship_names", store.relationship_names()},
              {"content", manifest_json(store.content_manifest())},
              {"characters", characters},
              {"relationships", relationships}};
  if (store.content_scaler().fitted()) {
    out["content_scaler"] = {{"lower", store.content_scaler().lower()},
                             {"upper", store.content_scaler().upper()}};
  }
  return out;
}

FeatureStore store_from(const json& j) {
  if (j.value("format", std::string()) != kFeatureFormat) {
    throw ParseError(std::string("feature file: expected format ") + kFeatureFormat);
  }
  FeatureStore store(j.at("character_names").get<std::vector<std::string>>(),
                     j.at("relationship_names").get<std::vector<std::string>>(),
                     manifest_from(j.at("content")));
  for (const auto& [u, v] : j.at("characters").items()) {
    store.set_character(u, v.get<std::vector<double>>());
  }
  for (const auto& r : j.at("relationships")) {
    store.set_relationship(r.at("from").get<std::string>(), r.at("to").get<std::string>(),
                           r.at("values").get<std::vector<double>>());
  }
  if (j.contains("content_scaler")) {
    const auto& s = j.at("content_scaler");
    store.content_scaler() = MinMaxScaler(s.at("lower").get<std::vector<double>>(),
                                          s.at("upper").get<std::vector<double>>());
  }
  return store;
}

json diagnostics_json(const FitResult& r) {
  json trace = json::array();
  for (double v : r.objective_trace) trace.push_back(finite_or_null(v));
  return {{"iterations", r.iterations},
          {"converged", r.converged},
          {"projected_gradient_norm", finite_or_null(r.projected_gradient_norm)},
          {"log_likelihood", finite_or_null(r.log_likelihood)},
          {"objective_trace", trace}};
}

}  // namespace

// ---------------------------------------------------------------------------
// Corpus

std::vector<Cascade> read_corpus(std::istream& in, const CorpusReadOptions& options) {
  std::vector<Cascade> out;
  each_record(in, [&](const json& j, std::size_t) {
    Cascade c;
    c.id = j.at("cascade_id").get<std::string>();
    c.group = j.at("group_id").get<std::string>();
    const json& events = j.at("events");
    if (!events.is_array() || events.empty()) throw ParseError("cascade " + c.id + " has no post");

    std::vector<Event> parsed;
    parsed.reserve(events.size());
    double previous = -std::numeric_limits<double>::infinity();
    for (const json& e : events) {
      Event ev;
      ev.time = e.at("t").get<double>();
      if (!std::isfinite(ev.time)) throw ParseError("cascade " + c.id + ": non-finite time");
      if (ev.time < previous) throw ParseError("cascade " + c.id + ": events out of order");
      previous = ev.time;
      ev.publisher = e.at("publisher").get<std::string>();
      if (e.contains("wall_clock")) ev.wall_clock = e.at("wall_clock").get<std::string>();
      if (e.contains("text")) ev.text = e.at("text").get<std::string>();
      if (e.contains("content_features")) {
        ev.content = e.at("content_features").get<std::vector<double>>();
      }
      parsed.push_back(std::move(ev));
    }

    if (j.contains("origin")) {
      c.origin = j.at("origin").get<double>();
      if (parsed.front().time != 0.0) {
        throw ParseError("cascade " + c.id + ": with an origin the post must be at t = 0");
      }
    } else {
      c.origin = parsed.front().time;
      for (Event& e : parsed) e.time -= c.origin;
    }
    c.post = std::move(parsed.front());
    c.comments.assign(std::make_move_iterator(parsed.begin() + 1),
                      std::make_move_iterator(parsed.end()));
    perturb_ties(c.comments, c.post.time);

    const double last = c.comments.empty() ? c.post.time : c.comments.back().time;
    if (j.contains("window_end")) {
      c.window_end = j.at("window_end").get<double>();
    } else {
      c.window_end = std::max(options.default_window, std::floor(last) + 1.0);
    }
    try {
      validate(c);
    } catch (const PreconditionError& e) {
      throw ParseError(e.what());
    }
    out.push_back(std::move(c));
  });
  return out;
}

std::vector<Cascade> read_corpus_file(const std::string& path, const CorpusReadOptions& options) {
  auto in = open_input(path);
  try {
    return read_corpus(in, options);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_corpus(std::ostream& out, std::span<const Cascade> cascades) {
  const auto event_json = [](const Event& e) {
    json j = {{"t", e.time}, {"publisher", e.publisher}};
    if (!e.wall_clock.empty()) j["wall_clock"] = e.wall_clock;
    if (!e.text.empty()) j["text"] = e.text;
    if (!e.content.empty()) j["content_features"] = e.content;
    return j;
  };
  for (const Cascade& c : cascades) {
    json events = json::array({event_json(c.post)});
    for (const Event& e : c.comments) events.push_back(event_json(e));
    json record = {{"cascade_id", c.id},
                   {"group_id", c.group},
                   {"origin", c.origin},
                   {"window_end", c.window_end},
                   {"events", std::move(events)}};
    out << record.dump() << '\n';
  }
}

void write_corpus_file(const std::string& path, std::span<const Cascade> cascades) {
  auto out = open_output(path);
  write_corpus(out, cascades);
}

// ---------------------------------------------------------------------------
// Lexicon

Lexicon read_lexicon(std::istream& in, LexiconMatch mode) {
  std::vector<LexiconCategory> categories;
  each_record(in, [&](const json& j, std::size_t) { categories.push_back(category_from(j)); });
  try {
    return Lexicon(std::move(categories), mode);
  } catch (const ConfigError& e) {
    throw ParseError(std::string("lexicon: ") + e.what());
  }
}

Lexicon read_lexicon_file(const std::string& path, LexiconMatch mode) {
  auto in = open_input(path);
  try {
    return read_lexicon(in, mode);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_lexicon(std::ostream& out, const Lexicon& lexicon) {
  for (const auto& record : lexicon_json(lexicon)) out << record.dump() << '\n';
}

// ---------------------------------------------------------------------------
// Features

void write_features(std::ostream& out, const FeatureFile& features) {
  json j = store_json(features.store);
  if (features.lexicon) {
    j["lexicon"] = lexicon_json(*features.lexicon);
    j["lexicon_match"] = match_name(features.lexicon->mode());
  }
  out << j.dump() << '\n';
}

void write_features_file(const std::string& path, const FeatureFile& features) {
  auto out = open_output(path);
  write_features(out, features);
}

FeatureFile read_features(std::istream& in) {
  const json j = parse_document(in, "feature file");
  try {
    FeatureFile f{store_from(j), std::nullopt};
    if (j.contains("lexicon")) {
      std::vector<LexiconCategory> categories;
      for (const auto& c : j.at("lexicon")) categories.push_back(category_from(c));
      f.lexicon.emplace(std::move(categories), match_from(j.value("lexicon_match", "exact")));
    }
    return f;
  } catch (const json::exception& e) {
    throw ParseError(std::string("feature file: ") + e.what());
  }
}

FeatureFile read_features_file(const std::string& path) {
  auto in = open_input(path);
  try {
    return read_features(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void prepare_content(std::span<Cascade> corpus, const FeatureFile& features) {
  if (!features.lexicon) return;
  const auto fill = [&](Event& e) {
    if (!e.content.empty()) return;
    e.content = content_features(e.text, *features.lexicon);
    features.store.content_scaler().transform_in_place(e.content);
  };
  for (Cascade& c : corpus) {
    fill(c.post);
    for (Event& e : c.comments) fill(e);
  }
}

// ---------------------------------------------------------------------------
// Model

ModelFile model_file(const FitResult& result) { return {result.params, result.zeta, result}; }

void write_model(std::ostream& out, const ModelFile& model) {
  const ModelParams& p = model.params;
  json j = {{"format", kModelFormat},
            {"pair_features", manifest_json(p.pair_manifest)},
            {"content_features", manifest_json(p.content_manifest)},
            {"alpha", p.alpha},
            {"beta", p.beta},
            {"gamma", p.gamma},
            {"sigma", p.sigma},
            {"omega_mu", p.omega_mu},
            {"omega_a", p.omega_a},
            {"zeta", regularization_json(model.zeta)}};
  if (model.diagnostics) j["diagnostics"] = diagnostics_json(*model.diagnostics);
  out << j.dump() << '\n';
}

void write_model_file(const std::string& path, const ModelFile& model) {
  auto out = open_output(path);
  write_model(out, model);
}

ModelFile read_model(std::istream& in) {
  const json j = parse_document(in, "model file");
  try {
    if (j.value("format", std::string()) != kModelFormat) {
      throw ParseError(std::string("model file: expected format ") + kModelFormat);
    }
    ModelFile m;
    m.params.pair_manifest = manifest_from(j.at("pair_features"));
    m.params.content_manifest = manifest_from(j.at("content_features"));
    m.params.alpha = j.at("alpha").get<std::vector<double>>();
    m.params.beta = j.at("beta").get<std::vector<double>>();
    m.params.gamma = j.at("gamma").get<std::vector<double>>();
    m.params.sigma = j.at("sigma").get<std::vector<double>>();
    m.params.omega_mu = j.at("omega_mu").get<double>();
    m.params.omega_a = j.at("omega_a").get<double>();
    m.zeta = regularization_from(j.at("zeta"));
    if (j.contains("diagnostics")) {
      const json& d = j.at("diagnostics");
      FitResult r;
      r.params = m.params;
      r.zeta = m.zeta;
      r.iterations = d.at("iterations").get<int>();
      r.converged = d.at("converged").get<bool>();
      r.projected_gradient_norm = number_or_nan(d.at("projected_gradient_norm"));
      r.log_likelihood = number_or_nan(d.at("log_likelihood"));
      for (const auto& v : d.at("objective_trace")) r.objective_trace.push_back(number_or_nan(v));
      m.diagnostics = std::move(r);
    }
    try {
      m.params.validate();
    } catch (const ConfigError& e) {
      throw ParseError(std::string("model file: ") + e.what());
    }
    return m;
  } catch (const json::exception& e) {
    throw ParseError(std::string("model file: ") + e.what());
  }
}

ModelFile read_model_file(const std::string& path) {
  auto in = open_input(path);
  try {
    return read_model(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Reports

void write_report(std::ostream& out, std::span<const RankReport> reports) {
  for (const RankReport& r : reports) {
    json j = {{"group", r.group},
              {"ranker", r.ranker},
              {"comments", r.ranks.size()},
              {"average_rank", finite_or_null(r.average_rank)},
              {"normalized_average_rank", finite_or_null(r.normalized_average_rank)},
              {"mean_activity", finite_or_null(r.mean_activity)},
              {"mean_candidates", finite_or_null(r.mean_candidates)},
              {"ranks", r.ranks}};
    out << j.dump() << '\n';
  }
}

std::vector<RankReport> read_report(std::istream& in) {
  std::vector<RankReport> out;
  each_record(in, [&](const json& j, std::size_t) {
    RankReport r;
    r.group = j.at("group").get<std::string>();
    r.ranker = j.at("ranker").get<std::string>();
    r.average_rank = number_or_nan(j.at("average_rank"));
    r.normalized_average_rank = number_or_nan(j.at("normalized_average_rank"));
    r.mean_activity = number_or_nan(j.at("mean_activity"));
    r.mean_candidates = number_or_nan(j.at("mean_candidates"));
    r.ranks = j.at("ranks").get<std::vector<std::size_t>>();
    out.push_back(std::move(r));
  });
  return out;
}

// ---------------------------------------------------------------------------
// Simulation config

FeatureStore random_feature_store(std::span<const UserId> users, std::size_t character_dim,
                                  std::size_t relationship_dim, std::size_t content_dim,
                                  std::uint64_t seed, double density) {
  if (!(density >= 0.0 && density <= 1.0)) throw ConfigError("density must lie in [0,1]");
  std::vector<std::string> chr, rel;
  for (std::size_t k = 0; k < character_dim; ++k) chr.push_back("chr_" + std::to_string(k));
  for (std::size_t k = 0; k < relationship_dim; ++k) rel.push_back("rel_" + std::to_string(k));
  FeatureStore store(chr, rel, generic_content_manifest(content_dim));

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto draw = [&](std::size_t n) {
    std::vector<double> v(n);
    for (double& x : v) x = unit(rng);
    return v;
  };
  for (const UserId& u : users) store.set_character(u, draw(character_dim));
  for (const UserId& from : users) {
    for (const UserId& to : users) {
      if (from == to) continue;
      auto v = draw(relationship_dim);
      if (unit(rng) < density) store.set_relationship(from, to, std::move(v));
    }
  }
  return store;
}

SimFile read_sim_config(std::istream& in) {
  const json j = parse_document(in, "simulation config");
  try {
    SimFile f;
    SimConfig& c = f.config;
    const json& users = j.at("users");
    if (users.is_number_unsigned()) {
      for (std::size_t i = 0; i < users.get<std::size_t>(); ++i) c.users.push_back("u" + std::to_string(i));
    } else {
      c.users = users.get<std::vector<UserId>>();
    }
    c.horizon = j.value("horizon", c.horizon);
    c.post_interval = j.value("post_interval", c.post_interval);
    c.event_cap = j.value("event_cap", c.event_cap);
    c.seed = j.value("seed", c.seed);
    c.group = j.value("group", c.group);
    f.cascades = j.value("cascades", f.cascades);

    const json& feats = j.at("features");
    if (feats.contains("format")) {
      c.store = store_from(feats);
    } else {
      c.store = random_feature_store(c.users, feats.at("character").get<std::size_t>(),
                                     feats.at("relationship").get<std::size_t>(),
                                     feats.at("content").get<std::size_t>(),
                                     feats.value("seed", std::uint64_t{0}),
                                     feats.value("density", 1.0));
    }

    const json& truth = j.at("truth");
    c.truth.pair_manifest = c.store.pair_manifest();
    c.truth.content_manifest = c.store.content_manifest();
    c.truth.alpha = truth.at("alpha").get<std::vector<double>>();
    c.truth.beta = truth.at("beta").get<std::vector<double>>();
    c.truth.gamma = truth.at("gamma").get<std::vector<double>>();
    c.truth.sigma = truth.at("sigma").get<std::vector<double>>();
    c.truth.omega_mu = j.value("omega_mu", DecayRates{}.post);
    c.truth.omega_a = j.value("omega_a", DecayRates{}.comment);
    c.validate();
    return f;
  } catch (const json::exception& e) {
    throw ParseError(std::string("simulation config: ") + e.what());
  }
}

SimFile read_sim_config_file(const std::string& path) {
  auto in = open_input(path);
  try {
    return read_sim_config(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace hawkesfeed
