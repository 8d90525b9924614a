// hawkesfeed: fit, simulate and evaluate feed prioritization models.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hawkesfeed/baselines.hpp"
#include "hawkesfeed/error.hpp"
#include "hawkesfeed/features.hpp"
#include "hawkesfeed/fit.hpp"
#include "hawkesfeed/io.hpp"
#include "hawkesfeed/rank_eval.hpp"
#include "hawkesfeed/simulate.hpp"

namespace hf = hawkesfeed;

namespace {

const std::vector<std::string> kRankers = {"RCHR",    "NN",       "COX-LNG",  "COX-PSY",
                                           "HWK",     "HWK-CHR",  "HWK-RLTN", "HWK-LNG",
                                           "HWK-PSY", "HWK-ALL"};

void warn(const std::string& message) { std::cerr << "warning: " << message << '\n'; }

std::map<std::string, std::vector<hf::Cascade>> by_group(std::vector<hf::Cascade> corpus) {
  std::map<std::string, std::vector<hf::Cascade>> out;
  for (auto& c : corpus) out[c.group].push_back(std::move(c));
  for (auto& [_, cs] : out) {
    std::stable_sort(cs.begin(), cs.end(), [](const hf::Cascade& a, const hf::Cascade& b) {
      return a.origin < b.origin;
    });
  }
  return out;
}

std::size_t content_dimension(std::span<const hf::Cascade> corpus) {
  for (const auto& c : corpus) {
    if (!c.post.content.empty()) return c.post.content.size();
    for (const auto& e : c.comments) {
      if (!e.content.empty()) return e.content.size();
    }
  }
  return 0;
}

// Feature store learned from a corpus whose content vectors are already
// normalized.
hf::FeatureFile features_from(std::span<const hf::Cascade> training, std::size_t content_dim) {
  hf::FeatureFile f{hf::build_feature_store(training, hf::generic_content_manifest(content_dim)),
                    std::nullopt};
  f.store.content_scaler() = hf::MinMaxScaler();
  return f;
}

std::vector<hf::UserId> population(std::span<const hf::Cascade> corpus) {
  const auto users = hf::participants(corpus);
  return {users.begin(), users.end()};
}

struct FitFlags {
  double zeta = 0.0;
  bool cv = false;
  std::vector<double> grid;
  std::size_t folds = 5;
  int max_iterations = 5000;
  double omega_mu = hf::DecayRates{}.post;
  double omega_a = hf::DecayRates{}.comment;

  void add(CLI::App* app) {
    app->add_option("--zeta", zeta, "L1 penalty shared by all weight vectors")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    app->add_flag("--cv", cv, "Choose the penalty by temporal cross-validation");
    app->add_option("--zeta-grid", grid, "Penalty candidates for --cv (default 0 0.01 0.1 1 10)");
    app->add_option("--folds", folds, "Cross-validation folds")->capture_default_str();
    app->add_option("--max-iter", max_iterations, "Optimizer iteration limit")
        ->capture_default_str();
    app->add_option("--omega-mu", omega_mu, "Decay rate of post influence (1/min)")
        ->capture_default_str();
    app->add_option("--omega-a", omega_a, "Decay rate of comment influence (1/min)")
        ->capture_default_str();
  }

  hf::FitConfig config(const std::string& variant) const {
    hf::FitConfig c;
    c.zeta = hf::Regularization::shared(zeta);
    if (!grid.empty()) {
      c.zeta_grid.clear();
      for (double z : grid) c.zeta_grid.push_back(hf::Regularization::shared(z));
    }
    c.folds = folds;
    c.max_iterations = max_iterations;
    c.rates = {omega_mu, omega_a};
    c.feature_sets = hf::feature_sets_for(variant);
    c.validate();
    return c;
  }
};

hf::FitResult run_fit(std::span<const hf::Cascade> corpus, const hf::FeatureStore& store,
                      const FitFlags& flags, const std::string& variant) {
  hf::FitConfig config = flags.config(variant);
  const auto users = population(corpus);
  if (flags.cv) {
    const auto cv = hf::cross_validate(corpus, store, users, config);
    config.zeta = cv.best;
  }
  return hf::fit(corpus, store, users, config);
}

// ---------------------------------------------------------------------------

int cmd_extract(const std::string& corpus_path, const std::string& lexicon_path,
                const std::string& match, const std::string& out_path) {
  auto corpus = hf::read_corpus_file(corpus_path);
  if (lexicon_path.empty()) {
    hf::write_features_file(out_path, features_from(corpus, content_dimension(corpus)));
    return 0;
  }
  hf::Lexicon lexicon = hf::read_lexicon_file(
      lexicon_path, match == "prefix" ? hf::LexiconMatch::PrefixWildcard : hf::LexiconMatch::Exact);
  hf::assign_text_features(corpus, lexicon);
  hf::FeatureFile f{hf::build_feature_store(corpus, lexicon.content_manifest()), std::move(lexicon)};
  hf::write_features_file(out_path, f);
  return 0;
}

int cmd_fit(const std::string& corpus_path, const std::string& features_path,
            const std::string& group, const std::string& variant, const FitFlags& flags,
            const std::string& out_path) {
  auto corpus = hf::read_corpus_file(corpus_path);
  if (!group.empty()) {
    std::erase_if(corpus, [&](const hf::Cascade& c) { return c.group != group; });
    if (corpus.empty()) throw hf::PreconditionError("no cascades in group " + group);
  }
  const hf::FeatureFile features = features_path.empty()
                                       ? features_from(corpus, content_dimension(corpus))
                                       : hf::read_features_file(features_path);
  hf::prepare_content(corpus, features);
  const hf::FitResult result = run_fit(corpus, features.store, flags, variant);
  if (!result.converged) warn("optimizer stopped before converging");
  hf::write_model_file(out_path, hf::model_file(result));
  return 0;
}

int cmd_simulate(const std::string& config_path, std::optional<std::uint64_t> seed,
                 std::optional<std::size_t> cascades, const std::string& out_path,
                 const std::string& features_out) {
  hf::SimFile sim = hf::read_sim_config_file(config_path);
  if (seed) sim.config.seed = *seed;
  if (cascades) sim.cascades = *cascades;
  const hf::SimulatedCorpus corpus = hf::simulate_corpus(sim.config, sim.cascades);
  if (corpus.truncated > 0) {
    warn(std::to_string(corpus.truncated) + " cascades hit the event cap");
  }
  hf::write_corpus_file(out_path, corpus.cascades);
  if (!features_out.empty()) hf::write_features_file(features_out, {sim.config.store, std::nullopt});
  return 0;
}

int cmd_rank(const std::string& model_path, const std::string& features_path,
             const std::string& corpus_path, const std::string& user, double t,
             const std::string& policy) {
  const hf::ModelFile model = hf::read_model_file(model_path);
  const hf::FeatureFile features = hf::read_features_file(features_path);
  auto corpus = hf::read_corpus_file(corpus_path);
  hf::prepare_content(corpus, features);
  if (model.params.pair_manifest != features.store.pair_manifest() ||
      model.params.content_manifest != features.store.content_manifest()) {
    throw hf::ConfigError("model and feature file describe different features");
  }
  const auto candidates = hf::candidate_set(corpus, t, hf::candidate_policy_from_string(policy));
  hf::IntensityRanker ranker(corpus, hf::feature_influence(model.params, features.store), "HWK",
                             hf::IntensityRanker::Mode::Scratch);
  const auto order = ranker.rank(user, t, candidates);
  for (std::size_t r = 0; r < order.size(); ++r) {
    nlohmann::json line = {{"rank", r},
                           {"cascade_id", corpus[order[r]].id},
                           {"group_id", corpus[order[r]].group},
                           {"intensity", ranker.score(user, order[r], t)}};
    std::cout << line.dump() << '\n';
  }
  return 0;
}

struct EvalArgs {
  std::string ranker;
  std::string model;
  std::string features;
  std::string train;
  std::string test;
  std::string out;
  std::string policy = "all";
  FitFlags fit;
};

int cmd_evaluate(const EvalArgs& args) {
  const std::string& name = args.ranker;
  if (name == "RCHR" && !args.model.empty()) warn("RCHR ignores the model file");
  if (name != "RCHR" && name.rfind("HWK-", 0) != 0 && !args.model.empty()) {
    warn(name + " fits its own parameters; the model file is ignored");
  }
  std::optional<hf::FeatureFile> shared_features;
  if (!args.features.empty()) shared_features = hf::read_features_file(args.features);
  std::optional<hf::ModelFile> shared_model;
  if (name.rfind("HWK-", 0) == 0 && !args.model.empty()) {
    if (!shared_features) throw hf::ConfigError("--model needs the matching --features file");
    shared_model = hf::read_model_file(args.model);
  }

  auto train_groups = by_group(hf::read_corpus_file(args.train));
  auto test_groups = by_group(hf::read_corpus_file(args.test));
  hf::EvalOptions options;
  options.policy = hf::candidate_policy_from_string(args.policy);

  std::vector<hf::RankReport> reports;
  for (auto& [group, test_all] : test_groups) {
    auto train_it = train_groups.find(group);
    if (train_it == train_groups.end()) {
      warn("group " + group + " has no training cascades; skipped");
      continue;
    }
    auto& train = train_it->second;
    auto test = hf::select_test_cascades(test_all, hf::participants(train));
    const bool has_comments = std::any_of(test.begin(), test.end(),
                                          [](const hf::Cascade& c) { return c.size() > 0; });
    if (!has_comments) {
      warn("group " + group + " has no test comments by known users; skipped");
      continue;
    }
    const hf::FeatureFile features =
        shared_features ? *shared_features
                        : features_from(train, std::max(content_dimension(train),
                                                        content_dimension(test)));
    hf::prepare_content(train, features);
    hf::prepare_content(test, features);
    const hf::FeatureStore& store = features.store;

    std::unique_ptr<hf::Ranker> ranker;
    hf::ModelParams params;
    hf::PairwiseHawkesParams pairwise;
    if (name == "RCHR") {
      ranker = std::make_unique<hf::ReverseChronologicalRanker>(test);
    } else if (name == "NN") {
      ranker = std::make_unique<hf::NearestNeighborRanker>(test, train, store);
    } else if (name == "COX-LNG" || name == "COX-PSY") {
      hf::CoxFitOptions opts;
      opts.feature_sets = {name == "COX-LNG" ? hf::FeatureSet::Lng : hf::FeatureSet::Psy};
      const hf::CoxFit cox = hf::fit_cox(train, store, opts);
      if (cox.capped) warn("group " + group + ": Cox weights reached the box limit");
      ranker = std::make_unique<hf::CoxRanker>(test, store, cox.params, name);
    } else if (name == "HWK") {
      hf::EmOptions em;
      em.rates = {args.fit.omega_mu, args.fit.omega_a};
      pairwise = hf::fit_hwk_em(train, em).params;
      ranker = std::make_unique<hf::IntensityRanker>(test, hf::pairwise_influence(pairwise), name);
    } else {
      params = shared_model ? shared_model->params
                            : run_fit(train, store, args.fit, name.substr(4)).params;
      ranker = std::make_unique<hf::IntensityRanker>(test, hf::feature_influence(params, store),
                                                     name);
    }
    reports.push_back(hf::evaluate(*ranker, options));
  }
  if (reports.empty()) throw hf::PreconditionError("no group could be evaluated");

  std::ofstream out(args.out);
  if (!out) throw hf::ConfigError("cannot write " + args.out);
  hf::write_report(out, reports);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feature-modulated Hawkes models for feed prioritization"};
  app.require_subcommand(1);

  std::string corpus, lexicon, match = "exact", out, features, group, variant = "ALL";
  auto* extract = app.add_subcommand("extract-features", "Learn normalized features from a corpus");
  extract->add_option("--corpus", corpus, "Training corpus (JSONL)")->required()->check(CLI::ExistingFile);
  extract->add_option("--lexicon", lexicon, "Lexicon (JSONL); content comes from event text")
      ->check(CLI::ExistingFile);
  extract->add_option("--lexicon-match", match, "Lexicon word matching")
      ->check(CLI::IsMember({"exact", "prefix"}))
      ->capture_default_str();
  extract->add_option("--out", out, "Feature file to write")->required();

  FitFlags fit_flags;
  auto* fit = app.add_subcommand("fit", "Fit feature weights by penalized maximum likelihood");
  fit->add_option("--corpus", corpus, "Training corpus (JSONL)")->required()->check(CLI::ExistingFile);
  fit->add_option("--features", features, "Feature file; learned from the corpus when omitted")
      ->check(CLI::ExistingFile);
  fit->add_option("--group", group, "Only fit cascades of this group");
  fit->add_option("--variant", variant, "Feature sets to use")
      ->check(CLI::IsMember({"ALL", "CHR", "RLTN", "LNG", "PSY"}))
      ->capture_default_str();
  fit->add_option("--out", out, "Model file to write")->required();
  fit_flags.add(fit);

  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> cascades;
  std::string features_out;
  auto* simulate = app.add_subcommand("simulate", "Simulate cascades from a known model");
  simulate->add_option("--config", config, "Simulation config (JSON)")->required()->check(CLI::ExistingFile);
  simulate->add_option("--seed", seed, "Overrides the config seed");
  simulate->add_option("--cascades", cascades, "Overrides the config cascade count");
  simulate->add_option("--out", out, "Corpus to write")->required();
  simulate->add_option("--features-out", features_out, "Also write the generating feature store");

  std::string model, user, policy = "all";
  double t = 0.0;
  auto* rank = app.add_subcommand("rank", "Print a user's prioritized feed at time t");
  rank->add_option("--model", model, "Model file")->required()->check(CLI::ExistingFile);
  rank->add_option("--features", features, "Feature file")->required()->check(CLI::ExistingFile);
  rank->add_option("--corpus", corpus, "Cascades to rank (JSONL)")->required()->check(CLI::ExistingFile);
  rank->add_option("--user", user, "User whose feed is ranked")->required();
  rank->add_option("-t,--time", t, "Group-clock time in minutes")->required();
  rank->add_option("--candidates", policy, "Candidate policy")
      ->check(CLI::IsMember({"all", "active"}))
      ->capture_default_str();

  EvalArgs eval;
  auto* evaluate = app.add_subcommand("evaluate", "Replay test comments and report ranking quality");
  evaluate->add_option("--ranker", eval.ranker, "Ranker name")->required()->check(CLI::IsMember(kRankers));
  evaluate->add_option("--model", eval.model, "Model file for HWK-* rankers (fitted per group when omitted)")
      ->check(CLI::ExistingFile);
  evaluate->add_option("--features", eval.features, "Feature file; learned per group when omitted")
      ->check(CLI::ExistingFile);
  evaluate->add_option("--train", eval.train, "Training corpus (JSONL)")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--test", eval.test, "Test corpus (JSONL)")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--out", eval.out, "Report to write (JSONL)")->required();
  evaluate->add_option("--candidates", eval.policy, "Candidate policy")
      ->check(CLI::IsMember({"all", "active"}))
      ->capture_default_str();
  eval.fit.add(evaluate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*extract) return cmd_extract(corpus, lexicon, match, out);
    if (*fit) return cmd_fit(corpus, features, group, variant, fit_flags, out);
    if (*simulate) return cmd_simulate(config, seed, cascades, out, features_out);
    if (*rank) return cmd_rank(model, features, corpus, user, t, policy);
    if (*evaluate) return cmd_evaluate(eval);
  } catch (const hf::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  }
  return 0;
}
