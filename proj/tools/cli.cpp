// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>

#include <nlohmann/json.hpp>

#include "videominer/clustering.hpp"
#include "videominer/config.hpp"
#include "videominer/frame.hpp"
#include "videominer/mock_clients.hpp"
#include "videominer/remote_clients.hpp"
#include "videominer/rewards.hpp"
#include "videominer/segmentation.hpp"
#include "videominer/surrogate_policy.hpp"
#include "videominer/synth.hpp"
#include "videominer/trainer.hpp"
#include "videominer/tree.hpp"

namespace videominer::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kSeedEnv = "VIDEOMINER_SEED";

struct Options {
  std::string config;
  std::string manifest;
  std::string qa;
  std::string question;
  std::string captions;
  std::string tree;
  std::string gold;
  std::string suite;
  std::string policy;
  std::string out;
  std::string log;
  std::string reward_config;
  std::string dump_rollout;
  std::size_t sample = 0;
  std::size_t k = 0;
  double eps = 0.0;
  std::size_t min_pts = 0;
  std::uint64_t seed = 0;
  std::size_t count = 50;
  std::size_t synthetic = 8;
  bool oracle = false;
  bool per_instance = false;
  // trainer overrides
  std::size_t iterations = 0;
  std::size_t group_size = 0;
  std::size_t batch_size = 0;
  double clip_eps = 0.0;
  double kl_beta = 0.0;
  double learning_rate = 0.0;
};

// Tracks which flags were given so they can override config values.
struct Given {
  const CLI::App* app = nullptr;
  bool operator()(const std::string& name) const { return app->count(name) > 0; }
};

void write_json_file(const fs::path& path, const json& doc) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream file(path, std::ios::binary);
  if (!file) fail(ErrorCode::kMissingFile, "cannot write " + path.string());
  file << doc.dump(2) << "\n";
}

json read_json_file(const fs::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) fail(ErrorCode::kMissingFile, "cannot open " + path.string());
  try {
    return json::parse(file);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
}

AppConfig load_app_config(const Options& opt) {
  AppConfig cfg = opt.config.empty() ? AppConfig{} : load_config(opt.config);
  cfg.validate();
  return cfg;
}

// Flag, then environment, then config file.
std::uint64_t resolve_seed(const AppConfig& cfg, const Options& opt, const Given& given) {
  if (given("--seed")) return opt.seed;
  if (const char* env = std::getenv(kSeedEnv); env != nullptr && *env != '\0') {
    std::uint64_t value = 0;
    const std::string_view text(env);
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      fail(ErrorCode::kValidationError,
           std::string(kSeedEnv) + ": not an unsigned integer");
    }
    return value;
  }
  return cfg.trainer.seed;
}

std::shared_ptr<const HttpTransport> transport(const RoleConfig& role) {
  return std::make_shared<HttpTransport>(role.remote);
}

std::shared_ptr<const SurrogatePolicy> load_surrogate(const AppConfig& cfg, const Options& opt,
                                                      std::uint64_t seed) {
  const std::string path = !opt.policy.empty() ? opt.policy : cfg.paths.policy;
  if (path.empty()) return std::make_shared<SurrogatePolicy>(SurrogatePolicy::random_init(seed));
  return std::make_shared<SurrogatePolicy>(SurrogatePolicy::from_json(read_json_file(path)));
}

Clients make_clients(const AppConfig& cfg, const Options& opt, std::uint64_t seed,
                     std::shared_ptr<const Captioner> mock_captioner) {
  Clients clients;
  const auto& roles = cfg.clients;
  clients.captioner = roles.captioner.mock
                          ? std::move(mock_captioner)
                          : std::make_shared<RemoteCaptioner>(transport(roles.captioner));
  if (roles.embedder.mock) {
    clients.embedder = std::make_shared<MockEmbedder>(kSyntheticEmbeddingDim);
  } else {
    clients.embedder = std::make_shared<RemoteEmbedder>(transport(roles.embedder));
  }
  if (roles.policy.mock) {
    clients.policy = load_surrogate(cfg, opt, seed);
  } else {
    clients.policy = std::make_shared<RemotePolicy>(transport(roles.policy));
  }
  if (roles.answerer.mock) {
    clients.answerer = std::make_shared<KeywordAnswerer>();
  } else {
    clients.answerer = std::make_shared<RemoteAnswerer>(transport(roles.answerer));
  }
  return clients;
}

FrameSequence load_sequence(const Options& opt) {
  FrameSequence seq = load_frames(read_manifest(opt.manifest));
  if (opt.sample > 0) seq = uniform_sample(seq, opt.sample);
  return seq;
}

struct QaFile {
  std::string question;
  std::string gold;
  std::vector<ScriptedCaptioner::Entry> captions;
};

QaFile read_qa(const fs::path& path) {
  const json doc = read_json_file(path);
  QaFile qa;
  try {
    qa.question = doc.at("question").get<std::string>();
    if (doc.contains("gold")) qa.gold = doc.at("gold").get<std::string>();
    if (doc.contains("captions")) {
      for (const auto& e : doc.at("captions")) {
        qa.captions.push_back({e.at("first").get<std::int64_t>(), e.at("last").get<std::int64_t>(),
                               e.at("text").get<std::string>()});
      }
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
  return qa;
}

// Captioner and question for commands that read a manifest: scripted captions
// from --qa when present, otherwise the brightness heuristic.
std::pair<std::shared_ptr<const Captioner>, std::string> manifest_context(const Options& opt) {
  std::string question = opt.question;
  std::shared_ptr<const Captioner> captioner = std::make_shared<HeuristicCaptioner>();
  if (!opt.qa.empty()) {
    QaFile qa = read_qa(opt.qa);
    if (question.empty()) question = qa.question;
    if (!qa.captions.empty()) captioner = std::make_shared<ScriptedCaptioner>(std::move(qa.captions));
  }
  return {captioner, question};
}

json events_json(const std::vector<Event>& events, const FrameSequence& seq) {
  json out = json::array();
  for (const auto& e : events) {
    json item = {{"start", e.start},
                 {"end", e.end},
                 {"first_index", seq[e.start - 1].index},
                 {"last_index", seq[e.end - 1].index}};
    if (!e.caption.empty()) item["caption"] = e.caption;
    out.push_back(std::move(item));
  }
  return out;
}

int cmd_segment(const Options& opt, const Given& given, std::ostream& out) {
  AppConfig cfg = load_app_config(opt);
  if (given("--k")) cfg.segmentation.k_scenes = opt.k;
  cfg.segmentation.validate();
  const FrameSequence seq = load_sequence(opt);
  const SceneSegmentation seg = segment_scenes_detailed(seq, cfg.segmentation);
  json doc = {{"source_id", seq.source_id},
              {"frames", seq.size()},
              {"k", seg.events.size()},
              {"events", events_json(seg.events, seq)},
              {"cuts", seg.cuts},
              {"tau", seg.tau ? json(*seg.tau) : json(nullptr)},
              {"distances", seg.series.distances}};
  out << doc.dump(2) << "\n";
  return kExitOk;
}

int cmd_cluster(const Options& opt, const Given& given, std::ostream& out) {
  AppConfig cfg = load_app_config(opt);
  if (given("--eps")) cfg.clustering.eps = opt.eps;
  if (given("--min-pts")) cfg.clustering.min_pts = opt.min_pts;
  if (given("--k")) cfg.segmentation.k_scenes = opt.k;
  cfg.clustering.validate();
  const std::uint64_t seed = resolve_seed(cfg, opt, given);

  if (!opt.captions.empty()) {
    const auto texts = read_json_file(opt.captions).get<std::vector<std::string>>();
    const Clients clients = make_clients(cfg, opt, seed, nullptr);
    const auto points = embed_captions(texts, *clients.embedder);
    const ClusterAssignment assignment = dbscan(points, cfg.clustering);
    out << json{{"labels", assignment.labels}, {"cluster_count", assignment.cluster_count}}.dump(2)
        << "\n";
    return kExitOk;
  }
  if (opt.manifest.empty()) fail(ErrorCode::kUsageError, "cluster needs --captions or --manifest");

  cfg.segmentation.validate();
  const FrameSequence seq = load_sequence(opt);
  auto [captioner, question] = manifest_context(opt);
  const Clients clients = make_clients(cfg, opt, seed, captioner);
  std::vector<Event> events = segment_scenes(seq, cfg.segmentation);
  std::vector<std::string> texts;
  for (auto& e : events) {
    e.caption = caption_event(e, seq, question, *clients.captioner);
    texts.push_back(e.caption);
  }
  const auto points = embed_captions(texts, *clients.embedder);
  for (std::size_t i = 0; i < events.size(); ++i) events[i].embedding = points[i];
  const ClusterAssignment assignment = dbscan(points, cfg.clustering);
  json groups = json::array();
  for (const auto& g : group_events(events, assignment)) groups.push_back(events_json(g.events, seq));
  json doc = {{"source_id", seq.source_id},
              {"events", events_json(events, seq)},
              {"labels", assignment.labels},
              {"cluster_count", assignment.cluster_count},
              {"groups", std::move(groups)}};
  out << doc.dump(2) << "\n";
  return kExitOk;
}

// Raised after a tree was persisted, so the caller can name the file.
struct PersistedError {
  Error error;
  fs::path path;
};

int cmd_tree(const Options& opt, const Given& given, std::ostream& out, std::ostream& err) {
  const AppConfig cfg = load_app_config(opt);
  const std::uint64_t seed = resolve_seed(cfg, opt, given);
  const FrameSequence seq = load_sequence(opt);
  auto [captioner, question] = manifest_context(opt);
  if (question.empty()) fail(ErrorCode::kUsageError, "tree needs --question or --qa");
  const Clients clients = make_clients(cfg, opt, seed, captioner);
  const fs::path persist =
      !opt.out.empty() ? fs::path(opt.out) : fs::path(cfg.paths.workspace) / "partial_tree.json";

  VideoTree tree;
  try {
    tree = build_tree(seq, question, clients, cfg.pipeline(), seed);
  } catch (const PartialTreeError& e) {
    write_json_file(persist, tree_to_json(e.tree()));
    throw PersistedError{Error(e.code(), e.what()), persist};
  }
  try {
    assign_keyframes(tree, cfg.exploration);
    final_answer(tree, *clients.answerer);
  } catch (const Error& e) {
    tree.error = std::string(to_string(e.code())) + ": " + e.what();
    write_json_file(persist, tree_to_json(tree));
    throw PersistedError{e, persist};
  }
  const json doc = tree_to_json(tree);
  if (!opt.out.empty()) write_json_file(opt.out, doc);
  err << "tree: " << tree.node_count() << " nodes, " << tree.keyframes.size() << " keyframes\n";
  out << doc.dump(2) << "\n";
  return kExitOk;
}

int cmd_answer(const Options& opt, const Given& given, std::ostream& out) {
  const AppConfig cfg = load_app_config(opt);
  const std::uint64_t seed = resolve_seed(cfg, opt, given);
  VideoTree tree = tree_from_json(read_json_file(opt.tree));
  if (tree.keyframes.empty()) assign_keyframes(tree, cfg.exploration);
  const Clients clients = make_clients(cfg, opt, seed, nullptr);
  const std::string answer = final_answer(tree, *clients.answerer);
  json doc = {{"question", tree.question},
              {"answer", answer},
              {"keyframes", tree.keyframes},
              {"captions", keyframe_captions(tree)}};
  if (!opt.gold.empty()) doc["correct"] = tree_reward(answer, opt.gold);
  out << doc.dump(2) << "\n";
  return kExitOk;
}

std::vector<SyntheticInstance> load_or_make_suite(const Options& opt, std::uint64_t seed) {
  if (!opt.suite.empty()) return read_suite(opt.suite);
  return make_suite(opt.synthetic, seed);
}

int cmd_train(const Options& opt, const Given& given, std::ostream& out, std::ostream& err) {
  AppConfig cfg = load_app_config(opt);
  if (!opt.reward_config.empty()) {
    json doc = read_json_file(opt.reward_config);
    if (doc.is_object() && doc.size() == 1 && doc.contains("rewards")) doc = doc.at("rewards");
    cfg.rewards = rewards_from_json(doc);
  }
  TrainerConfig& t = cfg.trainer;
  if (given("--iterations")) t.iterations = opt.iterations;
  if (given("--group-size")) t.group_size = opt.group_size;
  if (given("--batch-size")) t.batch_size = opt.batch_size;
  if (given("--clip-eps")) t.clip_eps = opt.clip_eps;
  if (given("--kl-beta")) t.kl_beta = opt.kl_beta;
  if (given("--learning-rate")) t.learning_rate = opt.learning_rate;
  t.seed = resolve_seed(cfg, opt, given);
  cfg.validate();
  if (!cfg.clients.policy.mock) {
    fail(ErrorCode::kValidationError, "clients.policy: training needs the mock surrogate policy");
  }
  if (auto warning = cfg.rewards.ordering_warning()) err << "warning: " << *warning << "\n";

  const auto suite = load_or_make_suite(opt, t.seed);
  std::vector<Episode> episodes;
  for (const auto& inst : suite) episodes.push_back(inst.episode());
  const auto initial = load_surrogate(cfg, opt, t.seed);
  const Clients clients = make_clients(cfg, opt, t.seed, nullptr);
  const RolloutSettings settings{cfg.pipeline(), cfg.rewards, t};

  std::ofstream log_file;
  if (!opt.log.empty()) {
    if (fs::path(opt.log).has_parent_path()) fs::create_directories(fs::path(opt.log).parent_path());
    log_file.open(opt.log, std::ios::binary);
    if (!log_file) fail(ErrorCode::kMissingFile, "cannot write " + opt.log);
  }
  std::ostream& log = opt.log.empty() ? out : log_file;
  const TrainResult result = train(episodes, clients, settings, *initial,
                                   [&log](const TrainLogEntry& e) { log << e.to_json().dump() << "\n"; });

  const fs::path policy_path =
      !opt.out.empty() ? fs::path(opt.out) : fs::path(cfg.paths.workspace) / "policy.json";
  write_json_file(policy_path, result.policy.to_json());
  if (!opt.dump_rollout.empty()) {
    Clients trained = clients;
    trained.policy = std::make_shared<SurrogatePolicy>(result.policy);
    const RolloutGroup group = rollout(episodes.front(), trained, settings, sub_seed(t.seed, t.iterations));
    write_json_file(opt.dump_rollout, group.to_json());
  }
  err << "train: " << result.log.size() << " iterations, policy written to " << policy_path.string()
      << "\n";
  if (!opt.log.empty()) out << json{{"policy", policy_path.string()}, {"iterations", result.log.size()}}.dump() << "\n";
  return kExitOk;
}

int cmd_synth(const Options& opt, const Given& given, std::ostream& out) {
  const AppConfig cfg = load_app_config(opt);
  const std::uint64_t seed = resolve_seed(cfg, opt, given);
  const auto suite = make_suite(opt.count, seed);
  write_suite(opt.out, suite);
  out << json{{"dir", opt.out}, {"instances", suite.size()}, {"seed", seed}}.dump(2) << "\n";
  return kExitOk;
}

int cmd_eval(const Options& opt, const Given& given, std::ostream& out) {
  const AppConfig cfg = load_app_config(opt);
  const std::uint64_t seed = resolve_seed(cfg, opt, given);
  const auto suite = read_suite(opt.suite);
  std::shared_ptr<const Policy> policy;
  if (opt.oracle) {
    policy = make_oracle_policy();
  } else {
    policy = load_surrogate(cfg, opt, seed);
  }
  json doc = evaluate(policy, suite, cfg.pipeline(), seed).to_json();
  if (opt.per_instance) {
    json rows = json::array();
    for (const auto& r : evaluate_instances(policy, suite, cfg.pipeline(), seed)) {
      rows.push_back({{"source_id", r.source_id}, {"recall", r.recall}, {"precision", r.precision},
                      {"correct", r.correct}, {"nodes", r.nodes}, {"depth", r.depth}});
    }
    doc["per_instance"] = std::move(rows);
  }
  out << doc.dump(2) << "\n";
  return kExitOk;
}

void print_error(std::ostream& err, ErrorCode code, const std::string& message,
                 const std::optional<fs::path>& partial = std::nullopt) {
  json doc = {{"error", {{"code", std::string(to_string(code))}, {"message", message}}}};
  if (partial) doc["error"]["partial_tree"] = partial->string();
  err << doc.dump() << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Keyframe mining over video trees with T-GRPO training", "videominer"};
  app.require_subcommand(1);
  app.fallthrough();
  Options opt;
  app.add_option("--config", opt.config, "JSON config file")->check(CLI::ExistingFile);

  auto add_seed = [&opt](CLI::App* sub) {
    sub->add_option("--seed", opt.seed, "Random seed (overrides " + std::string(kSeedEnv) + ")");
  };
  auto add_frames = [&opt](CLI::App* sub) {
    sub->add_option("--manifest", opt.manifest, "Frame manifest JSON")->required();
    sub->add_option("--sample", opt.sample, "Uniformly sample N frames (0 keeps all)");
  };

  CLI::App* segment = app.add_subcommand("segment", "Split frames into scenes");
  add_frames(segment);
  segment->add_option("--k", opt.k, "Number of scenes");

  CLI::App* cluster = app.add_subcommand("cluster", "Caption, embed and cluster events");
  cluster->add_option("--captions", opt.captions, "JSON array of captions");
  cluster->add_option("--manifest", opt.manifest, "Frame manifest JSON");
  cluster->add_option("--sample", opt.sample, "Uniformly sample N frames (0 keeps all)");
  cluster->add_option("--k", opt.k, "Number of scenes");
  cluster->add_option("--question", opt.question, "Question used to condition captions");
  cluster->add_option("--qa", opt.qa, "QA JSON with question and scripted captions");
  cluster->add_option("--eps", opt.eps, "Neighborhood radius");
  cluster->add_option("--min-pts", opt.min_pts, "Density threshold");
  add_seed(cluster);

  CLI::App* tree = app.add_subcommand("tree", "Build a video tree and answer");
  add_frames(tree);
  tree->add_option("--question", opt.question, "Question text");
  tree->add_option("--qa", opt.qa, "QA JSON with question and scripted captions");
  tree->add_option("--policy", opt.policy, "Surrogate policy weights JSON");
  tree->add_option("--out", opt.out, "Also write the tree JSON here");
  add_seed(tree);

  CLI::App* answer = app.add_subcommand("answer", "Answer from a saved tree");
  answer->add_option("--tree", opt.tree, "Tree JSON")->required();
  answer->add_option("--gold", opt.gold, "Gold option letter, adds a correctness field");
  add_seed(answer);

  CLI::App* trainer = app.add_subcommand("train", "Train the surrogate policy with T-GRPO");
  trainer->add_option("--suite", opt.suite, "Synthetic suite directory");
  trainer->add_option("--synthetic", opt.synthetic, "Generate this many instances when no suite is given");
  trainer->add_option("--iterations", opt.iterations, "Training iterations");
  trainer->add_option("--group-size", opt.group_size, "Trees per rollout group");
  trainer->add_option("--batch-size", opt.batch_size, "Questions per iteration");
  trainer->add_option("--clip-eps", opt.clip_eps, "Ratio clip coefficient");
  trainer->add_option("--kl-beta", opt.kl_beta, "KL penalty weight");
  trainer->add_option("--learning-rate", opt.learning_rate, "Step size");
  trainer->add_option("--reward-config", opt.reward_config, "Reward constants JSON");
  trainer->add_option("--policy", opt.policy, "Initial policy weights JSON");
  trainer->add_option("--out", opt.out, "Trained weights path");
  trainer->add_option("--log", opt.log, "Write the JSON-lines log here instead of stdout");
  trainer->add_option("--dump-rollout", opt.dump_rollout, "Write one rollout group of the trained policy");
  add_seed(trainer);

  CLI::App* synth = app.add_subcommand("synth", "Write a synthetic suite");
  synth->add_option("--out", opt.out, "Output directory")->required();
  synth->add_option("--count", opt.count, "Number of instances");
  add_seed(synth);

  CLI::App* eval = app.add_subcommand("eval", "Evaluate a policy on a synthetic suite");
  eval->add_option("--suite", opt.suite, "Synthetic suite directory")->required();
  eval->add_option("--policy", opt.policy, "Surrogate policy weights JSON");
  eval->add_flag("--oracle", opt.oracle, "Use the scripted oracle policy");
  eval->add_flag("--per-instance", opt.per_instance, "Include per-instance rows");
  add_seed(eval);

  std::vector<std::string> rest(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(rest.begin(), rest.end());
  try {
    app.parse(rest);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  CLI::App* chosen = app.get_subcommands().front();
  const Given given{chosen};
  try {
    if (chosen == segment) return cmd_segment(opt, given, out);
    if (chosen == cluster) return cmd_cluster(opt, given, out);
    if (chosen == tree) return cmd_tree(opt, given, out, err);
    if (chosen == answer) return cmd_answer(opt, given, out);
    if (chosen == trainer) return cmd_train(opt, given, out, err);
    if (chosen == synth) return cmd_synth(opt, given, out);
    if (chosen == eval) return cmd_eval(opt, given, out);
  } catch (const PersistedError& e) {
    print_error(err, e.error.code(), e.error.what(), e.path);
    return kExitDomainError;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kUsageError) {
      err << "error: " << e.what() << "\n" << chosen->help();
      return kExitUsage;
    }
    print_error(err, e.code(), e.what());
    return kExitDomainError;
  } catch (const nlohmann::json::exception& e) {
    print_error(err, ErrorCode::kParseError, e.what());
    return kExitDomainError;
  } catch (const fs::filesystem_error& e) {
    print_error(err, ErrorCode::kMissingFile, e.what());
    return kExitDomainError;
  }
  return kExitUsage;
}

}  // namespace videominer::cli
