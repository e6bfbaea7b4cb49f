// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "test_support.hpp"
#include "videominer/config.hpp"
#include "videominer/synth.hpp"

namespace videominer {
namespace {

using nlohmann::json;
using testing_support::error_code_of;
using testing_support::TempDir;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "videominer");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream(path) << text;
}

// Suite of one instance on disk; returns its directory.
std::filesystem::path one_instance(const TempDir& dir) {
  const auto suite = make_suite(1, 5);
  write_suite(dir.path() / "suite", suite);
  return dir.path() / "suite" / "instance_0000";
}

TEST(Cli, UnknownSubcommandIsUsageError) {
  EXPECT_EQ(run_cli({"frobnicate"}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({}).code, cli::kExitUsage);
}

TEST(Cli, HelpExitsZero) { EXPECT_EQ(run_cli({"--help"}).code, cli::kExitOk); }

TEST(Cli, SegmentPrintsEvents) {
  TempDir dir;
  const auto inst = one_instance(dir);
  const auto r = run_cli({"segment", "--manifest", (inst / "manifest.json").string(), "--k", "3"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const json doc = json::parse(r.out);
  EXPECT_EQ(doc["events"].size(), 3u);
  EXPECT_EQ(doc["events"][0]["start"], 1);
}

TEST(Cli, MissingManifestIsDomainError) {
  TempDir dir;
  const auto r = run_cli({"segment", "--manifest", (dir.path() / "none.json").string()});
  EXPECT_EQ(r.code, cli::kExitDomainError);
  const json doc = json::parse(r.err);
  EXPECT_EQ(doc["error"]["code"], "MissingFile");
}

TEST(Cli, ClusterCaptionFile) {
  TempDir dir;
  write_text(dir / "caps.json", R"(["a red kettle", "a red kettle", "a blue bus"])");
  const auto r = run_cli({"cluster", "--captions", (dir / "caps.json").string(), "--eps", "0.1",
                          "--min-pts", "2"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const json doc = json::parse(r.out);
  EXPECT_EQ(doc["labels"], json::parse("[0, 0, 1]"));
}

TEST(Cli, TreeAnswerRoundTrip) {
  TempDir dir;
  const auto inst = one_instance(dir);
  const auto tree_path = dir / "tree.json";
  const auto r = run_cli({"tree", "--manifest", (inst / "manifest.json").string(), "--qa",
                          (inst / "qa.json").string(), "--seed", "3", "--out", tree_path.string()});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  ASSERT_TRUE(std::filesystem::exists(tree_path));
  const auto a = run_cli({"answer", "--tree", tree_path.string(), "--gold", "A"});
  ASSERT_EQ(a.code, cli::kExitOk) << a.err;
  const json doc = json::parse(a.out);
  EXPECT_TRUE(doc.contains("correct"));
  EXPECT_EQ(doc["answer"], json::parse(r.out)["answer"]);
}

TEST(Cli, UnreachableRemotePersistsPartialTree) {
  TempDir dir;
  const auto inst = one_instance(dir);
  const json cfg = {{"clients",
                     {{"captioner",
                       {{"base_url", "http://127.0.0.1:1/v1"},
                        {"model_name", "m"},
                        {"timeout", 1.0},
                        {"max_retries", 0},
                        {"retry_backoff", 0.0}}}}},
                    {"paths", {{"workspace", dir.path().string()}}}};
  write_text(dir / "config.json", cfg.dump());
  const auto r = run_cli({"--config", (dir / "config.json").string(), "tree", "--manifest",
                          (inst / "manifest.json").string(), "--question", "What happens?"});
  EXPECT_EQ(r.code, cli::kExitDomainError);
  const json err = json::parse(r.err);
  EXPECT_EQ(err["error"]["code"], "ServiceError");
  EXPECT_TRUE(std::filesystem::exists(dir / "partial_tree.json"));
}

TEST(Cli, TrainIsDeterministic) {
  TempDir dir;
  auto train = [&](const std::string& name) {
    const auto r = run_cli({"train", "--synthetic", "2", "--iterations", "2", "--seed", "4", "--out",
                            (dir / name).string()});
    EXPECT_EQ(r.code, cli::kExitOk) << r.err;
    std::ifstream in(dir / name);
    return std::string(std::istreambuf_iterator<char>(in), {}) + r.out;
  };
  const std::string a = train("a.json");
  EXPECT_EQ(a, train("b.json"));
  EXPECT_NE(a.find("\"J\""), std::string::npos);
}

TEST(Cli, SeedFromEnvironment) {
  TempDir dir;
  auto train = [&](const char* env, const std::vector<std::string>& extra) {
    if (env) {
      ::setenv("VIDEOMINER_SEED", env, 1);
    } else {
      ::unsetenv("VIDEOMINER_SEED");
    }
    std::vector<std::string> args{"train", "--synthetic", "2", "--iterations", "1", "--out",
                                  (dir / "w.json").string()};
    args.insert(args.end(), extra.begin(), extra.end());
    const auto r = run_cli(args);
    EXPECT_EQ(r.code, cli::kExitOk) << r.err;
    return r.out;
  };
  const std::string env9 = train("9", {});
  const std::string flag9 = train(nullptr, {"--seed", "9"});
  const std::string flag_wins = train("1", {"--seed", "9"});
  ::unsetenv("VIDEOMINER_SEED");
  EXPECT_EQ(env9, flag9);
  EXPECT_EQ(flag_wins, flag9);
  EXPECT_NE(train(nullptr, {"--seed", "1"}), flag9);
}

TEST(Config, EmptyDocumentGivesDefaults) {
  TempDir dir;
  write_text(dir / "c.json", "{}");
  EXPECT_EQ(load_config(dir / "c.json"), AppConfig{});
}

TEST(Config, ValidationNamesField) {
  try {
    config_from_json(json::parse(R"({"trainer": {"clip_eps": 1.5}})")).validate();
    FAIL() << "expected ValidationError";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kValidationError);
    EXPECT_NE(std::string(e.what()).find("trainer.clip_eps"), std::string::npos);
  }
  try {
    config_from_json(json::parse(R"({"foo": 1})"));
    FAIL() << "expected ValidationError";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kValidationError);
    EXPECT_NE(std::string(e.what()).find("foo: unknown key"), std::string::npos);
  }
  EXPECT_EQ(error_code_of([] { config_from_json(json::parse(R"({"trainer": {"seed": "x"}})")); }),
            ErrorCode::kValidationError);
}

TEST(Config, RoundTrip) {
  AppConfig c;
  c.trainer.batch_size = 8;
  c.rewards.delta_c = 0.6;
  c.clustering.noise_policy = NoisePolicy::kDrop;
  c.clients.policy.mock = false;
  c.clients.policy.remote.base_url = "http://localhost:8000/v1";
  c.clients.policy.remote.model_name = "policy";
  c.clients.policy.remote.api_key_env = "POLICY_KEY";
  EXPECT_EQ(config_from_json(config_to_json(c)), c);
}

TEST(Config, MissingAndBrokenFiles) {
  TempDir dir;
  EXPECT_EQ(error_code_of([&] { load_config(dir / "none.json"); }), ErrorCode::kMissingFile);
  write_text(dir / "bad.json", "{");
  EXPECT_EQ(error_code_of([&] { load_config(dir / "bad.json"); }), ErrorCode::kParseError);
}

}  // namespace
}  // namespace videominer
