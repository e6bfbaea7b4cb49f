// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <httplib.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "test_support.hpp"
#include "videominer/clients.hpp"
#include "videominer/clustering.hpp"
#include "videominer/mock_clients.hpp"
#include "videominer/node_output.hpp"
#include "videominer/remote_clients.hpp"
#include "videominer/surrogate_policy.hpp"

namespace videominer {
namespace {

using nlohmann::json;
using testing_support::constant_sequence;
using testing_support::error_code_of;

PolicyDecisionRequest request(std::string caption, std::string question, int depth) {
  PolicyDecisionRequest r;
  r.caption = std::move(caption);
  r.question = std::move(question);
  r.depth = depth;
  return r;
}

TEST(ParseNodeOutput, MaxFormat) {
  const NodeOutput out = parse_node_output("<think>x y z</think><answer>continue</answer>");
  EXPECT_EQ(out.format, FormatClass::kMax);
  EXPECT_EQ(out.action, Action::kContinue);
  // whitespace tokens: "<think>x", "y", "z</think><answer>continue</answer>"
  EXPECT_EQ(out.length, 3u);
  EXPECT_EQ(out.reasoning, "x y z");
}

TEST(ParseNodeOutput, CorrFormat) {
  const NodeOutput out = parse_node_output("I believe <answer>delete</answer> thanks");
  EXPECT_EQ(out.format, FormatClass::kCorr);
  EXPECT_EQ(out.length, 4u);
  EXPECT_EQ(out.action, Action::kDelete);
}

TEST(ParseNodeOutput, NoTags) {
  const NodeOutput out = parse_node_output("no tags at all");
  EXPECT_EQ(out.format, FormatClass::kNone);
  EXPECT_EQ(out.length, 4u);
  EXPECT_EQ(out.action, Action::kInvalid);
}

TEST(ParseNodeOutput, EdgeCases) {
  EXPECT_EQ(parse_node_output("").format, FormatClass::kNone);
  EXPECT_EQ(parse_node_output("").length, 0u);
  EXPECT_EQ(parse_node_output("  <think>a</think>\n <answer>accept</answer>\n").format, FormatClass::kMax);
  EXPECT_EQ(parse_node_output("<answer>maybe</answer>").action, Action::kInvalid);
  EXPECT_EQ(parse_node_output("<answer>maybe</answer><answer>accept</answer>").action, Action::kAccept);
  EXPECT_EQ(parse_node_output("<think>a</think><answer>accept</answer> extra").format, FormatClass::kCorr);
  EXPECT_EQ(parse_node_output("<think>a<answer>accept</answer>").format, FormatClass::kCorr);
}

TEST(ParseNodeOutput, TotalAndConsistent) {
  const std::string pieces[] = {"<think>", "</think>", "<answer>", "</answer>", "accept", "continue",
                                "delete", " ", "x", "\n", "<", ">"};
  std::uint64_t state = 7;
  for (int trial = 0; trial < 3000; ++trial) {
    std::string text;
    const int len = static_cast<int>(state % 9);
    for (int i = 0; i < len; ++i) {
      state = mix_seed(state);
      text += pieces[state % std::size(pieces)];
    }
    state = mix_seed(state);
    const NodeOutput out = parse_node_output(text);
    EXPECT_EQ(out.length, count_whitespace_tokens(text));
    EXPECT_EQ(out.format == FormatClass::kNone, out.action == Action::kInvalid) << text;
  }
}

TEST(ParseNodeOutput, CanonicalRoundTrip) {
  for (Action a : {Action::kAccept, Action::kContinue, Action::kDelete}) {
    const std::string text = format_node_text("the node shows the race", a);
    const NodeOutput out = parse_node_output(text);
    ASSERT_EQ(out.format, FormatClass::kMax);
    EXPECT_EQ(out.action, a);
    EXPECT_EQ(format_node_text(out.reasoning, out.action), text);
  }
}

TEST(DecideNode, ScriptedAccept) {
  ScriptedPolicy policy([](const PolicyDecisionRequest&) {
    return std::string("<think>relevant race footage</think><answer>accept</answer>");
  });
  Rng rng(0);
  const NodeOutput out = decide_node(request("c", "q", 1), policy, rng);
  EXPECT_EQ(out.action, Action::kAccept);
  EXPECT_EQ(out.format, FormatClass::kMax);
}

TEST(DecideNode, ScriptedProseIsInvalid) {
  ScriptedPolicy policy([](const PolicyDecisionRequest&) { return std::string("I would keep it"); });
  Rng rng(0);
  const NodeOutput out = decide_node(request("c", "q", 1), policy, rng);
  EXPECT_EQ(out.action, Action::kInvalid);
  EXPECT_EQ(out.format, FormatClass::kNone);
}

TEST(DecideNode, SurrogateCumulativeSampling) {
  Weights w{};
  w[3] = {std::log(0.1), std::log(0.2), std::log(0.7)};
  SurrogatePolicy policy(w);
  PolicyDecisionRequest req = request("c", "q", 1);
  req.max_depth = 4;
  req.frame_count = 3;
  req.caption_embedding = CaptionEmbedding::normalized({1, 0});
  req.question_embedding = CaptionEmbedding::normalized({0, 1});
  const auto probs = policy.probabilities(policy_features(req));
  EXPECT_NEAR(probs[0], 0.1, 1e-12);
  EXPECT_NEAR(probs[2], 0.7, 1e-12);

  // Find a seed whose first draw is 0.95 to two decimals.
  std::uint64_t seed = 0;
  for (;; ++seed) {
    Rng probe(seed);
    const double u = probe.uniform();
    if (u >= 0.945 && u < 0.955) break;
  }
  Rng rng(seed);
  const NodeOutput out = decide_node(req, policy, rng);
  EXPECT_EQ(out.action, Action::kDelete);
  ASSERT_TRUE(out.action_logprob.has_value());
  EXPECT_NEAR(*out.action_logprob, std::log(0.7), 1e-12);
  EXPECT_EQ(out.format, FormatClass::kMax);

  // Draws below 0.1 accept, draws in [0.1, 0.3) continue.
  for (std::uint64_t s = 0; s < 200; ++s) {
    Rng probe(s);
    const double u = probe.uniform();
    Rng r(s);
    const Action a = policy.decide(req, r).action;
    EXPECT_EQ(a, u < 0.1 ? Action::kAccept : u < 0.1 + 0.2 ? Action::kContinue : Action::kDelete);
  }
}

TEST(MockClients, ScriptedCaptioner) {
  const FrameSequence seq = constant_sequence({1, 2, 3, 4, 5, 6});
  ScriptedCaptioner captioner({{1, 3, "a kettle"}, {4, 6, "a lamp"}});
  Event e;
  e.start = 4;
  e.end = 5;
  EXPECT_EQ(caption_event(e, seq, "q", captioner), "a lamp");
  e.start = 3;
  EXPECT_EQ(caption_event(e, seq, "q", captioner), "a kettle. a lamp");
}

TEST(MockClients, EmbedDeterministic) {
  MockEmbedder embedder;
  const std::vector<std::string> abc{"abc"};
  const auto a = embed(abc, embedder);
  const auto b = embed(abc, embedder);
  EXPECT_EQ(a[0].values, b[0].values);
  EXPECT_EQ(a[0].dim(), 64u);
  const std::vector<std::string> two{"a dog runs", "a cat sleeps"};
  const auto v = embed_captions(two, embedder);
  EXPECT_LT(v[0].dot(v[1]), 1.0 - 1e-9);
}

class RaggedEmbedder final : public Embedder {
 public:
  std::vector<CaptionEmbedding> embed(std::span<const std::string> texts) const override {
    std::vector<CaptionEmbedding> out;
    for (std::size_t i = 0; i < texts.size(); ++i) out.push_back({std::vector<double>(2 + i, 1.0)});
    return out;
  }
};

TEST(MockClients, DimensionMismatch) {
  RaggedEmbedder embedder;
  const std::vector<std::string> texts{"a", "b"};
  EXPECT_EQ(error_code_of([&] { embed(texts, embedder); }), ErrorCode::kDimensionMismatch);
}

TEST(AnswerQuestion, ScriptedAndEmpty) {
  ScriptedAnswerer answerer("B");
  const std::vector<std::string> captions{"x"};
  EXPECT_EQ(answer_question(captions, "q", answerer), "B");
  EXPECT_EQ(error_code_of([&] { answer_question({}, "q", answerer); }), ErrorCode::kPrecondition);
}

TEST(KeywordAnswerer, PicksMentionedOption) {
  KeywordAnswerer answerer;
  const std::vector<std::string> captions{"a quiet hallway with a lamp",
                                          "a kettle appears during the cooking demonstration"};
  EXPECT_EQ(answerer.answer(captions, "Which object appears during the cooking demonstration? "
                                      "(A) lamp (B) kettle"),
            "B");
}

// Local chat/embeddings server with a scripted failure sequence.
class FakeServer {
 public:
  FakeServer() {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      const int n = ++calls_;
      auth_ = req.get_header_value("Authorization");
      if (n <= fail_first_) {
        res.status = 500;
        return;
      }
      if (delay_ms_ > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms_));
      res.set_content(json{{"choices", {{{"message", {{"content", reply_}}}}}}}.dump(),
                      "application/json");
    });
    server_.Post("/v1/embeddings", [this](const httplib::Request&, httplib::Response& res) {
      ++calls_;
      res.set_content(json{{"data", {{{"embedding", {1.0, 0.0}}}, {{"embedding", {1.0, 0.0, 2.0}}}}}}.dump(),
                      "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeServer() {
    server_.stop();
    thread_.join();
  }
  ClientConfig config() const {
    ClientConfig cfg;
    cfg.base_url = "http://127.0.0.1:" + std::to_string(port_) + "/v1";
    cfg.model_name = "test-model";
    cfg.retry_backoff = 0.001;
    cfg.timeout = 2.0;
    return cfg;
  }
  int fail_first_ = 0;
  int delay_ms_ = 0;
  std::string reply_ = "<think>ok</think><answer>accept</answer>";
  std::atomic<int> calls_{0};
  std::string auth_;

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

TEST(RemoteClients, RetriesThenSucceeds) {
  FakeServer server;
  server.fail_first_ = 2;
  ClientConfig cfg = server.config();
  cfg.max_retries = 3;
  RemotePolicy policy(std::make_shared<HttpTransport>(cfg));
  Rng rng(0);
  const NodeOutput out = policy.decide(request("c", "q", 1), rng);
  EXPECT_EQ(out.action, Action::kAccept);
  EXPECT_EQ(server.calls_.load(), 3);
}

TEST(RemoteClients, GivesUpAfterMaxRetries) {
  FakeServer server;
  server.fail_first_ = 100;
  ClientConfig cfg = server.config();
  cfg.max_retries = 2;
  RemoteAnswerer answerer(std::make_shared<HttpTransport>(cfg));
  const std::vector<std::string> captions{"x"};
  EXPECT_EQ(error_code_of([&] { answerer.answer(captions, "q"); }), ErrorCode::kServiceError);
  EXPECT_EQ(server.calls_.load(), 3);
}

TEST(RemoteClients, TimeoutsBecomeServiceError) {
  FakeServer server;
  server.delay_ms_ = 400;
  ClientConfig cfg = server.config();
  cfg.timeout = 0.1;
  cfg.max_retries = 1;
  RemoteAnswerer answerer(std::make_shared<HttpTransport>(cfg));
  const std::vector<std::string> captions{"x"};
  EXPECT_EQ(error_code_of([&] { answerer.answer(captions, "q"); }), ErrorCode::kServiceError);
  EXPECT_EQ(server.calls_.load(), 2);
}

TEST(RemoteClients, ApiKeyFromEnvironment) {
  FakeServer server;
  ClientConfig cfg = server.config();
  cfg.api_key_env = "VIDEOMINER_TEST_API_KEY";
  ::setenv("VIDEOMINER_TEST_API_KEY", "sekrit", 1);
  RemoteAnswerer answerer(std::make_shared<HttpTransport>(cfg));
  const std::vector<std::string> captions{"x"};
  EXPECT_EQ(answerer.answer(captions, "q"), server.reply_);
  EXPECT_EQ(server.auth_, "Bearer sekrit");
  ::unsetenv("VIDEOMINER_TEST_API_KEY");
}

TEST(RemoteClients, MultiLineAnswerVerbatim) {
  FakeServer server;
  server.reply_ = "B\nbecause the runner\nwins";
  RemoteAnswerer answerer(std::make_shared<HttpTransport>(server.config()));
  const std::vector<std::string> captions{"x"};
  EXPECT_EQ(answer_question(captions, "q", answerer), server.reply_);
}

TEST(RemoteClients, ProseFromPolicyIsInvalid) {
  FakeServer server;
  server.reply_ = "just some prose";
  RemotePolicy policy(std::make_shared<HttpTransport>(server.config()));
  Rng rng(0);
  const NodeOutput out = policy.decide(request("c", "q", 1), rng);
  EXPECT_EQ(out.action, Action::kInvalid);
  EXPECT_EQ(out.format, FormatClass::kNone);
}

TEST(RemoteClients, CaptionerSendsImages) {
  FakeServer server;
  server.reply_ = "a person walks";
  RemoteCaptioner captioner(std::make_shared<HttpTransport>(server.config()));
  const FrameSequence seq = constant_sequence({1, 2, 3});
  Event e;
  e.start = 1;
  e.end = 3;
  EXPECT_EQ(caption_event(e, seq, "q", captioner), "a person walks");
}

TEST(RemoteClients, InconsistentEmbeddingDims) {
  FakeServer server;
  RemoteEmbedder embedder(std::make_shared<HttpTransport>(server.config()));
  const std::vector<std::string> texts{"a", "b"};
  EXPECT_EQ(error_code_of([&] { embed(texts, embedder); }), ErrorCode::kDimensionMismatch);
}

TEST(RemoteClients, UnreachableEndpoint) {
  ClientConfig cfg;
  cfg.base_url = "http://127.0.0.1:1";
  cfg.max_retries = 0;
  cfg.timeout = 0.5;
  RemoteAnswerer answerer(std::make_shared<HttpTransport>(cfg));
  const std::vector<std::string> captions{"x"};
  EXPECT_EQ(error_code_of([&] { answerer.answer(captions, "q"); }), ErrorCode::kServiceError);
}

TEST(ClientConfig, Validation) {
  ClientConfig cfg;
  cfg.base_url = "ftp://x";
  EXPECT_EQ(error_code_of([&] { cfg.validate("clients.policy"); }), ErrorCode::kValidationError);
  cfg.base_url = "http://x";
  cfg.timeout = 0;
  EXPECT_EQ(error_code_of([&] { cfg.validate("clients.policy"); }), ErrorCode::kValidationError);
}

}  // namespace
}  // namespace videominer
