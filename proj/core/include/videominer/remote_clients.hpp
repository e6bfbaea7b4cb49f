// SPDX-License-Identifier: Apache-2.0

#ifndef VIDEOMINER_REMOTE_CLIENTS_HPP_
#define VIDEOMINER_REMOTE_CLIENTS_HPP_

#include <condition_variable>
#include <cstddef>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "videominer/clients.hpp"

namespace videominer {

// Connection settings for one model role. The API key itself is read from
// the environment variable named by api_key_env at request time.
struct ClientConfig {
  std::string base_url;
  std::string model_name;
  std::string api_key_env;
  double timeout = 60.0;  // seconds
  int max_retries = 3;
  double retry_backoff = 1.0;  // seconds, doubled after every failed attempt
  std::size_t max_concurrency = 4;
  double temperature = 0.0;
  int max_tokens = 512;
  std::size_t max_caption_frames = kDefaultMaxCaptionFrames;

  void validate(const std::string& field) const;
  bool operator==(const ClientConfig&) const = default;
};

// JSON-over-HTTP transport with bounded in-flight requests and retries on
// connection failures, timeouts, 429 and 5xx. At most max_retries + 1
// attempts are made.
class HttpTransport {
 public:
  explicit HttpTransport(ClientConfig config);

  nlohmann::json post_json(const std::string& path, const nlohmann::json& body) const;
  const ClientConfig& config() const { return config_; }

 private:
  class Slots {
   public:
    explicit Slots(std::size_t limit) : free_(limit) {}
    void acquire();
    void release();

   private:
    std::mutex mutex_;
    std::condition_variable cv_;
    std::size_t free_;
  };

  ClientConfig config_;
  std::string origin_;  // scheme://host[:port]
  std::string prefix_;  // path part of base_url, no trailing slash
  std::unique_ptr<Slots> slots_;
};

// Chat-completions request body: {model, messages, temperature, max_tokens}.
nlohmann::json chat_body(const ClientConfig& config, nlohmann::json messages);

// Text of choices[0].message.content. Errors: ServiceError, EmptyResponse.
std::string chat_content(const nlohmann::json& response);

// "data:image/png;base64,..." for one frame.
std::string frame_data_url(const Frame& frame);

class RemoteCaptioner final : public Captioner {
 public:
  explicit RemoteCaptioner(std::shared_ptr<const HttpTransport> transport);
  std::string caption(const CaptionRequest& request) const override;

 private:
  std::shared_ptr<const HttpTransport> transport_;
};

class RemotePolicy final : public Policy {
 public:
  explicit RemotePolicy(std::shared_ptr<const HttpTransport> transport);
  NodeOutput decide(const PolicyDecisionRequest& request, Rng& rng) const override;

 private:
  std::shared_ptr<const HttpTransport> transport_;
};

class RemoteAnswerer final : public Answerer {
 public:
  explicit RemoteAnswerer(std::shared_ptr<const HttpTransport> transport);
  std::string answer(std::span<const std::string> captions,
                     const std::string& question) const override;

 private:
  std::shared_ptr<const HttpTransport> transport_;
};

// POST {base_url}/embeddings with {model, input: [...]}.
class RemoteEmbedder final : public Embedder {
 public:
  explicit RemoteEmbedder(std::shared_ptr<const HttpTransport> transport);
  std::vector<CaptionEmbedding> embed(std::span<const std::string> texts) const override;

 private:
  std::shared_ptr<const HttpTransport> transport_;
};

}  // namespace videominer

#endif  // VIDEOMINER_REMOTE_CLIENTS_HPP_
