// SPDX-License-Identifier: Apache-2.0

#include "videominer/remote_clients.hpp"

#include <httplib.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <map>
#include <thread>

#include "videominer/error.hpp"
#include "videominer/image_io.hpp"
#include "videominer/prompts.hpp"

namespace videominer {

using nlohmann::json;

namespace {

std::string fill(std::string_view tmpl, const std::map<std::string, std::string>& values) {
  std::string out(tmpl);
  for (const auto& [key, value] : values) {
    const std::string token = "{" + key + "}";
    for (std::size_t pos = out.find(token); pos != std::string::npos;
         pos = out.find(token, pos + value.size())) {
      out.replace(pos, token.size(), value);
    }
  }
  return out;
}

std::chrono::microseconds to_micros(double seconds) {
  return std::chrono::microseconds(static_cast<std::int64_t>(seconds * 1e6));
}

}  // namespace

void ClientConfig::validate(const std::string& field) const {
  auto invalid = [&](const std::string& name, const std::string& why) {
    fail(ErrorCode::kValidationError, field + "." + name + " " + why);
  };
  if (base_url.rfind("http://", 0) != 0 && base_url.rfind("https://", 0) != 0) {
    invalid("base_url", "must start with http:// or https://");
  }
  if (!(timeout > 0.0)) invalid("timeout", "must be > 0");
  if (max_retries < 0) invalid("max_retries", "must be >= 0");
  if (retry_backoff < 0.0) invalid("retry_backoff", "must be >= 0");
  if (max_concurrency < 1) invalid("max_concurrency", "must be >= 1");
  if (max_tokens < 1) invalid("max_tokens", "must be >= 1");
  if (max_caption_frames < 1) invalid("max_caption_frames", "must be >= 1");
}

void HttpTransport::Slots::acquire() {
  std::unique_lock lock(mutex_);
  cv_.wait(lock, [this] { return free_ > 0; });
  --free_;
}

void HttpTransport::Slots::release() {
  {
    std::lock_guard lock(mutex_);
    ++free_;
  }
  cv_.notify_one();
}

HttpTransport::HttpTransport(ClientConfig config)
    : config_(std::move(config)),
      slots_(std::make_unique<Slots>(std::max<std::size_t>(config_.max_concurrency, 1))) {
  config_.validate("client");
  const std::size_t scheme_end = config_.base_url.find("://") + 3;
  const std::size_t path_start = config_.base_url.find('/', scheme_end);
  origin_ = config_.base_url.substr(0, path_start);
  prefix_ = path_start == std::string::npos ? "" : config_.base_url.substr(path_start);
  while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
}

json HttpTransport::post_json(const std::string& path, const json& body) const {
  httplib::Headers headers;
  if (!config_.api_key_env.empty()) {
    if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
  }
  const std::string payload = body.dump();
  const std::string target = prefix_ + path;

  struct SlotGuard {
    Slots& slots;
    explicit SlotGuard(Slots& s) : slots(s) { slots.acquire(); }
    ~SlotGuard() { slots.release(); }
  } guard(*slots_);

  std::string last_failure;
  const int attempts = config_.max_retries + 1;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0 && config_.retry_backoff > 0.0) {
      std::this_thread::sleep_for(to_micros(config_.retry_backoff * std::ldexp(1.0, attempt - 1)));
    }
    httplib::Client client(origin_);
    client.set_connection_timeout(to_micros(config_.timeout));
    client.set_read_timeout(to_micros(config_.timeout));
    client.set_write_timeout(to_micros(config_.timeout));
    auto result = client.Post(target, headers, payload, "application/json");
    if (!result) {
      last_failure = "request failed: " + httplib::to_string(result.error());
      continue;
    }
    const int status = result->status;
    if (status >= 200 && status < 300) {
      try {
        return json::parse(result->body);
      } catch (const json::exception& e) {
        fail(ErrorCode::kServiceError, target + ": response is not JSON: " + e.what());
      }
    }
    last_failure = "HTTP " + std::to_string(status);
    if (status != 429 && status < 500) break;
  }
  fail(ErrorCode::kServiceError, origin_ + target + ": " + last_failure);
}

json chat_body(const ClientConfig& config, json messages) {
  return {{"model", config.model_name},
          {"messages", std::move(messages)},
          {"temperature", config.temperature},
          {"max_tokens", config.max_tokens}};
}

std::string chat_content(const json& response) {
  const json* content = nullptr;
  if (response.contains("choices") && response["choices"].is_array() &&
      !response["choices"].empty()) {
    const json& choice = response["choices"][0];
    if (choice.contains("message") && choice["message"].contains("content")) {
      content = &choice["message"]["content"];
    }
  }
  if (content == nullptr) fail(ErrorCode::kServiceError, "chat response has no message content");
  std::string text;
  if (content->is_string()) {
    text = content->get<std::string>();
  } else if (content->is_array()) {
    for (const auto& part : *content) {
      if (part.contains("text") && part["text"].is_string()) text += part["text"].get<std::string>();
    }
  }
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
    fail(ErrorCode::kEmptyResponse, "chat response content is empty");
  }
  return text;
}

std::string frame_data_url(const Frame& frame) {
  return "data:image/png;base64," + base64_encode(encode_png(frame));
}

RemoteCaptioner::RemoteCaptioner(std::shared_ptr<const HttpTransport> transport)
    : transport_(std::move(transport)) {}

std::string RemoteCaptioner::caption(const CaptionRequest& request) const {
  require(!request.frames.empty(), "cannot caption an empty event");
  const ClientConfig& cfg = transport_->config();
  json parts = json::array();
  parts.push_back({{"type", "text"},
                   {"text", fill(prompts::kCaptionUser, {{"question", request.question},
                                                         {"start", std::to_string(request.start)},
                                                         {"end", std::to_string(request.end)}})}});
  for (std::size_t pos : uniform_sample_positions(request.frames.size(), cfg.max_caption_frames)) {
    parts.push_back({{"type", "image_url"},
                     {"image_url", {{"url", frame_data_url(request.frames[pos])}}}});
  }
  json messages = json::array({{{"role", "system"}, {"content", prompts::kCaptionSystem}},
                               {{"role", "user"}, {"content", parts}}});
  return chat_content(transport_->post_json("/chat/completions", chat_body(cfg, messages)));
}

RemotePolicy::RemotePolicy(std::shared_ptr<const HttpTransport> transport)
    : transport_(std::move(transport)) {}

NodeOutput RemotePolicy::decide(const PolicyDecisionRequest& request, Rng&) const {
  const std::string user = fill(prompts::kDecideUser, {{"question", request.question},
                                                       {"depth", std::to_string(request.depth)},
                                                       {"caption", request.caption}});
  json messages = json::array({{{"role", "system"}, {"content", prompts::kDecideSystem}},
                               {{"role", "user"}, {"content", user}}});
  const json response =
      transport_->post_json("/chat/completions", chat_body(transport_->config(), messages));
  std::string text;
  try {
    text = chat_content(response);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kEmptyResponse) throw;
  }
  return parse_node_output(text);
}

RemoteAnswerer::RemoteAnswerer(std::shared_ptr<const HttpTransport> transport)
    : transport_(std::move(transport)) {}

std::string RemoteAnswerer::answer(std::span<const std::string> captions,
                                   const std::string& question) const {
  std::string joined;
  for (std::size_t i = 0; i < captions.size(); ++i) {
    joined += std::to_string(i + 1) + ". " + captions[i] + "\n";
  }
  const std::string user = fill(prompts::kAnswerUser, {{"captions", joined}, {"question", question}});
  json messages = json::array({{{"role", "system"}, {"content", prompts::kAnswerSystem}},
                               {{"role", "user"}, {"content", user}}});
  return chat_content(
      transport_->post_json("/chat/completions", chat_body(transport_->config(), messages)));
}

RemoteEmbedder::RemoteEmbedder(std::shared_ptr<const HttpTransport> transport)
    : transport_(std::move(transport)) {}

std::vector<CaptionEmbedding> RemoteEmbedder::embed(std::span<const std::string> texts) const {
  json body = {{"model", transport_->config().model_name},
               {"input", std::vector<std::string>(texts.begin(), texts.end())}};
  const json response = transport_->post_json("/embeddings", body);
  if (!response.contains("data") || !response["data"].is_array()) {
    fail(ErrorCode::kServiceError, "embeddings response has no data array");
  }
  const json& data = response["data"];
  if (data.size() != texts.size()) {
    fail(ErrorCode::kServiceError, "embeddings response has " + std::to_string(data.size()) +
                                       " items for " + std::to_string(texts.size()) + " inputs");
  }
  std::vector<CaptionEmbedding> out(texts.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const json& item = data[i];
    const std::size_t slot = item.contains("index") ? item["index"].get<std::size_t>() : i;
    if (slot >= out.size() || !item.contains("embedding") || !item["embedding"].is_array()) {
      fail(ErrorCode::kServiceError, "malformed embeddings item " + std::to_string(i));
    }
    out[slot].values = item["embedding"].get<std::vector<double>>();
  }
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i].dim() != out[0].dim()) {
      fail(ErrorCode::kDimensionMismatch, "embedding " + std::to_string(i) +
                                              " has dimension " + std::to_string(out[i].dim()) +
                                              ", expected " + std::to_string(out[0].dim()));
    }
  }
  return out;
}

}  // namespace videominer
