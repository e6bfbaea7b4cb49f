// SPDX-License-Identifier: Apache-2.0

#include "videominer/config.hpp"

#include <fstream>
#include <set>
#include <type_traits>

namespace videominer {
namespace {

using nlohmann::json;

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

[[noreturn]] void invalid(const std::string& field, const std::string& what) {
  fail(ErrorCode::kValidationError, field + ": " + what);
}

// Reads known keys of one JSON object and rejects the rest.
class Section {
 public:
  Section(const json& doc, std::string prefix) : doc_(doc), prefix_(std::move(prefix)) {
    if (!doc_.is_object()) invalid(prefix_.empty() ? "config" : prefix_, "expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return doc_.contains(key);
  }

  const json& raw(const std::string& key) { return doc_.at(key); }

  template <typename T>
  void get(const std::string& key, T& out) {
    if (!has(key)) return;
    const json& v = doc_.at(key);
    const std::string field = join(prefix_, key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) invalid(field, "expected a boolean");
      out = v.get<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) invalid(field, "expected a string");
      out = v.get<std::string>();
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) invalid(field, "expected a number");
      out = v.get<T>();
    } else if constexpr (std::is_unsigned_v<T>) {
      if (!v.is_number_unsigned()) invalid(field, "expected a non-negative integer");
      out = v.get<T>();
    } else {
      if (!v.is_number_integer()) invalid(field, "expected an integer");
      out = v.get<T>();
    }
  }

  void finish() const {
    for (const auto& [key, value] : doc_.items()) {
      if (!seen_.count(key)) fail(ErrorCode::kValidationError, join(prefix_, key) + ": unknown key");
    }
  }

  const std::string& prefix() const { return prefix_; }

 private:
  const json& doc_;
  std::string prefix_;
  std::set<std::string> seen_;
};

void read(Section& s, SegmentationConfig& c) {
  s.get("k_scenes", c.k_scenes);
  s.get("bc_clamp", c.bc_clamp);
  s.get("min_event_frames", c.min_event_frames);
}

void read(Section& s, ClusterConfig& c) {
  s.get("eps", c.eps);
  s.get("min_pts", c.min_pts);
  std::string policy = c.noise_policy == NoisePolicy::kDrop ? "drop" : "singleton";
  s.get("noise_policy", policy);
  if (policy == "singleton") {
    c.noise_policy = NoisePolicy::kSingleton;
  } else if (policy == "drop") {
    c.noise_policy = NoisePolicy::kDrop;
  } else {
    invalid(join(s.prefix(), "noise_policy"), "expected \"singleton\" or \"drop\"");
  }
}

void read(Section& s, ExplorationConfig& c) {
  s.get("max_depth", c.max_depth);
  s.get("max_total_nodes", c.max_total_nodes);
  s.get("k_scenes_root", c.k_scenes_root);
  s.get("target_event_len", c.target_event_len);
  s.get("max_keyframes", c.max_keyframes);
  std::string leaf = "coerce_accept";
  s.get("leaf_continue_policy", leaf);
  if (leaf != "coerce_accept") {
    invalid(join(s.prefix(), "leaf_continue_policy"), "expected \"coerce_accept\"");
  }
  c.leaf_continue_policy = LeafContinuePolicy::kCoerceAccept;
  s.get("caption_char_budget", c.caption_char_budget);
  s.get("caption_concurrency", c.caption_concurrency);
}

void read(Section& s, RewardConfig& c) {
  s.get("delta_max", c.delta_max);
  s.get("delta_corr", c.delta_corr);
  s.get("rho", c.rho);
  s.get("sigma", c.sigma);
  s.get("l_target", c.l_target);
  s.get("delta_d", c.delta_d);
  s.get("delta_a", c.delta_a);
  s.get("delta_c", c.delta_c);
}

void read(Section& s, TrainerConfig& c) {
  s.get("clip_eps", c.clip_eps);
  s.get("kl_beta", c.kl_beta);
  s.get("group_size", c.group_size);
  s.get("batch_size", c.batch_size);
  s.get("learning_rate", c.learning_rate);
  s.get("iterations", c.iterations);
  s.get("inner_epochs", c.inner_epochs);
  s.get("seed", c.seed);
  s.get("std_floor", c.std_floor);
  s.get("max_grad_norm", c.max_grad_norm);
}

void read(Section& s, ClientConfig& c) {
  s.get("base_url", c.base_url);
  s.get("model_name", c.model_name);
  s.get("api_key_env", c.api_key_env);
  s.get("timeout", c.timeout);
  s.get("max_retries", c.max_retries);
  s.get("retry_backoff", c.retry_backoff);
  s.get("max_concurrency", c.max_concurrency);
  s.get("temperature", c.temperature);
  s.get("max_tokens", c.max_tokens);
  s.get("max_caption_frames", c.max_caption_frames);
}

void read_role(Section& parent, const std::string& key, RoleConfig& role) {
  if (!parent.has(key)) return;
  const json& v = parent.raw(key);
  const std::string field = join(parent.prefix(), key);
  if (v.is_string()) {
    if (v.get<std::string>() != "mock") invalid(field, "expected \"mock\" or an endpoint object");
    role = RoleConfig{};
    return;
  }
  Section s(v, field);
  role.mock = false;
  read(s, role.remote);
  s.finish();
}

void read(Section& s, ClientsConfig& c) {
  read_role(s, "captioner", c.captioner);
  read_role(s, "embedder", c.embedder);
  read_role(s, "policy", c.policy);
  read_role(s, "answerer", c.answerer);
}

void read(Section& s, PathsConfig& c) {
  s.get("workspace", c.workspace);
  s.get("policy", c.policy);
}

template <typename T>
void read_section(Section& top, const std::string& key, T& out) {
  if (!top.has(key)) return;
  Section s(top.raw(key), key);
  read(s, out);
  s.finish();
}

json client_to_json(const ClientConfig& c) {
  return {{"base_url", c.base_url},
          {"model_name", c.model_name},
          {"api_key_env", c.api_key_env},
          {"timeout", c.timeout},
          {"max_retries", c.max_retries},
          {"retry_backoff", c.retry_backoff},
          {"max_concurrency", c.max_concurrency},
          {"temperature", c.temperature},
          {"max_tokens", c.max_tokens},
          {"max_caption_frames", c.max_caption_frames}};
}

json role_to_json(const RoleConfig& role) {
  return role.mock ? json("mock") : client_to_json(role.remote);
}

}  // namespace

void AppConfig::validate() const {
  segmentation.validate();
  clustering.validate();
  exploration.validate();
  rewards.validate();
  trainer.validate();
  const std::pair<const char*, const RoleConfig*> roles[] = {{"clients.captioner", &clients.captioner},
                                                             {"clients.embedder", &clients.embedder},
                                                             {"clients.policy", &clients.policy},
                                                             {"clients.answerer", &clients.answerer}};
  for (const auto& [name, role] : roles) {
    if (!role->mock) role->remote.validate(name);
  }
}

AppConfig config_from_json(const json& doc) {
  AppConfig config;
  Section top(doc, "");
  read_section(top, "segmentation", config.segmentation);
  read_section(top, "clustering", config.clustering);
  read_section(top, "exploration", config.exploration);
  read_section(top, "rewards", config.rewards);
  read_section(top, "trainer", config.trainer);
  read_section(top, "clients", config.clients);
  read_section(top, "paths", config.paths);
  top.finish();
  config.validate();
  return config;
}

RewardConfig rewards_from_json(const json& doc, const std::string& prefix) {
  RewardConfig config;
  Section s(doc, prefix);
  read(s, config);
  s.finish();
  config.validate();
  return config;
}

json config_to_json(const AppConfig& c) {
  return {
      {"segmentation",
       {{"k_scenes", c.segmentation.k_scenes},
        {"bc_clamp", c.segmentation.bc_clamp},
        {"min_event_frames", c.segmentation.min_event_frames}}},
      {"clustering",
       {{"eps", c.clustering.eps},
        {"min_pts", c.clustering.min_pts},
        {"noise_policy", c.clustering.noise_policy == NoisePolicy::kDrop ? "drop" : "singleton"}}},
      {"exploration",
       {{"max_depth", c.exploration.max_depth},
        {"max_total_nodes", c.exploration.max_total_nodes},
        {"k_scenes_root", c.exploration.k_scenes_root},
        {"target_event_len", c.exploration.target_event_len},
        {"max_keyframes", c.exploration.max_keyframes},
        {"leaf_continue_policy", "coerce_accept"},
        {"caption_char_budget", c.exploration.caption_char_budget},
        {"caption_concurrency", c.exploration.caption_concurrency}}},
      {"rewards",
       {{"delta_max", c.rewards.delta_max},
        {"delta_corr", c.rewards.delta_corr},
        {"rho", c.rewards.rho},
        {"sigma", c.rewards.sigma},
        {"l_target", c.rewards.l_target},
        {"delta_d", c.rewards.delta_d},
        {"delta_a", c.rewards.delta_a},
        {"delta_c", c.rewards.delta_c}}},
      {"trainer",
       {{"clip_eps", c.trainer.clip_eps},
        {"kl_beta", c.trainer.kl_beta},
        {"group_size", c.trainer.group_size},
        {"batch_size", c.trainer.batch_size},
        {"learning_rate", c.trainer.learning_rate},
        {"iterations", c.trainer.iterations},
        {"inner_epochs", c.trainer.inner_epochs},
        {"seed", c.trainer.seed},
        {"std_floor", c.trainer.std_floor},
        {"max_grad_norm", c.trainer.max_grad_norm}}},
      {"clients",
       {{"captioner", role_to_json(c.clients.captioner)},
        {"embedder", role_to_json(c.clients.embedder)},
        {"policy", role_to_json(c.clients.policy)},
        {"answerer", role_to_json(c.clients.answerer)}}},
      {"paths", {{"workspace", c.paths.workspace}, {"policy", c.paths.policy}}},
  };
}

AppConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kMissingFile, "cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
  return config_from_json(doc);
}

}  // namespace videominer
