// SPDX-License-Identifier: Apache-2.0

#ifndef VIDEOMINER_CONFIG_HPP_
#define VIDEOMINER_CONFIG_HPP_

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "videominer/remote_clients.hpp"
#include "videominer/rewards.hpp"
#include "videominer/trainer.hpp"
#include "videominer/tree.hpp"

namespace videominer {

// A role is served either by the offline mock or by a remote endpoint.
struct RoleConfig {
  bool mock = true;
  ClientConfig remote;

  bool operator==(const RoleConfig&) const = default;
};

struct ClientsConfig {
  RoleConfig captioner;
  RoleConfig embedder;
  RoleConfig policy;
  RoleConfig answerer;

  bool operator==(const ClientsConfig&) const = default;
};

struct PathsConfig {
  std::string workspace = ".";
  std::string policy;  // surrogate weights JSON; empty: seeded random init

  bool operator==(const PathsConfig&) const = default;
};

struct AppConfig {
  SegmentationConfig segmentation;
  ClusterConfig clustering;
  ExplorationConfig exploration;
  RewardConfig rewards;
  TrainerConfig trainer;
  ClientsConfig clients;
  PathsConfig paths;

  PipelineConfig pipeline() const { return {segmentation, clustering, exploration}; }
  void validate() const;
  bool operator==(const AppConfig&) const = default;
};

// Missing sections and keys keep their defaults; unknown keys and wrong
// types raise ValidationError naming the field ("trainer.foo: unknown key").
AppConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const AppConfig& config);

// Errors: MissingFile, ParseError, ValidationError.
AppConfig load_config(const std::filesystem::path& path);

// Reward section alone, as accepted by `train --reward-config`.
RewardConfig rewards_from_json(const nlohmann::json& doc, const std::string& prefix = "rewards");

}  // namespace videominer

#endif  // VIDEOMINER_CONFIG_HPP_
