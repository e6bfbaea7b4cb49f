// SPDX-License-Identifier: Apache-2.0

#ifndef VIDEOMINER_TRAINER_HPP_
#define VIDEOMINER_TRAINER_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "videominer/rewards.hpp"
#include "videominer/surrogate_policy.hpp"
#include "videominer/tree.hpp"

namespace videominer {

struct TrainerConfig {
  double clip_eps = 0.2;
  double kl_beta = 0.04;
  std::size_t group_size = 4;
  // Questions rolled out per iteration; their groups share one update.
  std::size_t batch_size = 1;
  double learning_rate = 0.05;
  std::size_t iterations = 0;
  std::size_t inner_epochs = 1;
  std::uint64_t seed = 0;
  double std_floor = kDefaultStdFloor;
  // Gradient steps are rescaled to at most this L2 norm; 0 disables.
  double max_grad_norm = 1.0;

  void validate() const;
  bool operator==(const TrainerConfig&) const = default;
};

// One decided node of one rollout tree.
struct NodeSample {
  std::size_t tree = 0;
  std::size_t node = 0;
  Features features{};
  Action action = Action::kInvalid;
  std::optional<double> old_logprob;  // absent for policies without log-probs
  double advantage = 0.0;
  RewardBreakdown reward;
};

struct RolloutGroup {
  std::string question;
  std::string gold;
  std::vector<VideoTree> trees;
  std::vector<NodeSample> samples;  // tree-major, BFS order within a tree

  std::vector<double> rewards() const;
  std::vector<double> advantages() const;
  nlohmann::json to_json() const;
};

// One question instance: frames, question, gold option and the captioner
// that describes its frames.
struct Episode {
  FrameSequence frames;
  std::string question;
  std::string gold;
  std::shared_ptr<const Captioner> captioner;
};

// Everything a rollout needs besides the episode.
struct RolloutSettings {
  PipelineConfig pipeline;
  RewardConfig rewards;
  TrainerConfig trainer;
};

// Builds group_size trees with sub-seeds of `seed`, answers each, and scores
// every decided node. `clients.captioner` is replaced by the episode's.
// A tree without keyframes gets R_tree = 0. Errors: EmptyGroup when no node
// was decided, plus propagated pipeline errors.
RolloutGroup rollout(const Episode& episode, const Clients& clients,
                     const RolloutSettings& settings, std::uint64_t seed);

struct ObjectiveValue {
  double value = 0.0;
  Weights gradient{};  // dJ / dW
};

// Mean over samples of clipped_term - beta * kl_penalty. With several
// groups the mean runs over all their samples. Errors: EmptyGroup, precondition
// when a sample has no old log-prob.
double objective(const RolloutGroup& group, const SurrogatePolicy& policy,
                 const SurrogatePolicy& reference, const TrainerConfig& cfg);
double objective(std::span<const RolloutGroup> groups, const SurrogatePolicy& policy,
                 const SurrogatePolicy& reference, const TrainerConfig& cfg);
ObjectiveValue objective_with_gradient(const RolloutGroup& group, const SurrogatePolicy& policy,
                                       const SurrogatePolicy& reference,
                                       const TrainerConfig& cfg);
ObjectiveValue objective_with_gradient(std::span<const RolloutGroup> groups,
                                       const SurrogatePolicy& policy,
                                       const SurrogatePolicy& reference,
                                       const TrainerConfig& cfg);

struct TrainLogEntry {
  std::size_t iter = 0;
  double objective = 0.0;
  double mean_reward = 0.0;
  double p_accept = 0.0;
  double p_continue = 0.0;
  double p_delete = 0.0;
  double mean_nodes = 0.0;
  double lambda_auxin = 0.0;

  nlohmann::json to_json() const;
};

struct TrainResult {
  SurrogatePolicy policy;
  SurrogatePolicy reference;
  std::vector<TrainLogEntry> log;
};

using TrainLogSink = std::function<void(const TrainLogEntry&)>;

// T-GRPO: per iteration snapshot old <- current, roll out on batch_size
// consecutive episodes (cycling), then inner_epochs ascent steps on J. The
// reference policy stays at `initial`. Errors: precondition on an empty
// episode set, NonFiniteGradient.
TrainResult train(const std::vector<Episode>& episodes, const Clients& clients,
                  const RolloutSettings& settings, const SurrogatePolicy& initial,
                  const TrainLogSink& sink = {});

}  // namespace videominer

#endif  // VIDEOMINER_TRAINER_HPP_
