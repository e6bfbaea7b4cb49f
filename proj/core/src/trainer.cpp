// SPDX-License-Identifier: Apache-2.0

#include "videominer/trainer.hpp"

#include <cmath>
#include <future>

#include "videominer/error.hpp"

namespace videominer {
namespace {

struct TreeOutcome {
  VideoTree tree;
  int r_tree = 0;
};

TreeOutcome run_tree(const Episode& episode, const Clients& clients,
                     const PipelineConfig& pipeline, std::uint64_t seed) {
  TreeOutcome out;
  out.tree = build_tree(episode.frames, episode.question, clients, pipeline, seed);
  try {
    assign_keyframes(out.tree, pipeline.exploration);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNoKeyframes) throw;
    return out;
  }
  out.r_tree = tree_reward(final_answer(out.tree, *clients.answerer), episode.gold);
  return out;
}

void check_samples(const RolloutGroup& group) {
  if (group.samples.empty()) fail(ErrorCode::kEmptyGroup, "rollout group has no decided nodes");
}

double old_logprob_of(const NodeSample& s) {
  if (!s.old_logprob) {
    fail(ErrorCode::kPrecondition, "sample has no action log-prob; the rollout policy is not trainable");
  }
  return *s.old_logprob;
}

std::size_t total_samples(std::span<const RolloutGroup> groups) {
  std::size_t m = 0;
  for (const auto& g : groups) m += g.samples.size();
  if (m == 0) fail(ErrorCode::kEmptyGroup, "rollout groups have no decided nodes");
  return m;
}

}  // namespace

void TrainerConfig::validate() const {
  auto invalid = [](const std::string& what) {
    fail(ErrorCode::kValidationError, "trainer." + what);
  };
  if (!(clip_eps > 0 && clip_eps < 1)) invalid("clip_eps must lie in (0, 1)");
  if (!(kl_beta >= 0) || !std::isfinite(kl_beta)) invalid("kl_beta must be >= 0");
  if (group_size < 2) invalid("group_size must be >= 2");
  if (batch_size < 1) invalid("batch_size must be >= 1");
  if (!(learning_rate > 0) || !std::isfinite(learning_rate)) {
    invalid("learning_rate must be > 0");
  }
  if (inner_epochs < 1) invalid("inner_epochs must be >= 1");
  if (!(std_floor > 0)) invalid("std_floor must be > 0");
  if (!(max_grad_norm >= 0) || !std::isfinite(max_grad_norm)) {
    invalid("max_grad_norm must be >= 0");
  }
}

std::vector<double> RolloutGroup::rewards() const {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.reward.r_total);
  return out;
}

std::vector<double> RolloutGroup::advantages() const {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.advantage);
  return out;
}

nlohmann::json RolloutGroup::to_json() const {
  nlohmann::json trees_doc = nlohmann::json::array();
  for (const auto& t : trees) trees_doc.push_back(tree_to_json(t));
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& s : samples) {
    nodes.push_back({{"tree", s.tree},
                     {"node", s.node},
                     {"action", std::string(to_string(s.action))},
                     {"old_logprob", s.old_logprob ? nlohmann::json(*s.old_logprob) : nlohmann::json(nullptr)},
                     {"r_format", s.reward.r_format},
                     {"r_length", s.reward.r_length},
                     {"r_action", s.reward.r_action},
                     {"r_tree", s.reward.r_tree}});
  }
  return {{"question", question}, {"gold", gold},
          {"trees", std::move(trees_doc)}, {"nodes", std::move(nodes)},
          {"rewards", rewards()}, {"advantages", advantages()}};
}

nlohmann::json TrainLogEntry::to_json() const {
  return {{"iter", iter},
          {"J", objective},
          {"mean_reward", mean_reward},
          {"p_accept", p_accept},
          {"p_continue", p_continue},
          {"p_delete", p_delete},
          {"mean_nodes", mean_nodes},
          {"lambda_auxin", lambda_auxin}};
}

RolloutGroup rollout(const Episode& episode, const Clients& clients,
                     const RolloutSettings& settings, std::uint64_t seed) {
  settings.trainer.validate();
  settings.rewards.validate();
  require(episode.captioner != nullptr, "episode has no captioner");
  require(clients.embedder && clients.policy && clients.answerer,
          "rollout needs embedder, policy and answerer clients");
  Clients local = clients;
  local.captioner = episode.captioner;

  const std::size_t n = settings.trainer.group_size;
  std::vector<std::future<TreeOutcome>> pending;
  pending.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    pending.push_back(std::async(std::launch::async, run_tree, std::cref(episode),
                                 std::cref(local), std::cref(settings.pipeline),
                                 sub_seed(seed, i)));
  }
  std::vector<TreeOutcome> outcomes;
  outcomes.reserve(n);
  for (auto& f : pending) outcomes.push_back(f.get());

  const std::string question_text[] = {episode.question};
  const CaptionEmbedding question_embedding =
      embed_captions(question_text, *local.embedder).front();

  RolloutGroup group;
  group.question = episode.question;
  group.gold = episode.gold;
  for (std::size_t t = 0; t < outcomes.size(); ++t) {
    const VideoTree& tree = outcomes[t].tree;
    for (const TreeNode& node : tree.nodes) {
      if (!node.output) continue;
      PolicyDecisionRequest request;
      request.depth = node.depth;
      request.max_depth = settings.pipeline.exploration.max_depth;
      request.frame_count = node.frame_count();
      request.caption_embedding = node.embedding;
      request.question_embedding = question_embedding;

      NodeSample sample;
      sample.tree = t;
      sample.node = node.id;
      sample.features = policy_features(request);
      sample.action = node.output->action;
      sample.old_logprob = node.output->action_logprob;
      sample.reward = node_reward(*node.output, outcomes[t].r_tree, settings.rewards);
      group.samples.push_back(sample);
    }
    group.trees.push_back(std::move(outcomes[t].tree));
  }
  check_samples(group);
  const auto advantages = group_advantages(group.rewards(), settings.trainer.std_floor);
  for (std::size_t i = 0; i < group.samples.size(); ++i) {
    group.samples[i].advantage = advantages[i];
  }
  return group;
}

double objective(std::span<const RolloutGroup> groups, const SurrogatePolicy& policy,
                 const SurrogatePolicy& reference, const TrainerConfig& cfg) {
  const std::size_t m = total_samples(groups);
  double sum = 0.0;
  for (const auto& group : groups) {
    for (const auto& s : group.samples) {
      const double logp = policy.log_prob(s.features, s.action);
      const double logp_ref = reference.log_prob(s.features, s.action);
      sum += clipped_term(std::exp(logp - old_logprob_of(s)), s.advantage, cfg.clip_eps) -
             cfg.kl_beta * kl_penalty(logp, logp_ref);
    }
  }
  return sum / static_cast<double>(m);
}

double objective(const RolloutGroup& group, const SurrogatePolicy& policy,
                 const SurrogatePolicy& reference, const TrainerConfig& cfg) {
  return objective(std::span<const RolloutGroup>(&group, 1), policy, reference, cfg);
}

ObjectiveValue objective_with_gradient(std::span<const RolloutGroup> groups,
                                       const SurrogatePolicy& policy,
                                       const SurrogatePolicy& reference,
                                       const TrainerConfig& cfg) {
  const double inv_m = 1.0 / static_cast<double>(total_samples(groups));
  ObjectiveValue out;
  for (const auto& group : groups) {
    for (const auto& s : group.samples) {
      const auto k = static_cast<std::size_t>(s.action);
      const ActionProbs logp_all = policy.log_probabilities(s.features);
      const double logp = logp_all[k];
      const double logp_ref = reference.log_prob(s.features, s.action);
      const double ratio = std::exp(logp - old_logprob_of(s));
      const double unclipped = ratio * s.advantage;
      const double clipped =
          std::clamp(ratio, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps) * s.advantage;
      const double u = logp_ref - logp;
      out.value += std::min(unclipped, clipped) - cfg.kl_beta * kl_penalty(logp, logp_ref);

      // dJ/dlogp, then through the softmax: dlogp_a/dz_j = [j == a] - p_j.
      const double g = (unclipped <= clipped ? unclipped : 0.0) + cfg.kl_beta * std::expm1(u);
      for (std::size_t j = 0; j < kNumActions; ++j) {
        const double dz = g * ((j == k ? 1.0 : 0.0) - std::exp(logp_all[j]));
        for (std::size_t f = 0; f < kNumFeatures; ++f) {
          out.gradient[f][j] += inv_m * dz * s.features[f];
        }
      }
    }
  }
  out.value *= inv_m;
  return out;
}

ObjectiveValue objective_with_gradient(const RolloutGroup& group, const SurrogatePolicy& policy,
                                       const SurrogatePolicy& reference,
                                       const TrainerConfig& cfg) {
  return objective_with_gradient(std::span<const RolloutGroup>(&group, 1), policy, reference,
                                 cfg);
}

TrainResult train(const std::vector<Episode>& episodes, const Clients& clients,
                  const RolloutSettings& settings, const SurrogatePolicy& initial,
                  const TrainLogSink& sink) {
  require(!episodes.empty(), "training needs at least one episode");
  settings.trainer.validate();
  settings.rewards.validate();
  const TrainerConfig& cfg = settings.trainer;
  const double lambda = growth_rate(settings.rewards);

  TrainResult result{initial, initial, {}};
  for (std::size_t iter = 0; iter < cfg.iterations; ++iter) {
    auto old_policy = std::make_shared<const SurrogatePolicy>(result.policy);
    Clients sampling = clients;
    sampling.policy = old_policy;
    std::vector<RolloutGroup> groups;
    for (std::size_t b = 0; b < cfg.batch_size; ++b) {
      const Episode& episode = episodes[(iter * cfg.batch_size + b) % episodes.size()];
      groups.push_back(rollout(episode, sampling, settings, sub_seed(cfg.seed, iter, b)));
    }

    double value = 0.0;
    for (std::size_t epoch = 0; epoch < cfg.inner_epochs; ++epoch) {
      ObjectiveValue step = objective_with_gradient(groups, result.policy, result.reference, cfg);
      double norm_sq = 0.0;
      for (const auto& row : step.gradient) {
        for (double v : row) norm_sq += v * v;
      }
      if (!std::isfinite(norm_sq) || !std::isfinite(step.value)) {
        fail(ErrorCode::kNonFiniteGradient,
             "iteration " + std::to_string(iter) + ", epoch " + std::to_string(epoch) +
                 ": J = " + std::to_string(step.value) +
                 ", |grad|^2 = " + std::to_string(norm_sq));
      }
      const double norm = std::sqrt(norm_sq);
      double scale = cfg.learning_rate;
      if (cfg.max_grad_norm > 0 && norm > cfg.max_grad_norm) scale *= cfg.max_grad_norm / norm;
      // Descent on -J is ascent on J.
      for (std::size_t f = 0; f < kNumFeatures; ++f) {
        for (std::size_t k = 0; k < kNumActions; ++k) {
          result.policy.weights()[f][k] += scale * step.gradient[f][k];
        }
      }
      value = step.value;
    }

    TrainLogEntry entry;
    entry.iter = iter;
    entry.objective = value;
    std::array<std::size_t, kNumActions> counts{};
    double reward_sum = 0.0;
    std::size_t trees = 0;
    for (const auto& group : groups) {
      trees += group.trees.size();
      for (const auto& s : group.samples) {
        reward_sum += s.reward.r_total;
        if (s.action != Action::kInvalid) ++counts[static_cast<std::size_t>(s.action)];
      }
    }
    const double m = static_cast<double>(total_samples(groups));
    entry.mean_reward = reward_sum / m;
    entry.p_accept = static_cast<double>(counts[0]) / m;
    entry.p_continue = static_cast<double>(counts[1]) / m;
    entry.p_delete = static_cast<double>(counts[2]) / m;
    entry.mean_nodes = m / static_cast<double>(trees);
    entry.lambda_auxin = lambda;
    if (sink) sink(entry);
    result.log.push_back(entry);
  }
  return result;
}

}  // namespace videominer
