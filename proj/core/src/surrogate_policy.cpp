// SPDX-License-Identifier: Apache-2.0

#include "videominer/surrogate_policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "videominer/error.hpp"

namespace videominer {

Features policy_features(const PolicyDecisionRequest& request) {
  if (!request.caption_embedding || !request.question_embedding) {
    fail(ErrorCode::kMissingEmbedding, "policy features need caption and question embeddings");
  }
  require(request.frame_count > 0, "policy features need a node with frames");
  require(request.max_depth >= 1, "max_depth must be >= 1");
  return {request.caption_embedding->dot(*request.question_embedding),
          static_cast<double>(request.depth) / static_cast<double>(request.max_depth),
          std::log1p(static_cast<double>(request.frame_count)), 1.0};
}

double weight_distance(const Weights& a, const Weights& b) {
  double sum = 0.0;
  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    for (std::size_t k = 0; k < kNumActions; ++k) {
      const double d = a[f][k] - b[f][k];
      sum += d * d;
    }
  }
  return std::sqrt(sum);
}

SurrogatePolicy::SurrogatePolicy(const Weights& weights) : weights_(weights) {
  for (const auto& row : weights_) {
    for (double w : row) {
      if (!std::isfinite(w)) fail(ErrorCode::kPrecondition, "policy weights must be finite");
    }
  }
}

SurrogatePolicy SurrogatePolicy::random_init(std::uint64_t seed, double scale) {
  Rng rng(seed);
  Weights w{};
  for (auto& row : w) {
    for (double& v : row) v = rng.normal(0.0, scale);
  }
  return SurrogatePolicy(w);
}

ActionProbs SurrogatePolicy::logits(const Features& x) const {
  ActionProbs z{};
  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    for (std::size_t k = 0; k < kNumActions; ++k) z[k] += x[f] * weights_[f][k];
  }
  return z;
}

ActionProbs SurrogatePolicy::log_probabilities(const Features& x) const {
  ActionProbs z = logits(x);
  const double top = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double v : z) sum += std::exp(v - top);
  const double lse = top + std::log(sum);
  for (double& v : z) v -= lse;
  return z;
}

ActionProbs SurrogatePolicy::probabilities(const Features& x) const {
  ActionProbs p = log_probabilities(x);
  for (double& v : p) v = std::exp(v);
  return p;
}

double SurrogatePolicy::log_prob(const Features& x, Action action) const {
  require(action != Action::kInvalid, "surrogate policy has no invalid action");
  return log_probabilities(x)[static_cast<std::size_t>(action)];
}

NodeOutput SurrogatePolicy::decide(const PolicyDecisionRequest& request, Rng& rng) const {
  const Features x = policy_features(request);
  const ActionProbs logp = log_probabilities(x);
  const double u = rng.uniform();
  std::size_t pick = kNumActions - 1;
  double cumulative = 0.0;
  for (std::size_t k = 0; k < kNumActions; ++k) {
    cumulative += std::exp(logp[k]);
    if (u < cumulative) {
      pick = k;
      break;
    }
  }
  const auto action = static_cast<Action>(pick);

  char rationale[160];
  std::snprintf(rationale, sizeof rationale, "relevance %.3f at depth %d of %d over %zu frames",
                x[0], request.depth, request.max_depth, request.frame_count);
  NodeOutput out = parse_node_output(format_node_text(rationale, action));
  out.action_logprob = logp[pick];
  return out;
}

nlohmann::json SurrogatePolicy::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : weights_) rows.push_back(row);
  return {{"features", {"cosine", "depth_ratio", "log_frames", "bias"}},
          {"actions", {"accept", "continue", "delete"}},
          {"weights", std::move(rows)}};
}

SurrogatePolicy SurrogatePolicy::from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("weights")) {
    fail(ErrorCode::kParseError, "policy document needs a 'weights' matrix");
  }
  const auto& rows = doc.at("weights");
  if (!rows.is_array() || rows.size() != kNumFeatures) {
    fail(ErrorCode::kParseError, "policy weights must have " + std::to_string(kNumFeatures) +
                                     " rows");
  }
  Weights w{};
  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    if (!rows[f].is_array() || rows[f].size() != kNumActions) {
      fail(ErrorCode::kParseError, "policy weight rows must have 3 columns");
    }
    for (std::size_t k = 0; k < kNumActions; ++k) {
      if (!rows[f][k].is_number()) fail(ErrorCode::kParseError, "policy weights must be numbers");
      w[f][k] = rows[f][k].get<double>();
    }
  }
  return SurrogatePolicy(w);
}

}  // namespace videominer
