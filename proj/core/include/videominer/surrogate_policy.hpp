// SPDX-License-Identifier: Apache-2.0

#ifndef VIDEOMINER_SURROGATE_POLICY_HPP_
#define VIDEOMINER_SURROGATE_POLICY_HPP_

#include <array>
#include <cstdint>

#include <nlohmann/json.hpp>

#include "videominer/clients.hpp"
#include "videominer/node_output.hpp"

namespace videominer {

inline constexpr std::size_t kNumFeatures = 4;

// [cos(caption, question), depth / max_depth, ln(1 + frames), 1]
using Features = std::array<double, kNumFeatures>;
// weights[f][k]: feature f, action k (accept, continue, delete).
using Weights = std::array<std::array<double, kNumActions>, kNumFeatures>;
using ActionProbs = std::array<double, kNumActions>;

// Errors: MissingEmbedding when either embedding is absent, precondition
// when the node has no frames or max_depth < 1.
Features policy_features(const PolicyDecisionRequest& request);

double weight_distance(const Weights& a, const Weights& b);

// Linear softmax policy over node features.
class SurrogatePolicy final : public Policy {
 public:
  SurrogatePolicy() = default;
  explicit SurrogatePolicy(const Weights& weights);

  // Weights drawn from N(0, scale^2).
  static SurrogatePolicy random_init(std::uint64_t seed, double scale = 0.01);

  const Weights& weights() const { return weights_; }
  Weights& weights() { return weights_; }

  ActionProbs logits(const Features& x) const;
  ActionProbs log_probabilities(const Features& x) const;
  ActionProbs probabilities(const Features& x) const;
  double log_prob(const Features& x, Action action) const;

  // Draws u ~ U[0,1) and picks the first action whose cumulative
  // probability exceeds u; the log-prob is stored on the output.
  NodeOutput decide(const PolicyDecisionRequest& request, Rng& rng) const override;

  nlohmann::json to_json() const;
  static SurrogatePolicy from_json(const nlohmann::json& doc);

 private:
  Weights weights_{};
};

}  // namespace videominer

#endif  // VIDEOMINER_SURROGATE_POLICY_HPP_
