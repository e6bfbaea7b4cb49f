// SPDX-License-Identifier: Apache-2.0

#ifndef VIDEOMINER_REWARDS_HPP_
#define VIDEOMINER_REWARDS_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "videominer/node_output.hpp"

namespace videominer {

struct RewardConfig {
  double delta_max = 1.0;
  double delta_corr = 0.5;
  double rho = 1.0;
  double sigma = 80.0;
  double l_target = 320.0;
  double delta_d = 1.0;
  double delta_a = 0.8;
  double delta_c = 0.3;

  // Hard checks: finite, delta_max >= delta_corr >= 0, sigma > 0, rho > 0,
  // delta_c > 0, delta_d and delta_a >= 0. Errors: ValidationError.
  void validate() const;
  // Set when delete >= accept >= continue does not hold. Growth-rate sweeps
  // below 1 need that ordering broken, so it is advisory only.
  std::optional<std::string> ordering_warning() const;
  bool operator==(const RewardConfig&) const = default;
};

struct RewardBreakdown {
  double r_format = 0.0;
  double r_length = 0.0;
  double r_action = 0.0;
  int r_tree = 0;
  double r_total = 0.0;

  bool operator==(const RewardBreakdown&) const = default;
};

double format_reward(FormatClass format, const RewardConfig& cfg);
double length_reward(double tokens, const RewardConfig& cfg);
double action_reward(Action action, const RewardConfig& cfg);

// (delta_d + delta_a) / (2 delta_c). Errors: ZeroContinueReward.
double growth_rate(const RewardConfig& cfg);

// First alphabetic character after stripping punctuation, uppercased.
// Empty when the text has no letters.
std::optional<char> option_letter(std::string_view text);
// 1 iff both texts name the same option letter. Errors: precondition on
// an empty gold answer.
int tree_reward(std::string_view predicted, std::string_view gold);

RewardBreakdown total_reward(double r_format, double r_length, double r_action, int r_tree);
RewardBreakdown node_reward(const NodeOutput& output, int r_tree, const RewardConfig& cfg);

inline constexpr double kDefaultStdFloor = 1e-8;

// Z-scores with the population std; all zeros when std < std_floor.
// Errors: precondition on an empty input.
std::vector<double> group_advantages(std::span<const double> rewards,
                                     double std_floor = kDefaultStdFloor);

// min(ratio A, clip(ratio, 1 - eps, 1 + eps) A).
double clipped_term(double ratio, double advantage, double clip_eps);

// k3 estimator r - ln r - 1 with r = exp(logp_ref - logp_current).
double kl_penalty(double logp_current, double logp_ref);

}  // namespace videominer

#endif  // VIDEOMINER_REWARDS_HPP_
