// SPDX-License-Identifier: Apache-2.0

#include "videominer/rewards.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "videominer/error.hpp"

namespace videominer {

void RewardConfig::validate() const {
  auto invalid = [](const char* field, const char* rule) {
    fail(ErrorCode::kValidationError, std::string("rewards.") + field + " " + rule);
  };
  const std::pair<const char*, double> all[] = {
      {"delta_max", delta_max}, {"delta_corr", delta_corr}, {"rho", rho},
      {"sigma", sigma},         {"l_target", l_target},     {"delta_d", delta_d},
      {"delta_a", delta_a},     {"delta_c", delta_c}};
  for (const auto& [name, value] : all) {
    if (!std::isfinite(value)) invalid(name, "must be finite");
  }
  if (delta_corr < 0) invalid("delta_corr", "must be >= 0");
  if (delta_max < delta_corr) invalid("delta_max", "must be >= delta_corr");
  if (sigma <= 0) invalid("sigma", "must be > 0");
  if (rho <= 0) invalid("rho", "must be > 0");
  if (delta_d < 0) invalid("delta_d", "must be >= 0");
  if (delta_a < 0) invalid("delta_a", "must be >= 0");
  if (delta_c <= 0) invalid("delta_c", "must be > 0");
}

std::optional<std::string> RewardConfig::ordering_warning() const {
  if (delta_d >= delta_a && delta_a >= delta_c) return std::nullopt;
  return "rewards: delta_d >= delta_a >= delta_c does not hold (growth rate " +
         std::to_string(delta_c > 0 ? (delta_d + delta_a) / (2 * delta_c) : 0.0) + ")";
}

double format_reward(FormatClass format, const RewardConfig& cfg) {
  switch (format) {
    case FormatClass::kMax: return cfg.delta_max;
    case FormatClass::kCorr: return cfg.delta_corr;
    case FormatClass::kNone: return 0.0;
  }
  return 0.0;
}

double length_reward(double tokens, const RewardConfig& cfg) {
  const double diff = tokens - cfg.l_target;
  return cfg.rho * std::exp(-(diff * diff) / (2.0 * cfg.sigma * cfg.sigma));
}

double action_reward(Action action, const RewardConfig& cfg) {
  switch (action) {
    case Action::kDelete: return cfg.delta_d;
    case Action::kAccept: return cfg.delta_a;
    case Action::kContinue: return cfg.delta_c;
    case Action::kInvalid: return 0.0;
  }
  return 0.0;
}

double growth_rate(const RewardConfig& cfg) {
  if (!(cfg.delta_c > 0)) {
    fail(ErrorCode::kZeroContinueReward, "growth rate needs delta_c > 0");
  }
  return (cfg.delta_d + cfg.delta_a) / (2.0 * cfg.delta_c);
}

std::optional<char> option_letter(std::string_view text) {
  for (char c : text) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      return static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
  }
  return std::nullopt;
}

int tree_reward(std::string_view predicted, std::string_view gold) {
  require(!gold.empty(), "gold answer must be nonempty");
  const auto want = option_letter(gold);
  const auto got = option_letter(predicted);
  return want && got && *want == *got ? 1 : 0;
}

RewardBreakdown total_reward(double r_format, double r_length, double r_action, int r_tree) {
  RewardBreakdown out;
  out.r_format = r_format;
  out.r_length = r_length;
  out.r_action = r_action;
  out.r_tree = r_tree;
  out.r_total = r_format + (r_length + r_action) * r_tree;
  return out;
}

RewardBreakdown node_reward(const NodeOutput& output, int r_tree, const RewardConfig& cfg) {
  return total_reward(format_reward(output.format, cfg),
                      length_reward(static_cast<double>(output.length), cfg),
                      action_reward(output.action, cfg), r_tree);
}

std::vector<double> group_advantages(std::span<const double> rewards, double std_floor) {
  require(!rewards.empty(), "advantages need at least one reward");
  const double n = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  const double sd = std::sqrt(var / n);
  std::vector<double> out(rewards.size(), 0.0);
  if (!(sd >= std_floor)) return out;
  for (std::size_t i = 0; i < rewards.size(); ++i) out[i] = (rewards[i] - mean) / sd;
  return out;
}

double clipped_term(double ratio, double advantage, double clip_eps) {
  const double clipped = std::clamp(ratio, 1.0 - clip_eps, 1.0 + clip_eps);
  return std::min(ratio * advantage, clipped * advantage);
}

double kl_penalty(double logp_current, double logp_ref) {
  const double u = logp_ref - logp_current;
  // expm1(u) - u equals e^u - u - 1 without cancellation near u = 0.
  return std::expm1(u) - u;
}

}  // namespace videominer
