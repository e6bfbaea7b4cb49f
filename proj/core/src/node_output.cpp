// SPDX-License-Identifier: Apache-2.0

#include "videominer/node_output.hpp"

#include <algorithm>
#include <cctype>

namespace videominer {
namespace {

constexpr std::string_view kThinkOpen = "<think>";
constexpr std::string_view kThinkClose = "</think>";
constexpr std::string_view kAnswerOpen = "<answer>";
constexpr std::string_view kAnswerClose = "</answer>";

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::optional<Action> answer_action(std::string_view body) {
  std::string lowered(trim(body));
  std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  auto action = parse_action(lowered);
  if (action && *action == Action::kInvalid) return std::nullopt;
  return action;
}

// First <answer>...</answer> whose body is a valid action.
std::optional<Action> first_valid_answer(std::string_view text) {
  std::size_t from = 0;
  while (true) {
    const std::size_t open = text.find(kAnswerOpen, from);
    if (open == std::string_view::npos) return std::nullopt;
    const std::size_t body = open + kAnswerOpen.size();
    const std::size_t close = text.find(kAnswerClose, body);
    if (close == std::string_view::npos) return std::nullopt;
    if (auto action = answer_action(text.substr(body, close - body))) return action;
    from = body;
  }
}

struct MaxMatch {
  Action action;
  std::string reasoning;
};

std::optional<MaxMatch> match_max(std::string_view text) {
  std::string_view s = trim(text);
  if (!s.starts_with(kThinkOpen)) return std::nullopt;
  s.remove_prefix(kThinkOpen.size());
  const std::size_t close = s.find(kThinkClose);
  if (close == std::string_view::npos) return std::nullopt;
  const std::string_view reasoning = s.substr(0, close);
  if (reasoning.find(kThinkOpen) != std::string_view::npos ||
      reasoning.find(kAnswerOpen) != std::string_view::npos) {
    return std::nullopt;
  }
  s = trim(s.substr(close + kThinkClose.size()));
  if (!s.starts_with(kAnswerOpen) || !s.ends_with(kAnswerClose)) return std::nullopt;
  const std::string_view body =
      s.substr(kAnswerOpen.size(), s.size() - kAnswerOpen.size() - kAnswerClose.size());
  if (body.find('<') != std::string_view::npos) return std::nullopt;
  auto action = answer_action(body);
  if (!action) return std::nullopt;
  return MaxMatch{*action, std::string(reasoning)};
}

}  // namespace

std::string_view to_string(Action action) {
  switch (action) {
    case Action::kAccept: return "accept";
    case Action::kContinue: return "continue";
    case Action::kDelete: return "delete";
    case Action::kInvalid: return "invalid";
  }
  return "invalid";
}

std::string_view to_string(FormatClass format) {
  switch (format) {
    case FormatClass::kMax: return "max";
    case FormatClass::kCorr: return "corr";
    case FormatClass::kNone: return "none";
  }
  return "none";
}

std::optional<Action> parse_action(std::string_view text) {
  if (text == "accept") return Action::kAccept;
  if (text == "continue") return Action::kContinue;
  if (text == "delete") return Action::kDelete;
  if (text == "invalid") return Action::kInvalid;
  return std::nullopt;
}

std::optional<FormatClass> parse_format(std::string_view text) {
  if (text == "max") return FormatClass::kMax;
  if (text == "corr") return FormatClass::kCorr;
  if (text == "none") return FormatClass::kNone;
  return std::nullopt;
}

std::size_t count_whitespace_tokens(std::string_view text) {
  std::size_t count = 0;
  bool in_token = false;
  for (char c : text) {
    if (is_space(c)) {
      in_token = false;
    } else if (!in_token) {
      in_token = true;
      ++count;
    }
  }
  return count;
}

NodeOutput parse_node_output(std::string_view text) {
  NodeOutput out;
  out.raw_text = std::string(text);
  out.length = count_whitespace_tokens(text);
  if (auto max = match_max(text)) {
    out.format = FormatClass::kMax;
    out.action = max->action;
    out.reasoning = std::move(max->reasoning);
  } else if (auto action = first_valid_answer(text)) {
    out.format = FormatClass::kCorr;
    out.action = *action;
  }
  return out;
}

std::string format_node_text(std::string_view reasoning, Action action) {
  std::string out;
  out.reserve(reasoning.size() + 48);
  out.append(kThinkOpen).append(reasoning).append(kThinkClose);
  out.append(kAnswerOpen).append(to_string(action)).append(kAnswerClose);
  return out;
}

}  // namespace videominer
