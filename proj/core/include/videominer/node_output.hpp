// SPDX-License-Identifier: Apache-2.0

#ifndef VIDEOMINER_NODE_OUTPUT_HPP_
#define VIDEOMINER_NODE_OUTPUT_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace videominer {

// Order matters: it is the column order of the surrogate policy logits.
enum class Action { kAccept = 0, kContinue = 1, kDelete = 2, kInvalid = 3 };
inline constexpr std::size_t kNumActions = 3;

enum class FormatClass { kMax, kCorr, kNone };

std::string_view to_string(Action action);
std::string_view to_string(FormatClass format);
std::optional<Action> parse_action(std::string_view text);
std::optional<FormatClass> parse_format(std::string_view text);

// Parsed policy emission for one node.
struct NodeOutput {
  std::string raw_text;
  FormatClass format = FormatClass::kNone;
  std::size_t length = 0;  // whitespace-delimited tokens of raw_text
  Action action = Action::kInvalid;
  std::optional<double> action_logprob;
  std::string reasoning;  // <think> body when format == kMax

  bool operator==(const NodeOutput&) const = default;
};

// Total: never throws. kMax requires the whole text (modulo surrounding
// whitespace) to be <think>...</think><answer>ACTION</answer>; kCorr needs a
// valid <answer> tag anywhere; otherwise kNone with Action::kInvalid.
NodeOutput parse_node_output(std::string_view text);

// Canonical kMax rendering used by surrogate policies and round-trip tests.
std::string format_node_text(std::string_view reasoning, Action action);

std::size_t count_whitespace_tokens(std::string_view text);

}  // namespace videominer

#endif  // VIDEOMINER_NODE_OUTPUT_HPP_
