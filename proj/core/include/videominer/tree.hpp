// SPDX-License-Identifier: Apache-2.0

#ifndef VIDEOMINER_TREE_HPP_
#define VIDEOMINER_TREE_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "videominer/clients.hpp"
#include "videominer/clustering.hpp"
#include "videominer/error.hpp"
#include "videominer/event.hpp"
#include "videominer/segmentation.hpp"

namespace videominer {

enum class NodeState { kPending, kAccept, kContinue, kDelete };

std::string_view to_string(NodeState state);
std::optional<NodeState> parse_node_state(std::string_view text);

// What happens to a `continue` that cannot be expanded. Only one policy
// exists today; the enum keeps the config surface explicit.
enum class LeafContinuePolicy { kCoerceAccept };

struct NodeFlags {
  bool budget_truncated = false;
  bool depth_coerced = false;
  bool degenerate_coerced = false;
  bool invalid_action = false;

  bool operator==(const NodeFlags&) const = default;
};

struct TreeNode {
  std::size_t id = 0;
  std::optional<std::size_t> parent;
  int depth = 0;
  std::vector<Event> events;  // sorted by start, possibly non-adjacent
  std::string caption;
  std::optional<CaptionEmbedding> embedding;
  NodeState state = NodeState::kPending;
  std::vector<std::size_t> children;
  std::optional<NodeOutput> output;
  NodeFlags flags;

  std::size_t frame_count() const;
  // 0-based positions of every frame in the working sequence, ascending.
  std::vector<std::size_t> positions() const;
};

struct VideoTree {
  std::string question;
  std::string source_id;
  std::vector<std::int64_t> frame_indices;  // original index of each position
  std::vector<TreeNode> nodes;              // id == position in this table
  std::size_t root = 0;
  std::vector<std::int64_t> keyframes;  // original indices, ascending
  std::optional<std::string> answer;
  bool budget_truncated = false;
  std::optional<std::string> error;

  std::size_t node_count() const { return nodes.size(); }
  // Nodes that received a policy decision.
  std::size_t decided_count() const;
  // Deepest node that received a policy decision (0 when none did).
  int max_decided_depth() const;
};

struct ExplorationConfig {
  int max_depth = 4;
  std::size_t max_total_nodes = 256;
  std::size_t k_scenes_root = 0;  // 0: ceil(N / target_event_len)
  std::size_t target_event_len = 8;
  std::size_t max_keyframes = 32;
  LeafContinuePolicy leaf_continue_policy = LeafContinuePolicy::kCoerceAccept;
  std::size_t caption_char_budget = 2000;
  std::size_t caption_concurrency = 4;

  void validate() const;
  bool operator==(const ExplorationConfig&) const = default;
};

struct PipelineConfig {
  SegmentationConfig segmentation;
  ClusterConfig clustering;
  ExplorationConfig exploration;

  bool operator==(const PipelineConfig&) const = default;
};

// Raised when exploration aborts; carries the tree built so far.
class PartialTreeError : public Error {
 public:
  PartialTreeError(ErrorCode code, const std::string& message, VideoTree tree)
      : Error(code, message), tree_(std::move(tree)) {}
  const VideoTree& tree() const { return tree_; }

 private:
  VideoTree tree_;
};

// Joins event captions in temporal order, truncated to `budget` bytes on a
// UTF-8 boundary.
std::string node_caption(const std::vector<Event>& events, std::size_t budget);

// Segments, captions and clusters the node's frames into pending children at
// depth + 1 (ids and parent are set by the caller). Errors: precondition
// (state != continue or fewer than 2 frames), ExpansionDegenerate,
// ServiceError.
std::vector<TreeNode> expand_node(const TreeNode& node, const FrameSequence& seq,
                                  const std::string& question, const Clients& clients,
                                  const PipelineConfig& cfg);

// Breadth-first exploration driven by clients.policy; `seed` feeds the
// policy's sampler. Throws PartialTreeError on service failures.
VideoTree build_tree(const FrameSequence& seq, const std::string& question,
                     const Clients& clients, const PipelineConfig& cfg, std::uint64_t seed);

// Union of accepted frames, budget-sampled to max_keyframes. Returns
// 0-based positions. Errors: NoKeyframes.
std::vector<std::size_t> collect_keyframes(const VideoTree& tree, const ExplorationConfig& cfg);

// collect_keyframes, then stores the original indices on the tree.
void assign_keyframes(VideoTree& tree, const ExplorationConfig& cfg);

// Captions of accepted nodes that contribute keyframes, in temporal order.
std::vector<std::string> keyframe_captions(const VideoTree& tree);

// Answers from keyframe captions and stores the reply on the tree.
// Errors: NoKeyframes, ServiceError, EmptyResponse.
std::string final_answer(VideoTree& tree, const Answerer& answerer);

nlohmann::json tree_to_json(const VideoTree& tree);
VideoTree tree_from_json(const nlohmann::json& doc);

}  // namespace videominer

#endif  // VIDEOMINER_TREE_HPP_
