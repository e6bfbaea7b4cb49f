// SPDX-License-Identifier: Apache-2.0

#include "videominer/tree.hpp"

#include <algorithm>
#include <deque>
#include <future>
#include <set>
#include <unordered_map>

namespace videominer {
namespace {

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

// Captions every event, at most `concurrency` requests in flight.
void caption_events(std::vector<Event>& events, const FrameSequence& seq,
                    const std::string& question, const Captioner& captioner,
                    std::size_t concurrency) {
  concurrency = std::max<std::size_t>(concurrency, 1);
  for (std::size_t begin = 0; begin < events.size(); begin += concurrency) {
    const std::size_t end = std::min(events.size(), begin + concurrency);
    if (end - begin == 1) {
      events[begin].caption = caption_event(events[begin], seq, question, captioner);
      continue;
    }
    std::vector<std::future<std::string>> pending;
    for (std::size_t i = begin; i < end; ++i) {
      pending.push_back(std::async(std::launch::async, [&, i] {
        return caption_event(events[i], seq, question, captioner);
      }));
    }
    for (std::size_t i = begin; i < end; ++i) events[i].caption = pending[i - begin].get();
  }
}

// Turns event groups into pending child nodes with captions and embeddings.
std::vector<TreeNode> make_children(std::vector<EventGroup> groups, int depth,
                                    const Clients& clients, const ExplorationConfig& cfg) {
  std::vector<TreeNode> children;
  std::vector<std::string> captions;
  for (auto& group : groups) {
    TreeNode child;
    child.depth = depth;
    child.events = std::move(group.events);
    child.caption = node_caption(child.events, cfg.caption_char_budget);
    captions.push_back(child.caption);
    children.push_back(std::move(child));
  }
  if (!children.empty() && clients.embedder) {
    auto embeddings = embed_captions(captions, *clients.embedder);
    for (std::size_t i = 0; i < children.size(); ++i) children[i].embedding = std::move(embeddings[i]);
  }
  return children;
}

std::vector<TreeNode> expand_with_k(const TreeNode& node, const FrameSequence& seq,
                                    const std::string& question, const Clients& clients,
                                    const PipelineConfig& cfg, std::size_t k) {
  const std::vector<std::size_t> positions = node.positions();
  const std::size_t n = positions.size();
  require(n >= 2, "expansion needs a node with at least 2 frames");
  if (k <= 1) {
    fail(ErrorCode::kExpansionDegenerate, "node " + std::to_string(node.id) +
                                              " is a single event at the target length");
  }

  std::vector<GrayHistogram> histograms(n);
  for (std::size_t i = 0; i < n; ++i) histograms[i] = gray_histogram(seq[positions[i]]);
  const ChangePointSeries series = change_points(histograms, cfg.segmentation.bc_clamp);
  if (std::all_of(series.distances.begin(), series.distances.end(),
                  [](double d) { return d == 0.0; })) {
    fail(ErrorCode::kExpansionDegenerate,
         "node " + std::to_string(node.id) + " has no visual change");
  }
  const Partition partition = partition_by_distances(series.distances, n, k,
                                                     cfg.segmentation.min_event_frames);

  // Map local intervals back to the sequence, splitting across gaps between
  // the node's member events.
  std::vector<Event> events;
  for (const auto& [first, last] : partition.intervals) {
    std::size_t run_start = positions[first - 1];
    for (std::size_t i = first; i < last; ++i) {
      if (positions[i] != positions[i - 1] + 1) {
        events.push_back(Event{run_start + 1, positions[i - 1] + 1, {}, {}});
        run_start = positions[i];
      }
    }
    events.push_back(Event{run_start + 1, positions[last - 1] + 1, {}, {}});
  }

  if (clients.captioner == nullptr) fail(ErrorCode::kPrecondition, "no captioner configured");
  if (clients.embedder == nullptr) fail(ErrorCode::kPrecondition, "no embedder configured");
  caption_events(events, seq, question, *clients.captioner, cfg.exploration.caption_concurrency);

  std::vector<std::string> captions;
  for (const auto& e : events) captions.push_back(e.caption);
  auto embeddings = embed_captions(captions, *clients.embedder);
  const ClusterAssignment assignment = dbscan(embeddings, cfg.clustering);
  for (std::size_t i = 0; i < events.size(); ++i) events[i].embedding = std::move(embeddings[i]);

  auto groups = group_events(events, assignment);
  if (groups.empty()) {
    fail(ErrorCode::kExpansionDegenerate,
         "every event of node " + std::to_string(node.id) + " was dropped as noise");
  }
  return make_children(std::move(groups), node.depth + 1, clients, cfg.exploration);
}

// Ensures the root's children fit in the node budget by folding overflow
// groups into the last permitted child.
std::vector<TreeNode> fit_root_children(std::vector<TreeNode> children, std::size_t allowed,
                                        const Clients& clients, const ExplorationConfig& cfg) {
  if (children.size() <= allowed) return children;
  std::vector<Event> merged;
  for (std::size_t i = allowed - 1; i < children.size(); ++i) {
    merged.insert(merged.end(), children[i].events.begin(), children[i].events.end());
  }
  std::sort(merged.begin(), merged.end(),
            [](const Event& a, const Event& b) { return a.start < b.start; });
  children.resize(allowed - 1);
  std::vector<EventGroup> last{EventGroup{std::move(merged)}};
  auto tail = make_children(std::move(last), 1, clients, cfg);
  children.push_back(std::move(tail.front()));
  return children;
}

}  // namespace

std::string_view to_string(NodeState state) {
  switch (state) {
    case NodeState::kPending: return "pending";
    case NodeState::kAccept: return "accept";
    case NodeState::kContinue: return "continue";
    case NodeState::kDelete: return "delete";
  }
  return "pending";
}

std::optional<NodeState> parse_node_state(std::string_view text) {
  if (text == "pending") return NodeState::kPending;
  if (text == "accept") return NodeState::kAccept;
  if (text == "continue") return NodeState::kContinue;
  if (text == "delete") return NodeState::kDelete;
  return std::nullopt;
}

std::size_t TreeNode::frame_count() const {
  std::size_t count = 0;
  for (const auto& e : events) count += e.size();
  return count;
}

std::vector<std::size_t> TreeNode::positions() const {
  std::vector<std::size_t> out;
  out.reserve(frame_count());
  for (const auto& e : events) {
    for (std::size_t p = e.start; p <= e.end; ++p) out.push_back(p - 1);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::size_t VideoTree::decided_count() const {
  return static_cast<std::size_t>(std::count_if(
      nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.output.has_value(); }));
}

int VideoTree::max_decided_depth() const {
  int depth = 0;
  for (const auto& n : nodes) {
    if (n.output) depth = std::max(depth, n.depth);
  }
  return depth;
}

void ExplorationConfig::validate() const {
  auto invalid = [](const std::string& what) {
    fail(ErrorCode::kValidationError, "exploration." + what);
  };
  if (max_depth < 1) invalid("max_depth must be >= 1");
  if (max_total_nodes < 2) invalid("max_total_nodes must be >= 2");
  if (target_event_len < 1) invalid("target_event_len must be >= 1");
  if (max_keyframes < 1) invalid("max_keyframes must be >= 1");
  if (caption_char_budget < 1) invalid("caption_char_budget must be >= 1");
  if (caption_concurrency < 1) invalid("caption_concurrency must be >= 1");
}

std::string node_caption(const std::vector<Event>& events, std::size_t budget) {
  std::string out;
  for (const auto& e : events) {
    if (e.caption.empty()) continue;
    if (!out.empty()) out += " | ";
    out += e.caption;
  }
  if (out.size() > budget) {
    std::size_t cut = budget;
    while (cut > 0 && (static_cast<unsigned char>(out[cut]) & 0xC0) == 0x80) --cut;
    out.resize(cut);
  }
  return out;
}

std::vector<TreeNode> expand_node(const TreeNode& node, const FrameSequence& seq,
                                  const std::string& question, const Clients& clients,
                                  const PipelineConfig& cfg) {
  require(node.state == NodeState::kContinue, "only continue nodes can be expanded");
  const std::size_t n = node.frame_count();
  require(n >= 2, "expansion needs a node with at least 2 frames");
  const std::size_t k = ceil_div(n, cfg.exploration.target_event_len);
  return expand_with_k(node, seq, question, clients, cfg, k);
}

VideoTree build_tree(const FrameSequence& seq, const std::string& question,
                     const Clients& clients, const PipelineConfig& cfg, std::uint64_t seed) {
  cfg.segmentation.validate();
  cfg.clustering.validate();
  cfg.exploration.validate();
  if (seq.empty()) fail(ErrorCode::kEmptySequence, "cannot build a tree over no frames");
  require(clients.captioner && clients.embedder && clients.policy,
          "build_tree needs captioner, embedder and policy clients");
  const ExplorationConfig& ex = cfg.exploration;

  VideoTree tree;
  tree.question = question;
  tree.source_id = seq.source_id;
  for (const auto& f : seq.frames) tree.frame_indices.push_back(f.index);

  TreeNode root;
  root.id = 0;
  root.depth = 0;
  root.state = NodeState::kContinue;
  root.events.push_back(Event{1, seq.size(), {}, {}});
  tree.nodes.push_back(root);

  auto abort_with = [&](const Error& e) -> void {
    tree.error = std::string(to_string(e.code())) + ": " + e.what();
    throw PartialTreeError(e.code(), e.what(), tree);
  };

  std::deque<std::size_t> queue;
  auto attach = [&](std::size_t parent, std::vector<TreeNode> children) {
    for (auto& child : children) {
      child.id = tree.nodes.size();
      child.parent = parent;
      tree.nodes[parent].children.push_back(child.id);
      queue.push_back(child.id);
      tree.nodes.push_back(std::move(child));
    }
  };

  std::optional<CaptionEmbedding> question_embedding;
  try {
    const std::size_t k = ex.k_scenes_root > 0 ? ex.k_scenes_root
                                               : ceil_div(seq.size(), ex.target_event_len);
    std::vector<TreeNode> first_level;
    bool degenerate = seq.size() < 2;
    if (!degenerate) {
      try {
        first_level = expand_with_k(root, seq, question, clients, cfg, k);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kExpansionDegenerate) throw;
        degenerate = true;
      }
    }
    if (degenerate) {
      Event whole{1, seq.size(), {}, {}};
      whole.caption = caption_event(whole, seq, question, *clients.captioner);
      std::vector<EventGroup> single{EventGroup{{whole}}};
      first_level = make_children(std::move(single), 1, clients, ex);
    }
    attach(0, fit_root_children(std::move(first_level), ex.max_total_nodes - 1, clients, ex));

    const std::string q[] = {question};
    question_embedding = embed_captions(q, *clients.embedder).front();
  } catch (const PartialTreeError&) {
    throw;
  } catch (const Error& e) {
    abort_with(e);
  }

  Rng rng(seed);
  bool halted = false;
  while (!queue.empty()) {
    const std::size_t id = queue.front();
    queue.pop_front();
    if (halted) {
      tree.nodes[id].state = NodeState::kAccept;
      tree.nodes[id].flags.budget_truncated = true;
      continue;
    }
    try {
      const TreeNode& node = tree.nodes[id];
      PolicyDecisionRequest request;
      request.caption = node.caption;
      request.question = question;
      request.depth = node.depth;
      request.max_depth = ex.max_depth;
      request.frame_count = node.frame_count();
      request.caption_embedding = node.embedding;
      request.question_embedding = question_embedding;
      NodeOutput output = decide_node(request, *clients.policy, rng);
      const Action action = output.action;
      tree.nodes[id].output = std::move(output);

      TreeNode& current = tree.nodes[id];
      switch (action) {
        case Action::kAccept:
          current.state = NodeState::kAccept;
          break;
        case Action::kDelete:
          current.state = NodeState::kDelete;
          break;
        case Action::kInvalid:
          current.state = NodeState::kDelete;
          current.flags.invalid_action = true;
          break;
        case Action::kContinue: {
          if (current.depth >= ex.max_depth) {
            current.state = NodeState::kAccept;
            current.flags.depth_coerced = true;
            break;
          }
          if (current.frame_count() < 2) {
            current.state = NodeState::kAccept;
            current.flags.degenerate_coerced = true;
            break;
          }
          current.state = NodeState::kContinue;
          std::vector<TreeNode> children;
          try {
            children = expand_node(current, seq, question, clients, cfg);
          } catch (const Error& e) {
            if (e.code() != ErrorCode::kExpansionDegenerate) throw;
            TreeNode& leaf = tree.nodes[id];
            leaf.state = NodeState::kAccept;
            leaf.flags.degenerate_coerced = true;
            break;
          }
          if (tree.nodes.size() + children.size() > ex.max_total_nodes) {
            TreeNode& leaf = tree.nodes[id];
            leaf.state = NodeState::kAccept;
            leaf.flags.budget_truncated = true;
            tree.budget_truncated = true;
            halted = true;
            break;
          }
          attach(id, std::move(children));
          break;
        }
      }
    } catch (const Error& e) {
      abort_with(e);
    }
  }
  return tree;
}

std::vector<std::size_t> collect_keyframes(const VideoTree& tree, const ExplorationConfig& cfg) {
  std::set<std::size_t> pooled;
  for (const auto& node : tree.nodes) {
    if (node.state != NodeState::kAccept) continue;
    for (std::size_t p : node.positions()) pooled.insert(p);
  }
  if (pooled.empty()) fail(ErrorCode::kNoKeyframes, "no accepted nodes");
  const std::vector<std::size_t> sorted(pooled.begin(), pooled.end());
  std::vector<std::size_t> out;
  for (std::size_t i : uniform_sample_positions(sorted.size(), cfg.max_keyframes)) {
    out.push_back(sorted[i]);
  }
  return out;
}

void assign_keyframes(VideoTree& tree, const ExplorationConfig& cfg) {
  tree.keyframes.clear();
  for (std::size_t p : collect_keyframes(tree, cfg)) {
    tree.keyframes.push_back(p < tree.frame_indices.size() ? tree.frame_indices[p]
                                                           : static_cast<std::int64_t>(p + 1));
  }
}

std::vector<std::string> keyframe_captions(const VideoTree& tree) {
  std::unordered_map<std::int64_t, std::size_t> position_of;
  for (std::size_t p = 0; p < tree.frame_indices.size(); ++p) position_of[tree.frame_indices[p]] = p;
  std::set<std::size_t> selected;
  for (std::int64_t index : tree.keyframes) {
    if (auto it = position_of.find(index); it != position_of.end()) selected.insert(it->second);
  }

  std::vector<std::pair<std::size_t, const TreeNode*>> contributing;
  for (const auto& node : tree.nodes) {
    if (node.state != NodeState::kAccept) continue;
    const auto positions = node.positions();
    const bool contributes = std::any_of(positions.begin(), positions.end(),
                                         [&](std::size_t p) { return selected.count(p) > 0; });
    if (contributes) contributing.emplace_back(positions.front(), &node);
  }
  std::stable_sort(contributing.begin(), contributing.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::string> captions;
  for (const auto& [first, node] : contributing) captions.push_back(node->caption);
  return captions;
}

std::string final_answer(VideoTree& tree, const Answerer& answerer) {
  if (tree.keyframes.empty()) fail(ErrorCode::kNoKeyframes, "tree has no keyframes");
  const auto captions = keyframe_captions(tree);
  if (captions.empty()) fail(ErrorCode::kNoKeyframes, "no accepted node contributes keyframes");
  tree.answer = answer_question(captions, tree.question, answerer);
  return *tree.answer;
}

}  // namespace videominer
