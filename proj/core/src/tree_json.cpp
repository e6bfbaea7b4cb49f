// SPDX-License-Identifier: Apache-2.0

#include <string>

#include "videominer/tree.hpp"

namespace videominer {
namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& what) {
  fail(ErrorCode::kParseError, "tree document: " + what);
}

const json& field(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) bad(std::string("missing field '") + key + "'");
  return obj.at(key);
}

template <typename T>
T get_as(const json& obj, const char* key) {
  try {
    return field(obj, key).get<T>();
  } catch (const json::exception&) {
    bad(std::string("field '") + key + "' has the wrong type");
  }
}

json output_to_json(const NodeOutput& out) {
  json doc = {{"raw_text", out.raw_text},
              {"format", std::string(to_string(out.format))},
              {"length", out.length},
              {"action", std::string(to_string(out.action))}};
  doc["action_logprob"] = out.action_logprob ? json(*out.action_logprob) : json(nullptr);
  return doc;
}

NodeOutput output_from_json(const json& doc) {
  NodeOutput out = parse_node_output(get_as<std::string>(doc, "raw_text"));
  const auto format = parse_format(get_as<std::string>(doc, "format"));
  const auto action = parse_action(get_as<std::string>(doc, "action"));
  if (!format) bad("unknown format class");
  if (!action) bad("unknown action");
  out.format = *format;
  out.action = *action;
  out.length = get_as<std::size_t>(doc, "length");
  const json& logprob = field(doc, "action_logprob");
  if (!logprob.is_null()) out.action_logprob = logprob.get<double>();
  return out;
}

}  // namespace

json tree_to_json(const VideoTree& tree) {
  json nodes = json::array();
  for (const auto& node : tree.nodes) {
    json events = json::array();
    for (const auto& e : node.events) {
      events.push_back({{"start", e.start}, {"end", e.end}, {"caption", e.caption}});
    }
    nodes.push_back({
        {"id", node.id},
        {"parent", node.parent ? json(*node.parent) : json(nullptr)},
        {"depth", node.depth},
        {"state", std::string(to_string(node.state))},
        {"events", std::move(events)},
        {"caption", node.caption},
        {"children", node.children},
        {"flags",
         {{"budget_truncated", node.flags.budget_truncated},
          {"depth_coerced", node.flags.depth_coerced},
          {"degenerate_coerced", node.flags.degenerate_coerced},
          {"invalid_action", node.flags.invalid_action}}},
        {"output", node.output ? output_to_json(*node.output) : json(nullptr)},
    });
  }
  return {
      {"question", tree.question},
      {"source_id", tree.source_id},
      {"frames", tree.frame_indices},
      {"root", tree.root},
      {"nodes", std::move(nodes)},
      {"keyframes", tree.keyframes},
      {"answer", tree.answer ? json(*tree.answer) : json(nullptr)},
      {"flags",
       {{"budget_truncated", tree.budget_truncated},
        {"error", tree.error ? json(*tree.error) : json(nullptr)}}},
  };
}

VideoTree tree_from_json(const json& doc) {
  VideoTree tree;
  tree.question = get_as<std::string>(doc, "question");
  if (doc.contains("source_id")) tree.source_id = get_as<std::string>(doc, "source_id");
  tree.frame_indices = get_as<std::vector<std::int64_t>>(doc, "frames");
  tree.root = get_as<std::size_t>(doc, "root");
  tree.keyframes = get_as<std::vector<std::int64_t>>(doc, "keyframes");
  if (const json& answer = field(doc, "answer"); !answer.is_null()) {
    tree.answer = answer.get<std::string>();
  }
  if (doc.contains("flags")) {
    const json& flags = doc.at("flags");
    tree.budget_truncated = flags.value("budget_truncated", false);
    if (flags.contains("error") && !flags.at("error").is_null()) {
      tree.error = flags.at("error").get<std::string>();
    }
  }

  const json& nodes = field(doc, "nodes");
  if (!nodes.is_array()) bad("'nodes' must be an array");
  for (const json& item : nodes) {
    TreeNode node;
    node.id = get_as<std::size_t>(item, "id");
    if (node.id != tree.nodes.size()) bad("node ids must equal their table position");
    if (const json& parent = field(item, "parent"); !parent.is_null()) {
      node.parent = parent.get<std::size_t>();
    }
    node.depth = get_as<int>(item, "depth");
    const auto state = parse_node_state(get_as<std::string>(item, "state"));
    if (!state) bad("unknown node state");
    node.state = *state;
    for (const json& e : field(item, "events")) {
      Event event;
      event.start = get_as<std::size_t>(e, "start");
      event.end = get_as<std::size_t>(e, "end");
      if (event.start < 1 || event.end < event.start ||
          event.end > tree.frame_indices.size()) {
        bad("event interval out of range in node " + std::to_string(node.id));
      }
      if (e.contains("caption")) event.caption = get_as<std::string>(e, "caption");
      node.events.push_back(std::move(event));
    }
    node.caption = get_as<std::string>(item, "caption");
    node.children = get_as<std::vector<std::size_t>>(item, "children");
    if (item.contains("flags")) {
      const json& flags = item.at("flags");
      node.flags.budget_truncated = flags.value("budget_truncated", false);
      node.flags.depth_coerced = flags.value("depth_coerced", false);
      node.flags.degenerate_coerced = flags.value("degenerate_coerced", false);
      node.flags.invalid_action = flags.value("invalid_action", false);
    }
    if (item.contains("output") && !item.at("output").is_null()) {
      node.output = output_from_json(item.at("output"));
    }
    tree.nodes.push_back(std::move(node));
  }

  if (tree.root >= tree.nodes.size()) bad("root id out of range");
  for (const auto& node : tree.nodes) {
    for (std::size_t child : node.children) {
      if (child >= tree.nodes.size() || tree.nodes[child].parent != node.id) {
        bad("inconsistent parent/child link at node " + std::to_string(node.id));
      }
    }
  }
  return tree;
}

}  // namespace videominer
