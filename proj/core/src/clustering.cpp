// SPDX-License-Identifier: Apache-2.0

#include "videominer/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>

#include "videominer/clients.hpp"
#include "videominer/error.hpp"

namespace videominer {

void ClusterConfig::validate() const {
  if (!(eps > 0.0)) fail(ErrorCode::kValidationError, "clustering.eps must be > 0");
  if (min_pts < 1) fail(ErrorCode::kValidationError, "clustering.min_pts must be >= 1");
}

std::vector<CaptionEmbedding> embed_captions(std::span<const std::string> captions,
                                             const Embedder& embedder) {
  require(!captions.empty(), "embed_captions needs at least one caption");
  std::vector<CaptionEmbedding> out;
  try {
    out = embedder.embed(captions);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kServiceError) throw;
    fail(ErrorCode::kServiceError, "embedding captions [0, " +
                                       std::to_string(captions.size()) + "): " + e.what());
  }
  if (out.size() != captions.size()) {
    fail(ErrorCode::kServiceError, "embedder returned " + std::to_string(out.size()) +
                                       " vectors for " + std::to_string(captions.size()) +
                                       " captions");
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].dim() != out.front().dim()) {
      fail(ErrorCode::kDimensionMismatch,
           "caption " + std::to_string(i) + " embedding has dimension " +
               std::to_string(out[i].dim()));
    }
    out[i] = CaptionEmbedding::normalized(std::move(out[i].values));
  }
  return out;
}

ClusterAssignment dbscan(std::span<const CaptionEmbedding> points, const ClusterConfig& cfg) {
  cfg.validate();
  require(!points.empty(), "dbscan needs at least one point");
  const std::size_t n = points.size();

  std::vector<std::vector<std::size_t>> neighbors(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (points[i].distance(points[j]) <= cfg.eps) neighbors[i].push_back(j);
    }
  }

  constexpr std::int64_t kUnassigned = -2;
  std::vector<std::int64_t> raw(n, kUnassigned);
  std::int64_t clusters = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (raw[i] != kUnassigned || neighbors[i].size() < cfg.min_pts) continue;
    const std::int64_t id = clusters++;
    raw[i] = id;
    std::deque<std::size_t> frontier{i};
    while (!frontier.empty()) {
      const std::size_t p = frontier.front();
      frontier.pop_front();
      for (std::size_t q : neighbors[p]) {
        if (raw[q] != kUnassigned) continue;
        raw[q] = id;
        if (neighbors[q].size() >= cfg.min_pts) frontier.push_back(q);
      }
    }
  }

  // Noise handling, then relabel by first appearance.
  ClusterAssignment out;
  out.labels.assign(n, kDroppedLabel);
  std::map<std::int64_t, std::int64_t> relabel;
  std::int64_t next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (raw[i] == kUnassigned) {
      if (cfg.noise_policy == NoisePolicy::kDrop) continue;
      out.labels[i] = next++;
      continue;
    }
    auto [it, inserted] = relabel.try_emplace(raw[i], next);
    if (inserted) ++next;
    out.labels[i] = it->second;
  }
  out.cluster_count = static_cast<std::size_t>(next);
  return out;
}

std::vector<EventGroup> group_events(std::span<const Event> events,
                                     const ClusterAssignment& assignment) {
  if (events.size() != assignment.labels.size()) {
    fail(ErrorCode::kLabelMismatch, std::to_string(assignment.labels.size()) +
                                        " labels for " + std::to_string(events.size()) +
                                        " events");
  }
  std::map<std::int64_t, EventGroup> by_label;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const std::int64_t label = assignment.labels[i];
    if (label == kDroppedLabel) continue;
    if (label < 0 || static_cast<std::size_t>(label) >= assignment.cluster_count) {
      fail(ErrorCode::kLabelMismatch, "label " + std::to_string(label) + " out of range");
    }
    by_label[label].events.push_back(events[i]);
  }
  std::vector<EventGroup> groups;
  for (auto& [label, group] : by_label) {
    std::stable_sort(group.events.begin(), group.events.end(),
                     [](const Event& a, const Event& b) { return a.start < b.start; });
    groups.push_back(std::move(group));
  }
  std::stable_sort(groups.begin(), groups.end(), [](const EventGroup& a, const EventGroup& b) {
    return a.events.front().start < b.events.front().start;
  });
  return groups;
}

}  // namespace videominer
