// SPDX-License-Identifier: Apache-2.0

#ifndef VIDEOMINER_CLUSTERING_HPP_
#define VIDEOMINER_CLUSTERING_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "videominer/event.hpp"

namespace videominer {

class Embedder;

enum class NoisePolicy { kSingleton, kDrop };

struct ClusterConfig {
  double eps = 0.35;
  std::size_t min_pts = 2;
  NoisePolicy noise_policy = NoisePolicy::kSingleton;

  void validate() const;
  bool operator==(const ClusterConfig&) const = default;
};

inline constexpr std::int64_t kDroppedLabel = -1;

struct ClusterAssignment {
  // Labels in [0, cluster_count), numbered by first appearance in input
  // order; kDroppedLabel marks noise under NoisePolicy::kDrop.
  std::vector<std::int64_t> labels;
  std::size_t cluster_count = 0;
};

struct EventGroup {
  std::vector<Event> events;  // sorted by start
};

// One unit-norm embedding per caption, same order. Errors: precondition on
// an empty list; ServiceError / DimensionMismatch from the embedder.
std::vector<CaptionEmbedding> embed_captions(std::span<const std::string> captions,
                                             const Embedder& embedder);

// DBSCAN with Euclidean distance. A point is core when at least min_pts
// points (itself included) lie within eps. Points are scanned in input
// order, so a border point joins the earliest cluster that reaches it.
ClusterAssignment dbscan(std::span<const CaptionEmbedding> points,
                         const ClusterConfig& cfg);

// Groups ordered by earliest member start. Errors: LabelMismatch.
std::vector<EventGroup> group_events(std::span<const Event> events,
                                     const ClusterAssignment& assignment);

}  // namespace videominer

#endif  // VIDEOMINER_CLUSTERING_HPP_
