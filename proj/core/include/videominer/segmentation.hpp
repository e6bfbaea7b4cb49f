// SPDX-License-Identifier: Apache-2.0

#ifndef VIDEOMINER_SEGMENTATION_HPP_
#define VIDEOMINER_SEGMENTATION_HPP_

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "videominer/event.hpp"
#include "videominer/frame.hpp"

namespace videominer {

inline constexpr double kDefaultBcClamp = 1e-12;

struct GrayHistogram {
  std::array<double, 256> bins{};
};

struct ChangePointSeries {
  std::vector<double> distances;  // D_1 .. D_{N-1}
};

struct SegmentationConfig {
  std::size_t k_scenes = 1;
  double bc_clamp = kDefaultBcClamp;
  std::size_t min_event_frames = 1;

  void validate() const;
  bool operator==(const SegmentationConfig&) const = default;
};

// Normalized 256-bin intensity histogram.
GrayHistogram gray_histogram(const Frame& frame);

// -ln(max(clamp, sum_k sqrt(h1[k] h2[k]))).
double bhattacharyya(const GrayHistogram& h1, const GrayHistogram& h2,
                     double clamp = kDefaultBcClamp);

// Distances between consecutive histograms. Errors: TooFewFrames (< 2).
ChangePointSeries change_points(std::span<const GrayHistogram> histograms,
                                double clamp = kDefaultBcClamp);
ChangePointSeries change_points(const FrameSequence& seq,
                                const SegmentationConfig& cfg);

// Result of picking cut points from a distance series over n frames.
struct Partition {
  // Inclusive 1-based [start, end] pairs covering 1..n in order.
  std::vector<std::pair<std::size_t, std::size_t>> intervals;
  // Selected cut points p (split after frame p), ascending.
  std::vector<std::size_t> cuts;
  // Smallest selected distance; empty when nothing was cut.
  std::optional<double> tau;
};

// Greedy top-(k-1) selection: candidates ordered by distance descending,
// ties toward the smaller index. A candidate is skipped when it would leave
// an event shorter than min_event_frames. k is clamped to n.
Partition partition_by_distances(std::span<const double> distances,
                                 std::size_t n, std::size_t k,
                                 std::size_t min_event_frames = 1);

struct SceneSegmentation {
  std::vector<Event> events;
  ChangePointSeries series;
  std::vector<std::size_t> cuts;
  std::optional<double> tau;
};

SceneSegmentation segment_scenes_detailed(const FrameSequence& seq,
                                          const SegmentationConfig& cfg);

// K contiguous events covering the sequence; K reduced to N when larger.
std::vector<Event> segment_scenes(const FrameSequence& seq,
                                  const SegmentationConfig& cfg);

}  // namespace videominer

#endif  // VIDEOMINER_SEGMENTATION_HPP_
