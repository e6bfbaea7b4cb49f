// SPDX-License-Identifier: Apache-2.0

#include "videominer/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "videominer/error.hpp"

namespace videominer {

double CaptionEmbedding::dot(const CaptionEmbedding& other) const {
  if (values.size() != other.values.size()) {
    fail(ErrorCode::kDimensionMismatch, "embedding dimensions differ");
  }
  return std::inner_product(values.begin(), values.end(), other.values.begin(), 0.0);
}

double CaptionEmbedding::distance(const CaptionEmbedding& other) const {
  if (values.size() != other.values.size()) {
    fail(ErrorCode::kDimensionMismatch, "embedding dimensions differ");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double d = values[i] - other.values[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

CaptionEmbedding CaptionEmbedding::normalized(std::vector<double> raw) {
  require(!raw.empty(), "embedding must be non-empty");
  double norm2 = 0.0;
  for (double v : raw) {
    require(std::isfinite(v), "embedding has non-finite entries");
    norm2 += v * v;
  }
  require(norm2 > 0.0, "embedding has zero norm");
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& v : raw) v *= inv;
  return CaptionEmbedding{std::move(raw)};
}

void SegmentationConfig::validate() const {
  if (k_scenes < 1) fail(ErrorCode::kValidationError, "segmentation.k_scenes must be >= 1");
  if (!(bc_clamp > 0.0)) fail(ErrorCode::kValidationError, "segmentation.bc_clamp must be > 0");
  if (min_event_frames < 1) {
    fail(ErrorCode::kValidationError, "segmentation.min_event_frames must be >= 1");
  }
}

GrayHistogram gray_histogram(const Frame& frame) {
  std::array<std::size_t, 256> counts{};
  for (std::uint8_t p : frame.pixels) ++counts[p];
  GrayHistogram h;
  const double total = static_cast<double>(frame.pixels.size());
  for (std::size_t k = 0; k < 256; ++k) h.bins[k] = static_cast<double>(counts[k]) / total;
  return h;
}

double bhattacharyya(const GrayHistogram& h1, const GrayHistogram& h2, double clamp) {
  double coefficient = 0.0;
  for (std::size_t k = 0; k < 256; ++k) coefficient += std::sqrt(h1.bins[k] * h2.bins[k]);
  // Rounding can push the coefficient of identical histograms past 1.
  const double d = -std::log(std::max(clamp, coefficient));
  return d > 0.0 ? d : 0.0;
}

ChangePointSeries change_points(std::span<const GrayHistogram> histograms, double clamp) {
  if (histograms.size() < 2) {
    fail(ErrorCode::kTooFewFrames, "change points need at least 2 frames");
  }
  ChangePointSeries series;
  series.distances.resize(histograms.size() - 1);
  for (std::size_t i = 0; i + 1 < histograms.size(); ++i) {
    series.distances[i] = bhattacharyya(histograms[i], histograms[i + 1], clamp);
  }
  return series;
}

ChangePointSeries change_points(const FrameSequence& seq, const SegmentationConfig& cfg) {
  if (seq.size() < 2) fail(ErrorCode::kTooFewFrames, "change points need at least 2 frames");
  std::vector<GrayHistogram> histograms(seq.size());
  for (std::size_t i = 0; i < seq.size(); ++i) histograms[i] = gray_histogram(seq[i]);
  return change_points(histograms, cfg.bc_clamp);
}

Partition partition_by_distances(std::span<const double> distances, std::size_t n,
                                 std::size_t k, std::size_t min_event_frames) {
  require(n >= 1, "partition needs at least one frame");
  require(distances.size() + 1 == n || (n == 1 && distances.empty()),
          "distance series must have n - 1 entries");
  const std::size_t target = std::min(std::max<std::size_t>(k, 1), n);
  const std::size_t min_len = std::max<std::size_t>(min_event_frames, 1);

  std::vector<std::size_t> order(distances.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return distances[a] > distances[b];
  });

  Partition out;
  std::vector<std::size_t> cuts;  // sorted, 1-based cut points
  for (std::size_t i : order) {
    if (cuts.size() + 1 >= target) break;
    const std::size_t p = i + 1;
    const auto it = std::lower_bound(cuts.begin(), cuts.end(), p);
    const std::size_t left = it == cuts.begin() ? 0 : *std::prev(it);
    const std::size_t right = it == cuts.end() ? n : *it;
    if (p - left < min_len || right - p < min_len) continue;
    cuts.insert(it, p);
    out.tau = out.tau ? std::min(*out.tau, distances[i]) : distances[i];
  }

  std::size_t start = 1;
  for (std::size_t p : cuts) {
    out.intervals.emplace_back(start, p);
    start = p + 1;
  }
  out.intervals.emplace_back(start, n);
  out.cuts = std::move(cuts);
  return out;
}

SceneSegmentation segment_scenes_detailed(const FrameSequence& seq,
                                          const SegmentationConfig& cfg) {
  cfg.validate();
  if (seq.empty()) fail(ErrorCode::kEmptySequence, "cannot segment an empty sequence");
  SceneSegmentation out;
  if (seq.size() >= 2) out.series = change_points(seq, cfg);
  Partition partition = partition_by_distances(out.series.distances, seq.size(),
                                               cfg.k_scenes, cfg.min_event_frames);
  for (const auto& [start, end] : partition.intervals) {
    Event event;
    event.start = start;
    event.end = end;
    out.events.push_back(std::move(event));
  }
  out.cuts = std::move(partition.cuts);
  out.tau = partition.tau;
  return out;
}

std::vector<Event> segment_scenes(const FrameSequence& seq, const SegmentationConfig& cfg) {
  return segment_scenes_detailed(seq, cfg).events;
}

}  // namespace videominer
