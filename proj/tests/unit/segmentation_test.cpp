// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "test_support.hpp"
#include "videominer/rng.hpp"
#include "videominer/segmentation.hpp"
#include "videominer/synth.hpp"

namespace videominer {
namespace {

using testing_support::constant_sequence;
using testing_support::error_code_of;

TEST(GrayHistogram, SingleIntensity) {
  const GrayHistogram h = gray_histogram(Frame::filled(1, 2, 2, 128));
  for (int k = 0; k < 256; ++k) EXPECT_EQ(h.bins[k], k == 128 ? 1.0 : 0.0);
}

TEST(GrayHistogram, TwoPixels) {
  Frame f = Frame::filled(1, 1, 2, 0);
  f.pixels[1] = 255;
  const GrayHistogram h = gray_histogram(f);
  EXPECT_EQ(h.bins[0], 0.5);
  EXPECT_EQ(h.bins[255], 0.5);
}

TEST(GrayHistogram, SumsToOne) {
  Rng rng(3);
  Frame f = Frame::filled(1, 8, 8, 0);
  for (auto& p : f.pixels) p = static_cast<std::uint8_t>(rng.below(256));
  const GrayHistogram h = gray_histogram(f);
  EXPECT_NEAR(std::accumulate(h.bins.begin(), h.bins.end(), 0.0), 1.0, 1e-9);
}

TEST(Bhattacharyya, Examples) {
  GrayHistogram a;
  a.bins[0] = 1.0;
  EXPECT_EQ(bhattacharyya(a, a), 0.0);
  GrayHistogram b;
  b.bins[255] = 1.0;
  EXPECT_NEAR(bhattacharyya(a, b), -std::log(1e-12), 1e-9);
  EXPECT_NEAR(bhattacharyya(a, b), 27.631, 1e-3);
  GrayHistogram c;
  c.bins[0] = 0.5;
  c.bins[1] = 0.5;
  EXPECT_NEAR(bhattacharyya(c, a), -std::log(std::sqrt(0.5)), 1e-12);
  EXPECT_NEAR(bhattacharyya(c, a), 0.34657, 1e-5);
}

TEST(ChangePoints, IdenticalFrames) {
  const auto series = change_points(constant_sequence({7, 7, 7, 7, 7}), SegmentationConfig{});
  EXPECT_EQ(series.distances, (std::vector<double>{0, 0, 0, 0}));
}

TEST(ChangePoints, BlackToWhite) {
  const auto series = change_points(constant_sequence({0, 0, 255, 255}), SegmentationConfig{});
  ASSERT_EQ(series.distances.size(), 3u);
  EXPECT_EQ(series.distances[0], 0.0);
  EXPECT_GT(series.distances[1], 0.0);
  EXPECT_EQ(series.distances[2], 0.0);
}

TEST(ChangePoints, SingleFrame) {
  EXPECT_EQ(error_code_of([] { change_points(constant_sequence({1}), SegmentationConfig{}); }),
            ErrorCode::kTooFewFrames);
}

TEST(SegmentScenes, HalfBlackHalfWhite) {
  SegmentationConfig cfg;
  cfg.k_scenes = 2;
  const auto events = segment_scenes(constant_sequence({0, 0, 0, 0, 0, 255, 255, 255, 255, 255}), cfg);
  ASSERT_EQ(events.size(), 2u);
  EXPECT_EQ(events[0].start, 1u);
  EXPECT_EQ(events[0].end, 5u);
  EXPECT_EQ(events[1].start, 6u);
  EXPECT_EQ(events[1].end, 10u);
}

TEST(SegmentScenes, SingleScene) {
  SegmentationConfig cfg;
  cfg.k_scenes = 1;
  const auto events = segment_scenes(constant_sequence({0, 90, 180, 255}), cfg);
  ASSERT_EQ(events.size(), 1u);
  EXPECT_EQ(events[0].start, 1u);
  EXPECT_EQ(events[0].end, 4u);
}

TEST(SegmentScenes, TiesBreakTowardSmallerIndex) {
  SegmentationConfig cfg;
  cfg.k_scenes = 2;
  const auto events = segment_scenes(constant_sequence(std::vector<int>(10, 33)), cfg);
  ASSERT_EQ(events.size(), 2u);
  EXPECT_EQ(events[0].end, 1u);
  EXPECT_EQ(events[1].start, 2u);
  EXPECT_EQ(events[1].end, 10u);
}

TEST(SegmentScenes, KClampedToFrameCount) {
  SegmentationConfig cfg;
  cfg.k_scenes = 9;
  const auto events = segment_scenes(constant_sequence({1, 2, 3}), cfg);
  ASSERT_EQ(events.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(events[i].start, i + 1);
}

// Brute force: sort all (distance, index) pairs, take the top k-1.
std::vector<std::size_t> reference_cuts(const std::vector<double>& d, std::size_t k) {
  std::vector<std::size_t> idx(d.size());
  std::iota(idx.begin(), idx.end(), 1);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return d[a - 1] > d[b - 1]; });
  idx.resize(std::min(idx.size(), k - 1));
  std::sort(idx.begin(), idx.end());
  return idx;
}

TEST(PartitionByDistances, MatchesSortReference) {
  Rng rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng.below(30);
    std::vector<double> d(n - 1);
    for (auto& v : d) v = static_cast<double>(rng.below(6));  // plenty of ties
    const std::size_t k = 1 + rng.below(n);
    const Partition p = partition_by_distances(d, n, k);
    ASSERT_EQ(p.cuts, reference_cuts(d, k));
    ASSERT_EQ(p.intervals.size(), k);
    ASSERT_EQ(p.intervals.front().first, 1u);
    ASSERT_EQ(p.intervals.back().second, n);
    for (std::size_t i = 1; i < p.intervals.size(); ++i) {
      ASSERT_EQ(p.intervals[i].first, p.intervals[i - 1].second + 1);
    }
  }
}

TEST(PartitionByDistances, MinEventFrames) {
  const std::vector<double> d{9, 1, 1, 8, 1};
  const Partition p = partition_by_distances(d, 6, 2, 2);
  EXPECT_EQ(p.cuts, (std::vector<std::size_t>{4}));
  ASSERT_TRUE(p.tau.has_value());
  EXPECT_EQ(*p.tau, 8.0);
}

TEST(SegmentScenes, DetailedReportsTau) {
  SegmentationConfig cfg;
  cfg.k_scenes = 3;
  const auto seg = segment_scenes_detailed(constant_sequence({0, 0, 100, 100, 200, 200}), cfg);
  EXPECT_EQ(seg.cuts, (std::vector<std::size_t>{2, 4}));
  ASSERT_TRUE(seg.tau.has_value());
  EXPECT_EQ(*seg.tau, std::min(seg.series.distances[1], seg.series.distances[3]));
}

TEST(SegmentScenes, SyntheticBoundariesRecovered) {
  SyntheticSpec spec;
  spec.total_frames = 20;
  spec.seed = 5;
  const SyntheticInstance inst = generate(spec);
  const auto series = change_points(inst.frames, SegmentationConfig{});
  const auto argmax = std::max_element(series.distances.begin(), series.distances.end());
  EXPECT_EQ(argmax - series.distances.begin() + 1, 10);
}

TEST(SegmentationConfig, Validate) {
  SegmentationConfig cfg;
  cfg.k_scenes = 0;
  EXPECT_EQ(error_code_of([&] { cfg.validate(); }), ErrorCode::kValidationError);
}

}  // namespace
}  // namespace videominer
