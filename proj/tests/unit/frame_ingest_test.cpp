// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "test_support.hpp"
#include "videominer/image_io.hpp"

namespace videominer {
namespace {

using testing_support::constant_sequence;
using testing_support::error_code_of;
using testing_support::TempDir;

void write_ppm(const std::filesystem::path& path, int w, int h, std::uint8_t r, std::uint8_t g,
               std::uint8_t b) {
  std::ofstream out(path, std::ios::binary);
  out << "P6\n" << w << " " << h << "\n255\n";
  for (int i = 0; i < w * h; ++i) out.put(static_cast<char>(r)).put(static_cast<char>(g)).put(static_cast<char>(b));
}

void write_manifest_json(const std::filesystem::path& path, const nlohmann::json& doc) {
  std::ofstream(path) << doc.dump();
}

TEST(ToGrayscale, Examples) {
  EXPECT_EQ(to_grayscale(0, 0, 0), 0);
  EXPECT_EQ(to_grayscale(255, 255, 255), 255);
  EXPECT_EQ(to_grayscale(255, 0, 0), 76);
}

TEST(ToGrayscale, MatchesRoundedLuma) {
  for (int r = 0; r < 256; r += 15) {
    for (int g = 0; g < 256; g += 17) {
      for (int b = 0; b < 256; b += 51) {
        const double y = 0.299 * r + 0.587 * g + 0.114 * b;
        EXPECT_NEAR(to_grayscale(r, g, b), std::round(y), 0.5 + 1e-9);
      }
    }
  }
}

TEST(UniformSample, PositionsFormula) {
  EXPECT_EQ(uniform_sample_positions(10, 2), (std::vector<std::size_t>{2, 7}));
  EXPECT_EQ(uniform_sample_positions(3, 100), (std::vector<std::size_t>{0, 1, 2}));
  for (std::size_t len = 1; len < 40; ++len) {
    for (std::size_t n = 1; n < 50; ++n) {
      const auto pos = uniform_sample_positions(len, n);
      ASSERT_EQ(pos.size(), std::min(len, n));
      for (std::size_t k = 1; k < pos.size(); ++k) ASSERT_LT(pos[k - 1], pos[k]);
      ASSERT_LT(pos.back(), len);
    }
  }
}

TEST(UniformSample, Examples) {
  std::vector<int> values(10, 0);
  const FrameSequence seq = constant_sequence(values);
  EXPECT_EQ(uniform_sample(seq, 10).size(), 10u);
  const FrameSequence two = uniform_sample(seq, 2);
  ASSERT_EQ(two.size(), 2u);
  EXPECT_EQ(two[0].index, 3);
  EXPECT_EQ(two[1].index, 8);
  const FrameSequence small = constant_sequence({1, 2, 3});
  const FrameSequence all = uniform_sample(small, 100);
  ASSERT_EQ(all.size(), 3u);
  EXPECT_EQ(all[2].index, 3);
}

TEST(UniformSample, EmptySequence) {
  EXPECT_EQ(error_code_of([] { uniform_sample(FrameSequence{}, 4); }), ErrorCode::kEmptySequence);
}

TEST(LoadFrames, ThreePgmFramesKeepIndices) {
  TempDir dir;
  nlohmann::json entries = nlohmann::json::array();
  for (int i = 0; i < 3; ++i) {
    const std::string name = "f" + std::to_string(i) + ".pgm";
    write_pgm(dir / name, Frame::filled(10 * (i + 1), 8, 6, static_cast<std::uint8_t>(50 * i)));
    entries.push_back({{"path", name}, {"index", 10 * (i + 1)}});
  }
  write_manifest_json(dir / "m.json", entries);
  const FrameSequence seq = load_frames(read_manifest(dir / "m.json"));
  ASSERT_EQ(seq.size(), 3u);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(seq[i].index, 10 * (i + 1));
    EXPECT_EQ(seq[i].width, 8);
    EXPECT_EQ(seq[i].height, 6);
    EXPECT_EQ(seq[i].at(3, 2), 50 * i);
  }
}

TEST(LoadFrames, ManifestSortedByIndex) {
  TempDir dir;
  write_pgm(dir / "a.pgm", Frame::filled(0, 2, 2, 10));
  write_pgm(dir / "b.pgm", Frame::filled(0, 2, 2, 20));
  write_manifest_json(dir / "m.json", {{"frames", {{{"path", "b.pgm"}, {"index", 9}},
                                                   {{"path", "a.pgm"}, {"index", 2}}}},
                                       {"metadata", {{"source_id", "clip"}}}});
  const FrameSequence seq = load_frames(read_manifest(dir / "m.json"));
  ASSERT_EQ(seq.size(), 2u);
  EXPECT_EQ(seq[0].index, 2);
  EXPECT_EQ(seq[0].at(0, 0), 10);
  EXPECT_EQ(seq.source_id, "clip");
}

TEST(LoadFrames, DuplicateIndexRejected) {
  TempDir dir;
  write_pgm(dir / "a.pgm", Frame::filled(0, 2, 2, 10));
  write_manifest_json(dir / "m.json", nlohmann::json::array({{{"path", "a.pgm"}, {"index", 1}},
                                                             {{"path", "a.pgm"}, {"index", 1}}}));
  EXPECT_EQ(error_code_of([&] { read_manifest(dir / "m.json"); }), ErrorCode::kValidationError);
}

TEST(LoadFrames, MissingFile) {
  TempDir dir;
  write_manifest_json(dir / "m.json", nlohmann::json::array({{{"path", "nope.pgm"}, {"index", 1}}}));
  EXPECT_EQ(error_code_of([&] { load_frames(read_manifest(dir / "m.json")); }),
            ErrorCode::kMissingFile);
}

TEST(LoadFrames, ResolutionMismatch) {
  TempDir dir;
  write_pgm(dir / "big.pgm", Frame::filled(0, 64, 64, 1));
  write_pgm(dir / "small.pgm", Frame::filled(0, 32, 32, 1));
  write_manifest_json(dir / "m.json", nlohmann::json::array({{{"path", "big.pgm"}, {"index", 1}},
                                                             {{"path", "small.pgm"}, {"index", 2}}}));
  try {
    load_frames(read_manifest(dir / "m.json"));
    FAIL() << "expected ResolutionMismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kResolutionMismatch);
    EXPECT_NE(std::string(e.what()).find("small.pgm"), std::string::npos);
  }
}

TEST(LoadFrames, DecodeFailure) {
  TempDir dir;
  std::ofstream(dir / "junk.pgm") << "not an image";
  write_manifest_json(dir / "m.json", nlohmann::json::array({{{"path", "junk.pgm"}, {"index", 1}}}));
  EXPECT_EQ(error_code_of([&] { load_frames(read_manifest(dir / "m.json")); }),
            ErrorCode::kDecodeFailure);
}

TEST(LoadFrames, ColorConvertedToGray) {
  TempDir dir;
  write_ppm(dir / "red.ppm", 3, 2, 255, 0, 0);
  write_manifest_json(dir / "m.json", nlohmann::json::array({{{"path", "red.ppm"}, {"index", 1}}}));
  const FrameSequence seq = load_frames(read_manifest(dir / "m.json"));
  EXPECT_EQ(seq[0].at(2, 1), 76);
}

TEST(ImageIo, PngRoundTrip) {
  TempDir dir;
  Frame f = Frame::filled(1, 5, 3, 0);
  for (std::size_t i = 0; i < f.pixels.size(); ++i) f.pixels[i] = static_cast<std::uint8_t>(i * 17);
  const auto bytes = encode_png(f);
  {
    std::ofstream out(dir / "f.png", std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
  const Frame back = to_frame(read_image(dir / "f.png"), 1);
  EXPECT_EQ(back.pixels, f.pixels);
}

TEST(ImageIo, Base64) {
  EXPECT_EQ(base64_encode({'M', 'a', 'n'}), "TWFu");
  EXPECT_EQ(base64_encode({'M', 'a'}), "TWE=");
  EXPECT_EQ(base64_encode({}), "");
}

TEST(FrameSequence, ValidateRejectsBadIndices) {
  FrameSequence seq = constant_sequence({1, 2, 3});
  seq.frames[2].index = 2;
  EXPECT_EQ(error_code_of([&] { seq.validate(); }), ErrorCode::kPrecondition);
}

}  // namespace
}  // namespace videominer
