// SPDX-License-Identifier: Apache-2.0

#include "videominer/frame.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <optional>
#include <thread>

#include <nlohmann/json.hpp>

#include "videominer/error.hpp"
#include "videominer/image_io.hpp"

namespace videominer {

using nlohmann::json;

Frame Frame::filled(std::int64_t index, int width, int height,
                    std::uint8_t value) {
  Frame frame;
  frame.index = index;
  frame.width = width;
  frame.height = height;
  frame.pixels.assign(static_cast<std::size_t>(width) * height, value);
  return frame;
}

void FrameSequence::validate() const {
  require(!frames.empty(), "frame sequence is empty");
  const Frame& first = frames.front();
  require(first.width >= 1 && first.height >= 1, "frame resolution must be >= 1x1");
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const Frame& f = frames[i];
    require(f.width == first.width && f.height == first.height,
            "frames must share one resolution");
    require(f.pixels.size() == static_cast<std::size_t>(f.width) * f.height,
            "pixel buffer does not match resolution");
    if (i > 0) {
      require(frames[i - 1].index < f.index, "frame indices must strictly increase");
    }
  }
}

VideoManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kMissingFile, "missing manifest " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::kParseError, path.string() + ": " + e.what());
  }

  VideoManifest manifest;
  manifest.base_dir = path.parent_path();
  const json* frames = &doc;
  if (doc.is_object()) {
    if (!doc.contains("frames")) {
      fail(ErrorCode::kParseError, path.string() + ": missing \"frames\"");
    }
    frames = &doc.at("frames");
    if (doc.contains("metadata")) {
      for (const auto& [key, value] : doc.at("metadata").items()) {
        manifest.metadata[key] = value.is_string() ? value.get<std::string>() : value.dump();
      }
    }
  }
  if (!frames->is_array()) {
    fail(ErrorCode::kParseError, path.string() + ": manifest must be an array");
  }
  for (const auto& item : *frames) {
    if (!item.is_object() || !item.contains("path") || !item.contains("index") ||
        !item.at("path").is_string() || !item.at("index").is_number_integer()) {
      fail(ErrorCode::kParseError,
           path.string() + ": entries need string \"path\" and integer \"index\"");
    }
    manifest.entries.push_back(
        {item.at("path").get<std::string>(), item.at("index").get<std::int64_t>()});
  }
  std::stable_sort(manifest.entries.begin(), manifest.entries.end(),
                   [](const auto& a, const auto& b) { return a.index < b.index; });
  for (std::size_t i = 1; i < manifest.entries.size(); ++i) {
    if (manifest.entries[i].index == manifest.entries[i - 1].index) {
      fail(ErrorCode::kValidationError,
           "duplicate frame index " + std::to_string(manifest.entries[i].index));
    }
  }
  return manifest;
}

void write_manifest(const std::filesystem::path& path,
                    const VideoManifest& manifest) {
  json frames = json::array();
  for (const auto& entry : manifest.entries) {
    frames.push_back({{"path", entry.path.generic_string()}, {"index", entry.index}});
  }
  json doc = frames;
  if (!manifest.metadata.empty()) {
    doc = {{"frames", frames}, {"metadata", manifest.metadata}};
  }
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kMissingFile, "cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

FrameSequence load_frames(const VideoManifest& manifest) {
  if (manifest.entries.empty()) {
    fail(ErrorCode::kEmptySequence, "manifest has no entries");
  }
  const std::size_t n = manifest.entries.size();
  std::vector<std::optional<Frame>> decoded(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      const ManifestEntry& entry = manifest.entries[i];
      try {
        const auto full = entry.path.is_absolute() ? entry.path
                                                   : manifest.base_dir / entry.path;
        decoded[i] = to_frame(read_image(full), entry.index);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t workers =
      std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, std::min<std::size_t>(n, 8));
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
  }
  for (const auto& error : errors) {
    if (error) std::rethrow_exception(error);
  }

  FrameSequence seq;
  seq.original_count = n;
  seq.source_id = manifest.metadata.count("source_id") ? manifest.metadata.at("source_id")
                                                        : manifest.base_dir.string();
  seq.frames.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Frame& frame = *decoded[i];
    if (!seq.frames.empty() && (frame.width != seq.frames.front().width ||
                                frame.height != seq.frames.front().height)) {
      fail(ErrorCode::kResolutionMismatch,
           manifest.entries[i].path.string() + " is " + std::to_string(frame.width) +
               "x" + std::to_string(frame.height) + ", expected " +
               std::to_string(seq.frames.front().width) + "x" +
               std::to_string(seq.frames.front().height));
    }
    seq.frames.push_back(std::move(frame));
  }
  return seq;
}

std::uint8_t to_grayscale(int r, int g, int b) {
  const double luma = 0.299 * r + 0.587 * g + 0.114 * b;
  return static_cast<std::uint8_t>(std::clamp(std::lround(luma), 0L, 255L));
}

std::vector<std::size_t> uniform_sample_positions(std::size_t len, std::size_t n) {
  std::vector<std::size_t> positions;
  if (len == 0 || n == 0) return positions;
  if (n >= len) {
    positions.resize(len);
    for (std::size_t i = 0; i < len; ++i) positions[i] = i;
    return positions;
  }
  positions.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    // floor((k + 0.5) * len / n) in exact integer arithmetic
    const std::size_t pos = ((2 * k + 1) * len) / (2 * n);
    if (positions.empty() || positions.back() != pos) positions.push_back(pos);
  }
  return positions;
}

FrameSequence uniform_sample(const FrameSequence& seq, std::size_t n) {
  if (seq.empty()) fail(ErrorCode::kEmptySequence, "cannot sample an empty sequence");
  require(n >= 1, "sample count must be >= 1");
  FrameSequence out;
  out.source_id = seq.source_id;
  out.original_count = seq.original_count;
  for (std::size_t pos : uniform_sample_positions(seq.size(), n)) {
    out.frames.push_back(seq.frames[pos]);
  }
  return out;
}

}  // namespace videominer
