// SPDX-License-Identifier: Apache-2.0

#ifndef VIDEOMINER_FRAME_HPP_
#define VIDEOMINER_FRAME_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace videominer {

// One grayscale frame. `index` is the 1-based position in the source video.
struct Frame {
  std::int64_t index = 0;
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, width * height

  std::uint8_t at(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }

  // Frame filled with a single intensity.
  static Frame filled(std::int64_t index, int width, int height,
                      std::uint8_t value);
};

// Ordered frames sharing one resolution. Immutable once assembled.
struct FrameSequence {
  std::vector<Frame> frames;
  std::string source_id;
  std::size_t original_count = 0;

  std::size_t size() const { return frames.size(); }
  bool empty() const { return frames.empty(); }
  const Frame& operator[](std::size_t pos) const { return frames[pos]; }

  // Throws PreconditionViolation when indices are not strictly increasing,
  // the sequence is empty, or resolutions differ.
  void validate() const;
};

struct ManifestEntry {
  std::filesystem::path path;
  std::int64_t index = 0;
};

struct VideoManifest {
  std::vector<ManifestEntry> entries;  // sorted by index, no duplicates
  std::map<std::string, std::string> metadata;
  std::filesystem::path base_dir;  // relative entry paths resolve here
};

// Parses a manifest file: a JSON array of {"path", "index"} objects, or an
// object {"frames": [...], "metadata": {...}}. Entries are sorted by index;
// duplicate indices raise ValidationError.
VideoManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path,
                    const VideoManifest& manifest);

// Decodes every entry (concurrently) and converts color images to gray.
// Errors: MissingFile, DecodeFailure, ResolutionMismatch.
FrameSequence load_frames(const VideoManifest& manifest);

// BT.601 luma, rounded and clamped to [0, 255].
std::uint8_t to_grayscale(int r, int g, int b);

// Center-offset positions floor((k + 0.5) * len / n), k = 0..min(n,len)-1.
std::vector<std::size_t> uniform_sample_positions(std::size_t len,
                                                  std::size_t n);

// Errors: EmptySequence; PreconditionViolation when n == 0.
FrameSequence uniform_sample(const FrameSequence& seq, std::size_t n);

}  // namespace videominer

#endif  // VIDEOMINER_FRAME_HPP_
