// SPDX-License-Identifier: Apache-2.0

#ifndef VIDEOMINER_IMAGE_IO_HPP_
#define VIDEOMINER_IMAGE_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "videominer/frame.hpp"

namespace videominer {

// Decoded 8-bit image with 1 (gray) or 3 (RGB) interleaved channels.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> data;
};

// PGM (P5), PPM (P6) and PNG. Alpha is discarded, palettes expanded,
// 16-bit samples reduced to 8 bits.
Image read_image(const std::filesystem::path& path);

// Gray frame from an image; RGB goes through to_grayscale.
Frame to_frame(const Image& image, std::int64_t index);

void write_pgm(const std::filesystem::path& path, const Frame& frame);

// In-memory 8-bit grayscale PNG.
std::vector<std::uint8_t> encode_png(const Frame& frame);

std::string base64_encode(const std::vector<std::uint8_t>& bytes);

}  // namespace videominer

#endif  // VIDEOMINER_IMAGE_IO_HPP_
