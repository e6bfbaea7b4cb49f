// SPDX-License-Identifier: Apache-2.0

#include "videominer/image_io.hpp"

#include <openssl/evp.h>
#include <png.h>

#include <cctype>
#include <cstring>
#include <fstream>
#include <iterator>

#include "videominer/error.hpp"

namespace videominer {
namespace {

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kMissingFile, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Netpbm header tokenizer; skips whitespace and '#' comments.
class PnmHeader {
 public:
  PnmHeader(const std::vector<std::uint8_t>& bytes, const std::string& name)
      : bytes_(bytes), name_(name) {}

  long next_int() {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
      fail(ErrorCode::kDecodeFailure, name_ + ": malformed netpbm header");
    }
    long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > (1L << 24)) {
        fail(ErrorCode::kDecodeFailure, name_ + ": header value too large");
      }
      ++pos_;
    }
    return value;
  }

  // Exactly one whitespace byte separates the header from the raster.
  std::size_t raster_offset() const { return pos_ + 1; }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<std::uint8_t>& bytes_;
  const std::string& name_;
  std::size_t pos_ = 2;
};

Image decode_pnm(const std::vector<std::uint8_t>& bytes,
                 const std::string& name) {
  const int channels = bytes[1] == '5' ? 1 : 3;
  PnmHeader header(bytes, name);
  const long width = header.next_int();
  const long height = header.next_int();
  const long maxval = header.next_int();
  if (width < 1 || height < 1 || maxval < 1 || maxval > 65535) {
    fail(ErrorCode::kDecodeFailure, name + ": invalid netpbm dimensions");
  }
  const std::size_t sample_bytes = maxval > 255 ? 2 : 1;
  const std::size_t count = static_cast<std::size_t>(width) * height * channels;
  const std::size_t offset = header.raster_offset();
  if (bytes.size() < offset + count * sample_bytes) {
    fail(ErrorCode::kDecodeFailure, name + ": truncated raster");
  }
  Image image{static_cast<int>(width), static_cast<int>(height), channels, {}};
  image.data.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    long sample = sample_bytes == 2
                      ? (bytes[offset + 2 * i] << 8) | bytes[offset + 2 * i + 1]
                      : bytes[offset + i];
    image.data[i] = static_cast<std::uint8_t>((sample * 255 + maxval / 2) / maxval);
  }
  return image;
}

Image decode_png(const std::vector<std::uint8_t>& bytes,
                 const std::string& name) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size())) {
    fail(ErrorCode::kDecodeFailure, name + ": " + png.message);
  }
  const bool color = (png.format & PNG_FORMAT_FLAG_COLOR) != 0;
  png.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  Image image{static_cast<int>(png.width), static_cast<int>(png.height),
              color ? 3 : 1, {}};
  image.data.resize(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, image.data.data(), 0, nullptr)) {
    const std::string message = png.message;
    png_image_free(&png);
    fail(ErrorCode::kDecodeFailure, name + ": " + message);
  }
  return image;
}

}  // namespace

Image read_image(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    fail(ErrorCode::kMissingFile, "missing frame file " + path.string());
  }
  const auto bytes = read_bytes(path);
  const std::string name = path.string();
  if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6')) {
    return decode_pnm(bytes, name);
  }
  static constexpr std::uint8_t kPngMagic[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngMagic, 8) == 0) {
    return decode_png(bytes, name);
  }
  fail(ErrorCode::kDecodeFailure, name + ": unsupported image format");
}

Frame to_frame(const Image& image, std::int64_t index) {
  Frame frame;
  frame.index = index;
  frame.width = image.width;
  frame.height = image.height;
  const std::size_t count = static_cast<std::size_t>(image.width) * image.height;
  frame.pixels.resize(count);
  if (image.channels == 1) {
    std::copy_n(image.data.begin(), count, frame.pixels.begin());
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      frame.pixels[i] = to_grayscale(image.data[3 * i], image.data[3 * i + 1],
                                     image.data[3 * i + 2]);
    }
  }
  return frame;
}

void write_pgm(const std::filesystem::path& path, const Frame& frame) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kMissingFile, "cannot write " + path.string());
  out << "P5\n" << frame.width << ' ' << frame.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(frame.pixels.data()),
            static_cast<std::streamsize>(frame.pixels.size()));
}

std::vector<std::uint8_t> encode_png(const Frame& frame) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(frame.width);
  png.height = static_cast<png_uint_32>(frame.height);
  png.format = PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&png, nullptr, &size, 0, frame.pixels.data(), 0,
                                 nullptr)) {
    fail(ErrorCode::kDecodeFailure, std::string("png encode: ") + png.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&png, out.data(), &size, 0, frame.pixels.data(),
                                 0, nullptr)) {
    fail(ErrorCode::kDecodeFailure, std::string("png encode: ") + png.message);
  }
  out.resize(size);
  return out;
}

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int written = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                      bytes.data(), static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(written));
  return out;
}

}  // namespace videominer
