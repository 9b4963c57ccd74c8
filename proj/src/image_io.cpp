#include "medxai/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>

#include "medxai/errors.hpp"

namespace medxai {

namespace {

class HeaderParser {
 public:
  explicit HeaderParser(std::string_view bytes) : bytes_(bytes) {}

  std::size_t read_number(const char* what) {
    skip_whitespace_and_comments();
    const std::size_t start = pos_;
    std::size_t value = 0;
    while (pos_ < bytes_.size() &&
           std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
      value = value * 10 + static_cast<std::size_t>(bytes_[pos_] - '0');
      if (value > 1'000'000) {
        throw DataError(std::string("malformed NetPBM header: ") + what +
                        " too large at byte offset " + std::to_string(start));
      }
      ++pos_;
    }
    if (pos_ == start) {
      throw DataError(std::string("malformed NetPBM header: expected ") + what +
                      " at byte offset " + std::to_string(start));
    }
    return value;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  void expect_single_whitespace() {
    if (pos_ >= bytes_.size() ||
        !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      throw DataError("malformed NetPBM header: missing whitespace before "
                      "payload at byte offset " + std::to_string(pos_));
    }
    ++pos_;
  }

  std::size_t position() const { return pos_; }

 private:
  void skip_whitespace_and_comments() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view bytes_;
  std::size_t pos_ = 2;
};

std::uint8_t quantize(double v) {
  const double clamped = std::clamp(v, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::lround(clamped * 255.0));
}

}  // namespace

Tensor decode_netpbm(std::string_view bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    throw DataError("malformed NetPBM header: expected magic P5 or P6");
  }
  const std::size_t channels = bytes[1] == '5' ? 1 : 3;
  HeaderParser parser(bytes);
  const std::size_t width = parser.read_number("width");
  const std::size_t height = parser.read_number("height");
  const std::size_t maxval = parser.read_number("maxval");
  if (width == 0 || height == 0) {
    throw DataError("malformed NetPBM header: zero image dimension");
  }
  if (maxval != 255) {
    throw DataError("unsupported NetPBM maxval " + std::to_string(maxval) +
                    " (only 255 is supported)");
  }
  parser.expect_single_whitespace();

  const std::size_t offset = parser.position();
  const std::size_t expected = width * height * channels;
  const std::size_t available = bytes.size() - offset;
  if (available < expected) {
    throw DataError("truncated NetPBM payload: expected " +
                    std::to_string(expected) + " bytes from byte offset " +
                    std::to_string(offset) + ", file ends at byte offset " +
                    std::to_string(bytes.size()));
  }

  Tensor image({channels, height, width});
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      for (std::size_t c = 0; c < channels; ++c) {
        const auto byte = static_cast<unsigned char>(
            bytes[offset + (y * width + x) * channels + c]);
        image[(c * height + y) * width + x] = byte / 255.0;
      }
    }
  }
  return image;
}

std::string encode_netpbm(const Tensor& image) {
  std::size_t channels = 1, height = 0, width = 0;
  if (image.rank() == 2) {
    height = image.dim(0);
    width = image.dim(1);
  } else if (image.rank() == 3 && (image.dim(0) == 1 || image.dim(0) == 3)) {
    channels = image.dim(0);
    height = image.dim(1);
    width = image.dim(2);
  } else {
    throw ShapeError("NetPBM images must be [H,W], [1,H,W] or [3,H,W], got " +
                     shape_to_string(image.shape()));
  }
  std::string out = (channels == 1 ? "P5\n" : "P6\n") + std::to_string(width) +
                    " " + std::to_string(height) + "\n255\n";
  const std::size_t header = out.size();
  out.resize(header + width * height * channels);
  for (std::size_t y = 0; y < height; ++y)
    for (std::size_t x = 0; x < width; ++x)
      for (std::size_t c = 0; c < channels; ++c)
        out[header + (y * width + x) * channels + c] =
            static_cast<char>(quantize(image[(c * height + y) * width + x]));
  return out;
}

Tensor read_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open image " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  try {
    return decode_netpbm(bytes);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_image(const std::filesystem::path& path, const Tensor& image) {
  const std::string bytes = encode_netpbm(image);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing " + path.string());
}

}  // namespace medxai
