#ifndef MEDXAI_IMAGE_IO_HPP
#define MEDXAI_IMAGE_IO_HPP

#include <filesystem>
#include <string>
#include <string_view>

#include "medxai/tensor.hpp"

namespace medxai {

// Binary NetPBM with maxval 255: P5 (grayscale) decodes to [1,H,W], P6 (RGB)
// to [3,H,W]. Pixel values are scaled to [0,1].
Tensor decode_netpbm(std::string_view bytes);

// Quantizes to round(255 * clamp(v, 0, 1)). Accepts [H,W], [1,H,W] or
// [3,H,W].
std::string encode_netpbm(const Tensor& image);

Tensor read_image(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const Tensor& image);

}  // namespace medxai

#endif  // MEDXAI_IMAGE_IO_HPP
