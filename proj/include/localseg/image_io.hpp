#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "localseg/raster.hpp"

namespace localseg {

/// Bytes or file that are not a decodable PNG/JPEG.
class DecodeError : public Error {
 public:
  using Error::Error;
};

using Bytes = std::vector<std::uint8_t>;

[[nodiscard]] Image decode_image(std::span<const std::uint8_t> bytes);
[[nodiscard]] Image read_image(const std::filesystem::path& path);

/// Grayscale decode; values >= 128 become 1.
[[nodiscard]] BinaryMask decode_mask(std::span<const std::uint8_t> bytes);
[[nodiscard]] BinaryMask read_mask(const std::filesystem::path& path);

/// 8-bit grayscale PNG with values {0, 255}.
[[nodiscard]] Bytes encode_mask_png(const BinaryMask& m);
void write_mask_png(const std::filesystem::path& path, const BinaryMask& m);

[[nodiscard]] Bytes encode_image_png(const Image& img);
void write_image_png(const std::filesystem::path& path, const Image& img);

/// Debug dump: uint32 LE width, uint32 LE height, then row-major float32 LE.
[[nodiscard]] Bytes encode_scalar_blob(const ScalarMap& m);
[[nodiscard]] ScalarMap decode_scalar_blob(std::span<const std::uint8_t> bytes);

[[nodiscard]] Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace localseg
