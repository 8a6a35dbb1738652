#pragma once

#include <filesystem>
#include <variant>

#include "crowdseg/grid.hpp"

namespace crowdseg {

// FMAP tensor container: magic "FMAP", u32 version (=1), u32 height,
// u32 width, u32 depth, all little-endian, followed by height*width*depth
// little-endian f32 values, row-major, channels interleaved per pixel.
// A depth-1 tensor decodes as a ScalarMap.

std::variant<ScalarMap, FeatureMap> read_tensor(const std::filesystem::path& path);

// Convenience wrappers that enforce the expected depth.
ScalarMap read_scalar_map(const std::filesystem::path& path);
FeatureMap read_feature_map(const std::filesystem::path& path);

void write_tensor(const ScalarMap& m, const std::filesystem::path& path);
void write_tensor(const FeatureMap& m, const std::filesystem::path& path);

// Binary PGM (P5) / PPM (P6), maxval 255. Images load scaled to [0, 1].
RgbImage read_image(const std::filesystem::path& path);   // P6, or P5 replicated to gray
void write_ppm(const RgbImage& img, const std::filesystem::path& path);

// Masks are 8-bit PGM: 0 = Static, 255 = Dynamic, 128 = DontCare.
Mask read_mask(const std::filesystem::path& path);
void write_mask(const Mask& mask, const std::filesystem::path& path);

// Quantized 8-bit PGM dump of a score map, for eyeballing results.
void write_pgm8(const ScalarMap& m, const std::filesystem::path& path);

}  // namespace crowdseg
