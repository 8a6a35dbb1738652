#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "crowdseg/errors.hpp"

namespace crowdseg {

// H x W grid of reals, row-major. Holds score maps (values in [0,1]),
// gradients, weights. Stored as f32 to round-trip the on-disk format
// bit-exactly; arithmetic on top of it is done in double.
struct ScalarMap {
    int height = 0;
    int width = 0;
    std::vector<float> data;

    ScalarMap() = default;
    ScalarMap(int h, int w, float fill = 0.0f)
        : height(h), width(w), data(static_cast<std::size_t>(h) * w, fill) {}

    float at(int y, int x) const { return data[static_cast<std::size_t>(y) * width + x]; }
    float& at(int y, int x) { return data[static_cast<std::size_t>(y) * width + x]; }
    std::size_t size() const { return data.size(); }
};

// H x W x D grid of per-pixel feature vectors, row-major, channels
// interleaved per pixel.
struct FeatureMap {
    int height = 0;
    int width = 0;
    int depth = 0;
    std::vector<float> data;

    FeatureMap() = default;
    FeatureMap(int h, int w, int d)
        : height(h), width(w), depth(d),
          data(static_cast<std::size_t>(h) * w * d, 0.0f) {}

    std::span<const float> feature(int y, int x) const {
        return {data.data() + (static_cast<std::size_t>(y) * width + x) * depth,
                static_cast<std::size_t>(depth)};
    }
    std::span<float> feature(int y, int x) {
        return {data.data() + (static_cast<std::size_t>(y) * width + x) * depth,
                static_cast<std::size_t>(depth)};
    }
    int pixels() const { return height * width; }
};

enum class PixelClass : std::uint8_t { Static = 0, Dynamic = 1, DontCare = 2 };

struct Mask {
    int height = 0;
    int width = 0;
    std::vector<PixelClass> data;

    Mask() = default;
    Mask(int h, int w, PixelClass fill = PixelClass::Static)
        : height(h), width(w), data(static_cast<std::size_t>(h) * w, fill) {}

    PixelClass at(int y, int x) const { return data[static_cast<std::size_t>(y) * width + x]; }
    PixelClass& at(int y, int x) { return data[static_cast<std::size_t>(y) * width + x]; }
};

// H x W grid of label indices, each in 1..bins.
struct LabelField {
    int height = 0;
    int width = 0;
    std::vector<int> data;

    LabelField() = default;
    LabelField(int h, int w, int fill = 1)
        : height(h), width(w), data(static_cast<std::size_t>(h) * w, fill) {}

    int at(int y, int x) const { return data[static_cast<std::size_t>(y) * width + x]; }
    int& at(int y, int x) { return data[static_cast<std::size_t>(y) * width + x]; }
};

// RGB image as three planes, values in [0, 1].
struct RgbImage {
    ScalarMap r, g, b;

    RgbImage() = default;
    RgbImage(int h, int w) : r(h, w), g(h, w), b(h, w) {}
    int height() const { return r.height; }
    int width() const { return r.width; }
};

// Throws DataError unless every value lies in [0, 1].
void require_score_map(const ScalarMap& m, const std::string& what);

// Nearest-neighbour upsampling by an integer factor (used when a manifest
// declares a feature scale != 1).
FeatureMap upscale_nearest(const FeatureMap& f, int scale);

}  // namespace crowdseg
