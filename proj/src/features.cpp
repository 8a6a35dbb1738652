#include "crowdseg/features.hpp"

#include <algorithm>
#include <cmath>

namespace crowdseg {

ScalarMap luma(const RgbImage& img) {
    ScalarMap out(img.height(), img.width());
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        out.data[i] = 0.299f * img.r.data[i] + 0.587f * img.g.data[i] + 0.114f * img.b.data[i];
    }
    return out;
}

ScalarMap gradient_magnitude(const ScalarMap& gray) {
    if (gray.height < 2 || gray.width < 2)
        throw DataError("gradient_magnitude: image must be at least 2x2");
    const int h = gray.height, w = gray.width;
    ScalarMap out(h, w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double gx, gy;
            if (x == 0) {
                gx = gray.at(y, 1) - gray.at(y, 0);
            } else if (x == w - 1) {
                gx = gray.at(y, w - 1) - gray.at(y, w - 2);
            } else {
                gx = (gray.at(y, x + 1) - gray.at(y, x - 1)) * 0.5;
            }
            if (y == 0) {
                gy = gray.at(1, x) - gray.at(0, x);
            } else if (y == h - 1) {
                gy = gray.at(h - 1, x) - gray.at(h - 2, x);
            } else {
                gy = (gray.at(y + 1, x) - gray.at(y - 1, x)) * 0.5;
            }
            out.at(y, x) = static_cast<float>(std::sqrt(gx * gx + gy * gy));
        }
    }
    return out;
}

FeatureMap builtin_features(const RgbImage& img, int window) {
    if (window < 1 || window % 2 == 0)
        throw DataError("builtin_features: window must be odd and >= 1");
    const int h = img.height(), w = img.width();
    if (window > h || window > w)
        throw DataError("builtin_features: window larger than image");

    ScalarMap grad = gradient_magnitude(luma(img));
    const int r = window / 2;
    FeatureMap out(h, w, 4);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double sr = 0, sg = 0, sb = 0, sd = 0;
            for (int dy = -r; dy <= r; ++dy) {
                int yy = std::clamp(y + dy, 0, h - 1);
                for (int dx = -r; dx <= r; ++dx) {
                    int xx = std::clamp(x + dx, 0, w - 1);
                    sr += img.r.at(yy, xx);
                    sg += img.g.at(yy, xx);
                    sb += img.b.at(yy, xx);
                    sd += grad.at(yy, xx);
                }
            }
            double inv = 1.0 / (static_cast<double>(window) * window);
            auto f = out.feature(y, x);
            f[0] = static_cast<float>(sr * inv);
            f[1] = static_cast<float>(sg * inv);
            f[2] = static_cast<float>(sb * inv);
            f[3] = static_cast<float>(sd * inv);
        }
    }
    return out;
}

}  // namespace crowdseg
