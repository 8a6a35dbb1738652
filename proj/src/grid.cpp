#include "crowdseg/grid.hpp"

#include <sstream>

namespace crowdseg {

void require_score_map(const ScalarMap& m, const std::string& what) {
    for (std::size_t i = 0; i < m.data.size(); ++i) {
        float v = m.data[i];
        if (!(v >= 0.0f && v <= 1.0f)) {
            std::ostringstream os;
            os << what << ": score value " << v << " at pixel " << i << " outside [0,1]";
            throw DataError(os.str());
        }
    }
}

FeatureMap upscale_nearest(const FeatureMap& f, int scale) {
    if (scale < 1) throw DataError("upscale_nearest: scale must be >= 1");
    if (scale == 1) return f;
    FeatureMap out(f.height * scale, f.width * scale, f.depth);
    for (int y = 0; y < out.height; ++y) {
        int sy = y / scale;
        for (int x = 0; x < out.width; ++x) {
            auto src = f.feature(sy, x / scale);
            auto dst = out.feature(y, x);
            for (int c = 0; c < f.depth; ++c) dst[c] = src[c];
        }
    }
    return out;
}

}  // namespace crowdseg
