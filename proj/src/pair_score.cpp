#include "crowdseg/pair_score.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace crowdseg {

double normalized_feature_distance(std::span<const float> u, std::span<const float> v) {
    double nu = 0, nv = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        nu += static_cast<double>(u[i]) * u[i];
        nv += static_cast<double>(v[i]) * v[i];
    }
    nu = std::sqrt(nu);
    nv = std::sqrt(nv);
    if (nu == 0.0 && nv == 0.0) return 0.0;
    if (nu == 0.0 || nv == 0.0) return 1.0;  // zero vector vs unit vector
    double inv_u = 1.0 / nu, inv_v = 1.0 / nv;
    double s = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        double diff = u[i] * inv_u - v[i] * inv_v;
        s += diff * diff;
    }
    return std::sqrt(s);
}

namespace {

// Clip the parametric line p(t) = p0 + t*dir to [0,w-1]x[0,h-1].
// Returns false when the line misses the rectangle.
bool clip_to_rect(double px, double py, double dx, double dy, double w1, double h1,
                  double& t0, double& t1) {
    t0 = -std::numeric_limits<double>::infinity();
    t1 = std::numeric_limits<double>::infinity();
    auto clip1 = [&](double p, double d, double lo, double hi) {
        if (std::abs(d) < 1e-15) return p >= lo - 1e-9 && p <= hi + 1e-9;
        double ta = (lo - p) / d;
        double tb = (hi - p) / d;
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
        return true;
    };
    if (!clip1(px, dx, 0.0, w1)) return false;
    if (!clip1(py, dy, 0.0, h1)) return false;
    return t0 <= t1;
}

}  // namespace

PairScoreMap pair_score(const FeatureMap& reference, const FeatureMap& other,
                        const FundamentalMatrix& f, const PairScoreConfig& cfg) {
    if (reference.depth != other.depth)
        throw DataError("pair_score: feature depths differ");
    if (cfg.step <= 0.0) throw DataError("pair_score: step must be positive");
    if (cfg.tau <= 0.0) throw DataError("pair_score: tau must be positive");

    const int h = reference.height, w = reference.width;
    PairScoreMap out;
    out.score = ScalarMap(h, w, 1.0f);
    out.out_of_view.assign(static_cast<std::size_t>(h) * w, 0);

    const double w1 = other.width - 1.0;
    const double h1 = other.height - 1.0;

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            std::size_t pix = static_cast<std::size_t>(y) * w + x;
            auto line = epipolar_line(f, x, y);
            if (!line) {
                out.out_of_view[pix] = 1;
                continue;
            }
            // Point on the line nearest the origin, direction along the line.
            double px = -line->c * line->a;
            double py = -line->c * line->b;
            double dx = -line->b;
            double dy = line->a;
            double t0, t1;
            if (!clip_to_rect(px, py, dx, dy, w1, h1, t0, t1)) {
                out.out_of_view[pix] = 1;
                continue;
            }

            auto ref_f = reference.feature(y, x);
            double dmin = std::numeric_limits<double>::infinity();
            for (double t = t0; t <= t1 + 1e-9; t += cfg.step) {
                double cx = px + t * dx;
                double cy = py + t * dy;
                for (int k = -cfg.band; k <= cfg.band; ++k) {
                    int xi = static_cast<int>(std::lround(cx + k * line->a));
                    int yi = static_cast<int>(std::lround(cy + k * line->b));
                    if (xi < 0 || yi < 0 || xi >= other.width || yi >= other.height) continue;
                    double d = normalized_feature_distance(ref_f, other.feature(yi, xi));
                    if (d < dmin) dmin = d;
                }
            }
            if (!std::isfinite(dmin)) {
                out.out_of_view[pix] = 1;
                continue;
            }
            out.score.data[pix] = static_cast<float>(std::clamp(dmin / cfg.tau, 0.0, 1.0));
        }
    }
    return out;
}

ScalarMap combine_pairs(std::span<const PairScoreMap> maps, CombineRule rule) {
    if (maps.empty()) throw DataError("combine_pairs: need at least one pair map");
    const int h = maps[0].score.height, w = maps[0].score.width;
    for (const auto& m : maps)
        if (m.score.height != h || m.score.width != w)
            throw DataError("combine_pairs: dimension mismatch");

    for (const auto& m : maps)
        if (m.out_of_view.size() != m.score.size())
            throw DataError("combine_pairs: out-of-view channel size mismatch");

    ScalarMap out(h, w);
    std::size_t n = out.size();
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0;
        float low = 1.0f;
        int count = 0;
        for (const auto& m : maps) {
            if (m.out_of_view[i]) continue;
            sum += m.score.data[i];
            low = std::min(low, m.score.data[i]);
            ++count;
        }
        if (count == 0) {
            out.data[i] = 0.5f;
        } else {
            out.data[i] = rule == CombineRule::Mean ? static_cast<float>(sum / count) : low;
        }
    }
    return out;
}

}  // namespace crowdseg
