#pragma once

#include <span>

#include "crowdseg/epipolar.hpp"
#include "crowdseg/grid.hpp"

namespace crowdseg {

struct PairScoreConfig {
    int band = 1;       // perpendicular widening of the search, pixels
    double step = 1.0;  // sampling spacing along the line, pixels
    double tau = 0.5;   // feature distance that maps to score 1
};

// Static-violation scores for one (reference, other) pair. out_of_view is
// set where the epipolar line misses the other image entirely (score is 1
// there but carries no evidence).
struct PairScoreMap {
    ScalarMap score;
    std::vector<std::uint8_t> out_of_view;
};

// L2 distance between unit-normalized feature vectors, range [0, 2].
double normalized_feature_distance(std::span<const float> u, std::span<const float> v);

// Per reference pixel: sample the clipped epipolar line in `other` at
// spacing cfg.step, widened +/- cfg.band perpendicular; d* = minimum
// normalized feature distance over candidates; score = clamp(d*/tau, 0, 1).
PairScoreMap pair_score(const FeatureMap& reference, const FeatureMap& other,
                        const FundamentalMatrix& f, const PairScoreConfig& cfg);

// How per-pair scores fuse into one map. Mean is the default behaviour;
// Min is the conservative alternative (a single good pair clears a pixel).
enum class CombineRule { Mean, Min };

// Per-pixel combination over pairs after dropping out-of-view pairs; 0.5
// where every pair is out of view.
ScalarMap combine_pairs(std::span<const PairScoreMap> maps, CombineRule rule = CombineRule::Mean);

}  // namespace crowdseg
