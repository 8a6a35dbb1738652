#pragma once

#include <cstdint>
#include <filesystem>

#include "crowdseg/epipolar.hpp"
#include "crowdseg/manifest.hpp"

namespace crowdseg {

// Reproducible desk-scale test scene: a textured background observed by
// horizontally translating cameras (so epipolar lines are image rows) and,
// unless static_scene is set, a vertically moving square that violates the
// epipolar constraint. The background is split into horizontal depth bands
// with different disparities so the fundamental matrix is uniquely
// recoverable from the shipped matches.
struct SynthConfig {
    int size = 64;
    int image_count = 5;
    int square = 12;
    double salt_noise = 0.2;      // fraction of score-map pixels forced to 1.0
    std::uint64_t seed = 7;
    bool static_scene = false;
    int matches_per_pair = 160;
    double outlier_fraction = 0.15;
    int band_height = 16;
    int feature_window = 3;
    double manifest_lambda = 2.0;  // smoothness weight pinned by the scene manifest
};

struct SynthScene {
    SynthConfig cfg;
    std::vector<RgbImage> images;
    std::vector<FeatureMap> features;
    std::vector<ScalarMap> scores;  // ground truth + salt noise
    std::vector<Mask> truths;
    // matches[{i,j}] for i < j, flattened in pair order
    std::vector<std::pair<std::pair<int, int>, SparseMatches>> matches;
};

SynthScene generate_synth_scene(const SynthConfig& cfg);

// Writes images, features, score maps, truth masks, match files and the
// manifest into dir; returns the manifest.
SceneManifest write_synth_scene(const SynthScene& scene, const std::filesystem::path& dir);

}  // namespace crowdseg
