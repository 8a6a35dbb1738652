#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crowdseg/grid.hpp"

namespace crowdseg {

// One image record of a scene. Paths are stored resolved against the
// manifest's directory.
struct ImageRecord {
    std::filesystem::path image;
    std::filesystem::path features;
    std::filesystem::path scores;
    std::optional<std::filesystem::path> truth;
};

struct MatchRecord {
    int a = 0;
    int b = 0;
    std::filesystem::path file;
};

// Declaration of an image set. JSON schema (all paths relative to the
// manifest file):
//
//   {
//     "scene": "name",
//     "feature_scale": 1,
//     "images": [
//       {"image": "im0.ppm", "features": "feat0.fmap",
//        "scores": "scores0.fmap", "truth": "truth0.pgm"}
//     ],
//     "matches": [{"a": 0, "b": 1, "file": "matches_0_1.txt"}],
//     "params": {"lambda": 2.0}
//   }
//
// feature_scale declares that feature maps are 1/scale the image resolution
// and are upsampled (nearest neighbour) on load; 1 means pre-resized.
// params carries per-scene overrides of the run configuration, applied
// between built-in defaults and command-line flags.
struct SceneManifest {
    std::string scene;
    int feature_scale = 1;
    std::vector<ImageRecord> images;
    std::vector<MatchRecord> matches;
    nlohmann::json params = nlohmann::json::object();
    std::filesystem::path base_dir;

    // Match file for the unordered pair {a, b}, if declared.
    const MatchRecord* find_matches(int a, int b) const;
};

SceneManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const SceneManifest& manifest, const std::filesystem::path& path);

// Fully loaded scene data, validated against the manifest invariants.
struct LoadedScene {
    SceneManifest manifest;
    std::vector<RgbImage> images;
    std::vector<FeatureMap> features;     // upsampled to image resolution
    std::vector<ScalarMap> scores;        // empty when load skips them
    std::vector<std::optional<Mask>> truths;
};

struct LoadOptions {
    bool need_scores = true;
    bool need_truths = false;
};

LoadedScene load_scene(const SceneManifest& manifest, const LoadOptions& opts = {});

}  // namespace crowdseg
