#pragma once

#include <span>
#include <string>
#include <vector>

#include "crowdseg/grid.hpp"

namespace crowdseg {

// Dynamic where score > t, else Static.
Mask threshold_map(const ScalarMap& map, double t);

// Intersection-over-union of the Dynamic regions over pixels where truth is
// not DontCare. Empty union counts as perfect agreement (1.0). pred must
// not contain DontCare pixels.
double jaccard(const Mask& pred, const Mask& truth);

// size evenly spaced thresholds covering [0, 1].
std::vector<double> threshold_grid(int size);

struct BestThreshold {
    double t = 0;
    double j = 0;
};

// argmax of jaccard over the grid, ties to the smallest threshold.
BestThreshold best_per_image(const ScalarMap& map, const Mask& truth,
                             std::span<const double> grid);

struct SetThreshold {
    double t = 0;
    std::vector<double> per_image_j;
    double mean_j = 0;
};

// Single threshold maximizing the mean jaccard over the set, ties to the
// smallest threshold.
SetThreshold best_per_set(std::span<const ScalarMap> maps, std::span<const Mask> truths,
                          std::span<const double> grid);

struct EvalReport {
    std::vector<std::string> names;
    std::vector<BestThreshold> per_image;  // independent optimum per image
    double per_image_mean = 0;
    SetThreshold per_set;
    std::vector<double> grid;
};

EvalReport evaluate(std::span<const ScalarMap> maps, std::span<const Mask> truths,
                    std::span<const std::string> names, std::span<const double> grid);

// Aligned text table, one "per-image \ per-set" pair per image plus a mean row.
std::string report_table(const EvalReport& report);

// Deterministic JSON rendering.
std::string report_json(const EvalReport& report);

}  // namespace crowdseg
