#include "crowdseg/eval.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

namespace crowdseg {

Mask threshold_map(const ScalarMap& map, double t) {
    Mask out(map.height, map.width);
    for (std::size_t i = 0; i < map.data.size(); ++i)
        out.data[i] = map.data[i] > t ? PixelClass::Dynamic : PixelClass::Static;
    return out;
}

double jaccard(const Mask& pred, const Mask& truth) {
    if (pred.height != truth.height || pred.width != truth.width)
        throw DataError("jaccard: dimension mismatch");
    std::size_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < pred.data.size(); ++i) {
        if (truth.data[i] == PixelClass::DontCare) continue;
        if (pred.data[i] == PixelClass::DontCare)
            throw DataError("jaccard: prediction contains DontCare pixels");
        bool p = pred.data[i] == PixelClass::Dynamic;
        bool t = truth.data[i] == PixelClass::Dynamic;
        if (p && t) ++inter;
        if (p || t) ++uni;
    }
    if (uni == 0) return 1.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<double> threshold_grid(int size) {
    if (size < 2) throw DataError("threshold_grid: need at least 2 thresholds");
    std::vector<double> out(size);
    for (int i = 0; i < size; ++i) out[i] = static_cast<double>(i) / (size - 1);
    return out;
}

BestThreshold best_per_image(const ScalarMap& map, const Mask& truth,
                             std::span<const double> grid) {
    if (grid.empty()) throw DataError("best_per_image: empty threshold grid");
    BestThreshold best{grid[0], -1.0};
    for (double t : grid) {
        double j = jaccard(threshold_map(map, t), truth);
        if (j > best.j) best = {t, j};
    }
    return best;
}

SetThreshold best_per_set(std::span<const ScalarMap> maps, std::span<const Mask> truths,
                          std::span<const double> grid) {
    if (maps.size() != truths.size()) throw DataError("best_per_set: map/truth count mismatch");
    if (maps.empty()) throw DataError("best_per_set: empty set");
    if (grid.empty()) throw DataError("best_per_set: empty threshold grid");

    SetThreshold best;
    best.mean_j = -1.0;
    std::vector<double> js(maps.size());
    for (double t : grid) {
        double sum = 0;
        for (std::size_t i = 0; i < maps.size(); ++i) {
            js[i] = jaccard(threshold_map(maps[i], t), truths[i]);
            sum += js[i];
        }
        double mean = sum / static_cast<double>(maps.size());
        if (mean > best.mean_j) {
            best.t = t;
            best.per_image_j = js;
            best.mean_j = mean;
        }
    }
    return best;
}

EvalReport evaluate(std::span<const ScalarMap> maps, std::span<const Mask> truths,
                    std::span<const std::string> names, std::span<const double> grid) {
    if (maps.size() != names.size()) throw DataError("evaluate: map/name count mismatch");
    EvalReport report;
    report.names.assign(names.begin(), names.end());
    report.grid.assign(grid.begin(), grid.end());
    double sum = 0;
    for (std::size_t i = 0; i < maps.size(); ++i) {
        report.per_image.push_back(best_per_image(maps[i], truths[i], grid));
        sum += report.per_image.back().j;
    }
    report.per_image_mean = sum / static_cast<double>(maps.size());
    report.per_set = best_per_set(maps, truths, grid);
    return report;
}

std::string report_table(const EvalReport& report) {
    std::size_t name_w = 5;
    for (const auto& n : report.names) name_w = std::max(name_w, n.size());
    std::ostringstream os;
    os << std::fixed << std::setprecision(4);
    os << std::setw(static_cast<int>(name_w)) << std::left << "image" << std::right
       << "   J per-image \\ per-set    t per-image\n";
    for (std::size_t i = 0; i < report.names.size(); ++i) {
        os << std::setw(static_cast<int>(name_w)) << std::left << report.names[i] << std::right
           << "        " << report.per_image[i].j << " \\ " << report.per_set.per_image_j[i]
           << "         " << report.per_image[i].t << "\n";
    }
    os << std::setw(static_cast<int>(name_w)) << std::left << "mean" << std::right << "        "
       << report.per_image_mean << " \\ " << report.per_set.mean_j
       << "    (set threshold " << report.per_set.t << ")\n";
    return os.str();
}

std::string report_json(const EvalReport& report) {
    nlohmann::json j;
    j["per_set"] = {{"threshold", report.per_set.t},
                    {"mean_jaccard", report.per_set.mean_j},
                    {"per_image_jaccard", report.per_set.per_image_j}};
    j["per_image_mean"] = report.per_image_mean;
    nlohmann::json images = nlohmann::json::array();
    for (std::size_t i = 0; i < report.names.size(); ++i) {
        images.push_back({{"name", report.names[i]},
                          {"best_threshold", report.per_image[i].t},
                          {"best_jaccard", report.per_image[i].j},
                          {"jaccard_at_set_threshold", report.per_set.per_image_j[i]}});
    }
    j["images"] = images;
    j["threshold_grid_size"] = report.grid.size();
    return j.dump(2) + "\n";
}

}  // namespace crowdseg
