#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

#include "crowdseg/clustering.hpp"
#include "crowdseg/eval.hpp"
#include "crowdseg/manifest.hpp"
#include "crowdseg/pair_score.hpp"

namespace crowdseg {

// Run configuration. Defaults follow the reference operating point:
// alpha 0.2, lambda 450, K 600, beta 0.3, 30 bins.
struct RunConfig {
    double alpha = 0.2;
    double lambda = 450.0;
    int k = 600;
    double beta = 0.3;
    int bins = 30;
    ClusterScope scope = ClusterScope::MultiImage;
    bool ml_only = false;  // unary-only estimator (equivalent to lambda = 0)
    double eps_log = 1e-8;
    double eps_grad = 0.01;
    std::uint64_t seed = 1;
    int sample_stride = 1;
    int grid_size = 256;
    int jobs = 1;
    int max_sweeps = 10;
    int kmeans_max_iters = 40;
    double kmeans_tol = 1e-6;
    // geometric scoring
    int band = 1;
    double step = 1.0;
    double tau = 0.5;
    int ransac_iters = 500;
    double ransac_threshold = 1.5;
};

// Manifest "params" overrides sit between built-in defaults and CLI flags.
RunConfig apply_manifest_overrides(RunConfig cfg, const nlohmann::json& params);

// Initial score maps from epipolar consistency, one per image. Pairs whose
// fundamental matrix cannot be estimated are reported to `log` and dropped
// from the combination.
std::vector<ScalarMap> run_geoscore(const LoadedScene& scene, const RunConfig& cfg,
                                    std::ostream* log = nullptr);

// Optional per-stage intermediates of a refine run.
struct RefineDebug {
    std::vector<PdfField> hg, ha, h;
    std::vector<LabelField> ml;
    std::vector<LabelField> labels;
};

// Full refinement: discretize, cluster per scope, appearance PDFs, mixture,
// MRF (or unary-only argmax with ml_only), labels back to score maps.
std::vector<ScalarMap> run_refine(const LoadedScene& scene, const RunConfig& cfg,
                                  RefineDebug* debug = nullptr);

EvalReport run_eval(const LoadedScene& scene, std::span<const ScalarMap> maps,
                    const RunConfig& cfg);

struct SweepRow {
    double value = 0;
    double mean_per_image_j = 0;
    double mean_per_set_j = 0;
};

// One refine + eval per value of the swept parameter ("alpha", "lambda" or "k").
std::vector<SweepRow> run_sweep(const LoadedScene& scene, const std::string& parameter,
                                std::span<const double> values, const RunConfig& cfg);

std::string sweep_csv(std::span<const SweepRow> rows);

// ---- file-level commands (the CLI subcommands call straight into these) ----

struct RefineOutputOptions {
    std::optional<double> threshold;  // also emit binary masks at this threshold
    bool dump_pgm8 = false;
    bool dump_model = false;
    bool dump_debug = false;
};

void cmd_geoscore(const std::filesystem::path& manifest_path, RunConfig cfg,
                  const std::filesystem::path& out_dir, std::ostream* log = nullptr);

void cmd_refine(const std::filesystem::path& manifest_path, RunConfig cfg,
                const std::filesystem::path& out_dir, const RefineOutputOptions& opts = {});

EvalReport cmd_eval(const std::filesystem::path& manifest_path, RunConfig cfg,
                    const std::optional<std::filesystem::path>& maps_dir);

std::vector<SweepRow> cmd_sweep(const std::filesystem::path& manifest_path, RunConfig cfg,
                                const std::string& parameter, std::span<const double> values,
                                const std::optional<std::filesystem::path>& csv_out);

// Refined-map path convention used by cmd_refine / cmd_eval.
std::filesystem::path refined_map_path(const std::filesystem::path& dir, std::size_t index);

}  // namespace crowdseg
