#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "crowdseg/pipeline.hpp"
#include "crowdseg/synth.hpp"

namespace {

// Exit codes: 0 success, 1 usage error, 2 data error.
constexpr int kUsageError = 1;
constexpr int kDataError = 2;

void add_config_flags(CLI::App* app, crowdseg::RunConfig& cfg, std::string& scope) {
    app->add_option("--alpha", cfg.alpha, "Mixture weight of the geometric delta (0..1)");
    app->add_option("--lambda", cfg.lambda, "Smoothness weight of the MRF");
    app->add_option("--k", cfg.k, "Number of appearance clusters");
    app->add_option("--beta", cfg.beta, "Cluster-distance weighting exponent");
    app->add_option("--bins", cfg.bins, "Number of score labels");
    app->add_option("--scope", scope, "Clustering scope: single or multi")
        ->check(CLI::IsMember({"single", "multi"}));
    app->add_flag("--ml", cfg.ml_only, "Unary-only estimator (same as --lambda 0)");
    app->add_option("--eps-log", cfg.eps_log, "Floor inside the unary log");
    app->add_option("--eps-grad", cfg.eps_grad, "Floor on gradient magnitude for edge weights");
    app->add_option("--seed", cfg.seed, "RNG seed");
    app->add_option("--stride", cfg.sample_stride, "K-means fitting subsample stride");
    app->add_option("--grid-size", cfg.grid_size, "Threshold grid resolution for evaluation");
    app->add_option("--jobs", cfg.jobs, "Images refined in parallel");
    app->add_option("--max-sweeps", cfg.max_sweeps, "Expansion sweep limit");
    app->add_option("--band", cfg.band, "Epipolar search band half-width, pixels");
    app->add_option("--step", cfg.step, "Epipolar sampling step, pixels");
    app->add_option("--tau", cfg.tau, "Feature distance mapping to score 1");
    app->add_option("--ransac-iters", cfg.ransac_iters, "RANSAC iterations");
    app->add_option("--ransac-thresh", cfg.ransac_threshold, "RANSAC Sampson inlier threshold");
}

void apply_scope(crowdseg::RunConfig& cfg, const std::string& scope) {
    if (scope == "single") cfg.scope = crowdseg::ClusterScope::SingleImage;
    else if (scope == "multi") cfg.scope = crowdseg::ClusterScope::MultiImage;
}

// CLI flags must win over manifest overrides, so flags the user actually set
// are re-applied after the manifest pass.
crowdseg::RunConfig layered_config(const CLI::App* cmd, const crowdseg::RunConfig& flag_cfg,
                                   const std::string& scope,
                                   const std::filesystem::path& manifest_path) {
    crowdseg::RunConfig cfg = crowdseg::apply_manifest_overrides(
        crowdseg::RunConfig{}, crowdseg::read_manifest(manifest_path).params);
    auto keep = [&](const std::string& flag, auto member) {
        if (cmd->count(flag) > 0) cfg.*member = flag_cfg.*member;
    };
    keep("--alpha", &crowdseg::RunConfig::alpha);
    keep("--lambda", &crowdseg::RunConfig::lambda);
    keep("--k", &crowdseg::RunConfig::k);
    keep("--beta", &crowdseg::RunConfig::beta);
    keep("--bins", &crowdseg::RunConfig::bins);
    keep("--ml", &crowdseg::RunConfig::ml_only);
    keep("--eps-log", &crowdseg::RunConfig::eps_log);
    keep("--eps-grad", &crowdseg::RunConfig::eps_grad);
    keep("--seed", &crowdseg::RunConfig::seed);
    keep("--stride", &crowdseg::RunConfig::sample_stride);
    keep("--grid-size", &crowdseg::RunConfig::grid_size);
    keep("--jobs", &crowdseg::RunConfig::jobs);
    keep("--max-sweeps", &crowdseg::RunConfig::max_sweeps);
    keep("--band", &crowdseg::RunConfig::band);
    keep("--step", &crowdseg::RunConfig::step);
    keep("--tau", &crowdseg::RunConfig::tau);
    keep("--ransac-iters", &crowdseg::RunConfig::ransac_iters);
    keep("--ransac-thresh", &crowdseg::RunConfig::ransac_threshold);
    if (cmd->count("--scope") > 0) apply_scope(cfg, scope);
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dynamic-region score map refinement for multi-view still image sets"};
    app.require_subcommand(1);

    crowdseg::RunConfig flag_cfg;
    std::string scope = "multi";
    std::filesystem::path manifest_path, out_dir = ".";

    // synth
    crowdseg::SynthConfig synth_cfg;
    auto* synth = app.add_subcommand("synth", "Generate a reproducible test scene");
    synth->add_option("--out-dir", out_dir, "Output directory")->required();
    synth->add_option("--size", synth_cfg.size, "Image side length");
    synth->add_option("--images", synth_cfg.image_count, "Number of images");
    synth->add_option("--square", synth_cfg.square, "Moving square side length");
    synth->add_option("--noise", synth_cfg.salt_noise, "Salt-noise fraction on score maps");
    synth->add_option("--seed", synth_cfg.seed, "RNG seed");
    synth->add_flag("--static-scene", synth_cfg.static_scene, "Generate without the moving square");

    // geoscore
    auto* geoscore = app.add_subcommand("geoscore", "Initial score maps from epipolar consistency");
    geoscore->add_option("--manifest", manifest_path, "Scene manifest")->required();
    geoscore->add_option("--out-dir", out_dir, "Output directory")->required();
    add_config_flags(geoscore, flag_cfg, scope);

    // refine
    crowdseg::RefineOutputOptions refine_opts;
    double threshold = -1;
    auto* refine = app.add_subcommand("refine", "Refine score maps with appearance + proximity");
    refine->add_option("--manifest", manifest_path, "Scene manifest")->required();
    refine->add_option("--out-dir", out_dir, "Output directory")->required();
    auto* thr_opt = refine->add_option("--threshold", threshold,
                                       "Also write binary masks at this threshold");
    refine->add_flag("--dump-pgm8,--dump-png8", refine_opts.dump_pgm8,
                     "Also write quantized 8-bit PGM previews");
    refine->add_flag("--dump-model", refine_opts.dump_model, "Dump the cluster model");
    refine->add_flag("--dump-debug", refine_opts.dump_debug, "Dump per-stage PDFs and labelings");
    add_config_flags(refine, flag_cfg, scope);

    // eval
    std::filesystem::path maps_dir, report_path;
    auto* eval = app.add_subcommand("eval", "Jaccard evaluation against ground-truth masks");
    eval->add_option("--manifest", manifest_path, "Scene manifest")->required();
    auto* maps_opt = eval->add_option("--maps-dir", maps_dir,
                                      "Directory of refined maps (default: evaluate the "
                                      "manifest's initial maps)");
    eval->add_option("--out", report_path, "Write the JSON report here");
    add_config_flags(eval, flag_cfg, scope);

    // sweep
    std::string parameter;
    std::vector<double> values;
    std::filesystem::path csv_path;
    auto* sweep = app.add_subcommand("sweep", "Refine+eval across parameter values");
    sweep->add_option("--manifest", manifest_path, "Scene manifest")->required();
    sweep->add_option("--param", parameter, "Parameter to sweep")
        ->required()
        ->check(CLI::IsMember({"alpha", "lambda", "k"}));
    sweep->add_option("--values", values, "Values to sweep")->required()->delimiter(',');
    auto* csv_opt = sweep->add_option("--out", csv_path, "Write the CSV here");
    add_config_flags(sweep, flag_cfg, scope);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kUsageError;
    }

    try {
        if (synth->parsed()) {
            auto scene = crowdseg::generate_synth_scene(synth_cfg);
            crowdseg::write_synth_scene(scene, out_dir);
            std::cout << "wrote scene '" << (synth_cfg.static_scene ? "synth-static" : "synth")
                      << "' (" << scene.images.size() << " images) to " << out_dir.string()
                      << "\n";
        } else if (geoscore->parsed()) {
            auto cfg = layered_config(geoscore, flag_cfg, scope, manifest_path);
            crowdseg::cmd_geoscore(manifest_path, cfg, out_dir, &std::cerr);
            std::cout << "wrote score maps to " << out_dir.string() << "\n";
        } else if (refine->parsed()) {
            auto cfg = layered_config(refine, flag_cfg, scope, manifest_path);
            if (thr_opt->count() > 0) refine_opts.threshold = threshold;
            crowdseg::cmd_refine(manifest_path, cfg, out_dir, refine_opts);
            std::cout << "wrote refined maps to " << out_dir.string() << "\n";
        } else if (eval->parsed()) {
            auto cfg = layered_config(eval, flag_cfg, scope, manifest_path);
            std::optional<std::filesystem::path> dir;
            if (maps_opt->count() > 0) dir = maps_dir;
            auto report = crowdseg::cmd_eval(manifest_path, cfg, dir);
            std::cout << crowdseg::report_table(report);
            if (!report_path.empty()) {
                std::ofstream out(report_path);
                if (!out) throw crowdseg::IoError(report_path.string() + ": cannot open for writing");
                out << crowdseg::report_json(report);
            }
        } else if (sweep->parsed()) {
            auto cfg = layered_config(sweep, flag_cfg, scope, manifest_path);
            std::optional<std::filesystem::path> csv;
            if (csv_opt->count() > 0) csv = csv_path;
            auto rows = crowdseg::cmd_sweep(manifest_path, cfg, parameter, values, csv);
            std::cout << crowdseg::sweep_csv(rows);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDataError;
    }
    return 0;
}
