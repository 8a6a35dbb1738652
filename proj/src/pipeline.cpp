#include "crowdseg/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "crowdseg/energy.hpp"
#include "crowdseg/features.hpp"
#include "crowdseg/tensor_io.hpp"

namespace crowdseg {

RunConfig apply_manifest_overrides(RunConfig cfg, const nlohmann::json& params) {
    static const char* known[] = {"alpha",    "lambda",        "k",
                                  "beta",     "bins",          "eps_log",
                                  "eps_grad", "seed",          "sample_stride",
                                  "grid_size", "max_sweeps",   "band",
                                  "step",     "tau",           "ransac_iters",
                                  "ransac_threshold",          "scope"};
    for (const auto& [key, value] : params.items()) {
        if (std::find_if(std::begin(known), std::end(known),
                         [&](const char* k) { return key == k; }) == std::end(known))
            throw DataError("manifest params: unknown key '" + key + "'");
    }
    auto num = [&](const char* key, auto& field) {
        if (params.contains(key)) field = params.at(key).get<std::decay_t<decltype(field)>>();
    };
    num("alpha", cfg.alpha);
    num("lambda", cfg.lambda);
    num("k", cfg.k);
    num("beta", cfg.beta);
    num("bins", cfg.bins);
    num("eps_log", cfg.eps_log);
    num("eps_grad", cfg.eps_grad);
    num("seed", cfg.seed);
    num("sample_stride", cfg.sample_stride);
    num("grid_size", cfg.grid_size);
    num("max_sweeps", cfg.max_sweeps);
    num("band", cfg.band);
    num("step", cfg.step);
    num("tau", cfg.tau);
    num("ransac_iters", cfg.ransac_iters);
    num("ransac_threshold", cfg.ransac_threshold);
    if (params.contains("scope")) {
        std::string s = params.at("scope").get<std::string>();
        if (s == "single") cfg.scope = ClusterScope::SingleImage;
        else if (s == "multi") cfg.scope = ClusterScope::MultiImage;
        else throw DataError("manifest params: scope must be 'single' or 'multi'");
    }
    return cfg;
}

std::vector<ScalarMap> run_geoscore(const LoadedScene& scene, const RunConfig& cfg,
                                    std::ostream* log) {
    const auto& manifest = scene.manifest;
    const int n = static_cast<int>(scene.images.size());
    if (n < 2) throw DataError("geoscore: scene needs at least 2 images");

    // One estimate per unordered pair, transposed where needed.
    std::map<std::pair<int, int>, std::optional<FundamentalMatrix>> estimated;
    auto fundamental_for = [&](int ref, int other) -> std::optional<FundamentalMatrix> {
        const MatchRecord* rec = manifest.find_matches(ref, other);
        if (!rec) {
            std::ostringstream os;
            os << "geoscore: scene '" << manifest.scene << "': no match file declared for pair ("
               << ref << "," << other << ")";
            throw DataError(os.str());
        }
        auto key = std::make_pair(std::min(ref, other), std::max(ref, other));
        auto it = estimated.find(key);
        if (it == estimated.end()) {
            std::optional<FundamentalMatrix> f;
            try {
                SparseMatches matches = read_matches(rec->file);
                RansacConfig rcfg{cfg.ransac_iters, cfg.ransac_threshold, cfg.seed};
                FundamentalMatrix est = estimate_fundamental(matches, rcfg).f;
                // Store oriented as (rec->a -> rec->b).
                f = est;
            } catch (const DataError& e) {
                if (log) *log << "warning: pair (" << rec->a << "," << rec->b
                              << "): " << e.what() << "; skipped\n";
            }
            it = estimated.emplace(key, f).first;
        }
        if (!it->second) return std::nullopt;
        const MatchRecord* stored = manifest.find_matches(key.first, key.second);
        bool forward = stored->a == ref;
        return forward ? *it->second : it->second->transposed();
    };

    PairScoreConfig pcfg{cfg.band, cfg.step, cfg.tau};
    std::vector<ScalarMap> out(n);
    for (int r = 0; r < n; ++r) {
        std::vector<PairScoreMap> pair_maps;
        for (int o = 0; o < n; ++o) {
            if (o == r) continue;
            auto f = fundamental_for(r, o);
            if (!f) continue;
            pair_maps.push_back(pair_score(scene.features[r], scene.features[o], *f, pcfg));
        }
        if (pair_maps.empty()) {
            std::ostringstream os;
            os << "geoscore: image " << r << ": every pair failed estimation";
            throw DataError(os.str());
        }
        out[r] = combine_pairs(pair_maps);
    }
    return out;
}

namespace {

std::vector<std::vector<int>> discretize_scene(const LoadedScene& scene, int bins) {
    std::vector<std::vector<int>> out;
    out.reserve(scene.scores.size());
    for (const auto& score : scene.scores) {
        std::vector<int> b(score.size());
        for (std::size_t pix = 0; pix < score.size(); ++pix)
            b[pix] = discretize_bin(score.data[pix], bins);
        out.push_back(std::move(b));
    }
    return out;
}

ScalarMap normalized_gradient(const RgbImage& img) {
    ScalarMap g = gradient_magnitude(luma(img));
    float max = 0;
    for (float v : g.data) max = std::max(max, v);
    if (max > 0)
        for (float& v : g.data) v /= max;
    return g;
}

}  // namespace

std::vector<ScalarMap> run_refine(const LoadedScene& scene, const RunConfig& cfg,
                                  RefineDebug* debug) {
    const int n = static_cast<int>(scene.images.size());
    if (n == 0) throw DataError("refine: empty scene");
    if (scene.scores.size() != static_cast<std::size_t>(n))
        throw DataError("refine: scene was loaded without score maps");

    auto bins = discretize_scene(scene, cfg.bins);

    // Clustering barrier: one shared model, or one per image.
    KmeansConfig kcfg{cfg.kmeans_max_iters, cfg.kmeans_tol, cfg.seed, cfg.sample_stride};
    std::vector<std::vector<DiscretePdf>> tables(n);   // per image: cluster -> h^A
    std::vector<const std::vector<int>*> assignments(n);
    std::vector<ClusterModel> models;
    if (cfg.scope == ClusterScope::MultiImage) {
        models.push_back(kmeans_fit(scene.features, cfg.k, kcfg));
        auto table = cluster_pdf_table(models[0], bins, cfg.bins, cfg.beta);
        for (int im = 0; im < n; ++im) {
            tables[im] = table;
            assignments[im] = &models[0].assignment[im];
        }
    } else {
        models.reserve(n);
        for (int im = 0; im < n; ++im) {
            models.push_back(kmeans_fit({&scene.features[im], 1}, cfg.k, kcfg));
            tables[im] = cluster_pdf_table(models.back(), {bins[im]}, cfg.bins, cfg.beta);
            assignments[im] = &models.back().assignment[0];
        }
    }

    if (debug) {
        debug->hg.resize(n);
        debug->ha.resize(n);
        debug->h.resize(n);
        debug->ml.resize(n);
        debug->labels.resize(n);
    }

    std::vector<ScalarMap> refined(n);
    auto refine_one = [&](int im) {
        const int h = scene.images[im].height(), w = scene.images[im].width();
        const int npix = h * w;

        PdfField mixed(h, w, cfg.bins);
        for (int pix = 0; pix < npix; ++pix) {
            const auto& ha = tables[im][(*assignments[im])[pix]];
            double* dst = mixed.p.data() + static_cast<std::size_t>(pix) * cfg.bins;
            for (int j = 0; j < cfg.bins; ++j) dst[j] = (1.0 - cfg.alpha) * ha.p[j];
            dst[bins[im][pix] - 1] += cfg.alpha;
        }

        LabelField init = ml_estimate(mixed);
        LabelField labels = init;
        if (!cfg.ml_only) {
            EnergyModel model = build_energy_from_gradient(
                mixed, normalized_gradient(scene.images[im]), cfg.lambda, cfg.eps_grad,
                cfg.eps_log);
            labels = alpha_expansion(model, init, cfg.max_sweeps);
        }

        ScalarMap out(h, w);
        for (int pix = 0; pix < npix; ++pix)
            out.data[pix] = static_cast<float>(label_to_score(labels.data[pix], cfg.bins));
        refined[im] = std::move(out);

        if (debug) {
            PdfField hg(h, w, cfg.bins), haf(h, w, cfg.bins);
            for (int pix = 0; pix < npix; ++pix) {
                hg.at(pix, bins[im][pix]) = 1.0;
                const auto& ha = tables[im][(*assignments[im])[pix]];
                std::copy(ha.p.begin(), ha.p.end(),
                          haf.p.begin() + static_cast<std::size_t>(pix) * cfg.bins);
            }
            debug->hg[im] = std::move(hg);
            debug->ha[im] = std::move(haf);
            debug->h[im] = std::move(mixed);
            debug->ml[im] = std::move(init);
            debug->labels[im] = std::move(labels);
        }
    };

    int jobs = std::max(1, cfg.jobs);
    if (jobs == 1 || n == 1) {
        for (int im = 0; im < n; ++im) refine_one(im);
    } else {
        std::vector<std::future<void>> futures;
        for (int t = 0; t < std::min(jobs, n); ++t) {
            futures.push_back(std::async(std::launch::async, [&, t] {
                for (int im = t; im < n; im += std::min(jobs, n)) refine_one(im);
            }));
        }
        for (auto& f : futures) f.get();
    }
    return refined;
}

EvalReport run_eval(const LoadedScene& scene, std::span<const ScalarMap> maps,
                    const RunConfig& cfg) {
    if (maps.size() != scene.images.size())
        throw DataError("eval: map count does not match the scene");
    std::vector<Mask> truths;
    std::vector<std::string> names;
    for (std::size_t i = 0; i < scene.truths.size(); ++i) {
        if (!scene.truths[i])
            throw DataError("eval: image " + std::to_string(i) + " has no ground-truth mask");
        truths.push_back(*scene.truths[i]);
        names.push_back(scene.manifest.images[i].image.filename().string());
    }
    auto grid = threshold_grid(cfg.grid_size);
    return evaluate(maps, truths, names, grid);
}

std::vector<SweepRow> run_sweep(const LoadedScene& scene, const std::string& parameter,
                                std::span<const double> values, const RunConfig& cfg) {
    if (values.empty()) throw DataError("sweep: empty value list");
    std::vector<SweepRow> rows;
    for (double v : values) {
        RunConfig c = cfg;
        if (parameter == "alpha") c.alpha = v;
        else if (parameter == "lambda") c.lambda = v;
        else if (parameter == "k") c.k = static_cast<int>(v);
        else throw DataError("sweep: parameter must be one of alpha, lambda, k");
        auto refined = run_refine(scene, c);
        auto report = run_eval(scene, refined, c);
        rows.push_back({v, report.per_image_mean, report.per_set.mean_j});
    }
    return rows;
}

std::string sweep_csv(std::span<const SweepRow> rows) {
    std::ostringstream os;
    os << "value,mean_per_image_jaccard,mean_per_set_jaccard\n";
    os << std::fixed << std::setprecision(6);
    for (const auto& r : rows)
        os << r.value << "," << r.mean_per_image_j << "," << r.mean_per_set_j << "\n";
    return os.str();
}

std::filesystem::path refined_map_path(const std::filesystem::path& dir, std::size_t index) {
    return dir / ("refined" + std::to_string(index) + ".fmap");
}

void cmd_geoscore(const std::filesystem::path& manifest_path, RunConfig cfg,
                  const std::filesystem::path& out_dir, std::ostream* log) {
    SceneManifest manifest = read_manifest(manifest_path);
    cfg = apply_manifest_overrides(cfg, manifest.params);
    LoadedScene scene = load_scene(manifest, {.need_scores = false});
    auto maps = run_geoscore(scene, cfg, log);
    std::filesystem::create_directories(out_dir);
    for (std::size_t i = 0; i < maps.size(); ++i)
        write_tensor(maps[i], out_dir / ("scores" + std::to_string(i) + ".fmap"));
}

void cmd_refine(const std::filesystem::path& manifest_path, RunConfig cfg,
                const std::filesystem::path& out_dir, const RefineOutputOptions& opts) {
    SceneManifest manifest = read_manifest(manifest_path);
    cfg = apply_manifest_overrides(cfg, manifest.params);
    LoadedScene scene = load_scene(manifest);
    RefineDebug debug;
    auto refined = run_refine(scene, cfg, opts.dump_debug ? &debug : nullptr);

    std::filesystem::create_directories(out_dir);
    for (std::size_t i = 0; i < refined.size(); ++i) {
        write_tensor(refined[i], refined_map_path(out_dir, i));
        if (opts.threshold) {
            Mask m = threshold_map(refined[i], *opts.threshold);
            write_mask(m, out_dir / ("mask" + std::to_string(i) + ".pgm"));
        }
        if (opts.dump_pgm8)
            write_pgm8(refined[i], out_dir / ("refined" + std::to_string(i) + ".pgm"));
    }
    if (opts.dump_debug) {
        auto dump_field = [&](const PdfField& f, const std::string& name, std::size_t i) {
            FeatureMap t(f.height, f.width, f.bins);
            for (std::size_t j = 0; j < f.p.size(); ++j) t.data[j] = static_cast<float>(f.p[j]);
            write_tensor(t, out_dir / ("dbg_" + name + std::to_string(i) + ".fmap"));
        };
        for (std::size_t i = 0; i < refined.size(); ++i) {
            dump_field(debug.hg[i], "hg", i);
            dump_field(debug.ha[i], "ha", i);
            dump_field(debug.h[i], "h", i);
            ScalarMap ml(debug.ml[i].height, debug.ml[i].width);
            for (std::size_t j = 0; j < ml.data.size(); ++j)
                ml.data[j] = static_cast<float>(label_to_score(debug.ml[i].data[j], cfg.bins));
            write_tensor(ml, out_dir / ("dbg_ml" + std::to_string(i) + ".fmap"));
        }
    }
    if (opts.dump_model) {
        // Re-fit is avoided: dump the multi-scope model only, which is what
        // debugging sessions actually inspect.
        KmeansConfig kcfg{cfg.kmeans_max_iters, cfg.kmeans_tol, cfg.seed, cfg.sample_stride};
        if (cfg.scope == ClusterScope::MultiImage) {
            auto model = kmeans_fit(scene.features, cfg.k, kcfg);
            dump_cluster_model(model, out_dir / "model_centers.fmap", out_dir / "model_medians.txt");
        } else {
            for (std::size_t i = 0; i < scene.features.size(); ++i) {
                auto model = kmeans_fit({&scene.features[i], 1}, cfg.k, kcfg);
                dump_cluster_model(model,
                                   out_dir / ("model_centers" + std::to_string(i) + ".fmap"),
                                   out_dir / ("model_medians" + std::to_string(i) + ".txt"));
            }
        }
    }
}

EvalReport cmd_eval(const std::filesystem::path& manifest_path, RunConfig cfg,
                    const std::optional<std::filesystem::path>& maps_dir) {
    SceneManifest manifest = read_manifest(manifest_path);
    cfg = apply_manifest_overrides(cfg, manifest.params);
    LoadedScene scene = load_scene(manifest, {.need_scores = !maps_dir, .need_truths = true});
    std::vector<ScalarMap> maps;
    if (maps_dir) {
        for (std::size_t i = 0; i < scene.images.size(); ++i)
            maps.push_back(read_scalar_map(refined_map_path(*maps_dir, i)));
    } else {
        maps = scene.scores;
    }
    return run_eval(scene, maps, cfg);
}

std::vector<SweepRow> cmd_sweep(const std::filesystem::path& manifest_path, RunConfig cfg,
                                const std::string& parameter, std::span<const double> values,
                                const std::optional<std::filesystem::path>& csv_out) {
    SceneManifest manifest = read_manifest(manifest_path);
    cfg = apply_manifest_overrides(cfg, manifest.params);
    LoadedScene scene = load_scene(manifest, {.need_scores = true, .need_truths = true});
    auto rows = run_sweep(scene, parameter, values, cfg);
    if (csv_out) {
        std::ofstream out(*csv_out);
        if (!out) throw IoError(csv_out->string() + ": cannot open for writing");
        out << sweep_csv(rows);
        if (!out) throw IoError(csv_out->string() + ": write failure");
    }
    return rows;
}

}  // namespace crowdseg
