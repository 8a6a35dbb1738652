#include <doctest.h>

#include <fstream>
#include <sstream>

#include "crowdseg/pipeline.hpp"
#include "crowdseg/synth.hpp"
#include "crowdseg/tensor_io.hpp"
#include "test_util.hpp"

using namespace crowdseg;

namespace {

// Small fast scene shared by the integration tests.
SynthConfig small_scene_cfg(bool static_scene = false) {
    SynthConfig cfg;
    cfg.size = 48;
    cfg.image_count = 3;
    cfg.square = 10;
    cfg.band_height = 12;
    cfg.seed = 19;
    cfg.static_scene = static_scene;
    return cfg;
}

RunConfig small_run_cfg() {
    RunConfig cfg;
    cfg.k = 60;  // plenty for a 48x48 desk scene, keeps tests quick
    cfg.lambda = 2.0;
    cfg.grid_size = 128;
    return cfg;
}

}  // namespace

TEST_CASE("manifest io and validation") {
    testutil::TempDir dir("manifest");
    auto scene = generate_synth_scene(small_scene_cfg());
    SceneManifest manifest = write_synth_scene(scene, dir.path());

    SUBCASE("round-trips through json") {
        SceneManifest back = read_manifest(dir.path() / "manifest.json");
        CHECK(back.scene == "synth");
        CHECK(back.images.size() == 3);
        CHECK(back.matches.size() == 3);
        CHECK(back.params.at("lambda").get<double>() == doctest::Approx(2.0));
        CHECK(back.find_matches(0, 1) != nullptr);
        CHECK(back.find_matches(1, 0) != nullptr);
        CHECK(back.find_matches(0, 0) == nullptr);
    }

    SUBCASE("loads with consistent dimensions") {
        LoadedScene loaded = load_scene(manifest, {.need_scores = true, .need_truths = true});
        CHECK(loaded.images.size() == 3);
        CHECK(loaded.features[0].depth == 4);
        CHECK(loaded.scores[0].height == 48);
    }

    SUBCASE("mismatched score map is reported with its path") {
        write_tensor(ScalarMap(4, 4, 0.0f), manifest.images[1].scores);
        CHECK_THROWS_WITH_AS(load_scene(manifest),
                             doctest::Contains("scores1.fmap"), DataError);
    }

    SUBCASE("invalid json is a data error") {
        std::ofstream(dir.path() / "broken.json") << "{ not json";
        CHECK_THROWS_AS(read_manifest(dir.path() / "broken.json"), DataError);
    }

    SUBCASE("manifest overrides feed the run config") {
        RunConfig cfg = apply_manifest_overrides(RunConfig{}, manifest.params);
        CHECK(cfg.lambda == doctest::Approx(2.0));
        CHECK(cfg.alpha == doctest::Approx(0.2));  // untouched default
    }

    SUBCASE("unknown manifest params are rejected") {
        nlohmann::json params = {{"lamda", 3.0}};
        CHECK_THROWS_WITH_AS(apply_manifest_overrides(RunConfig{}, params),
                             doctest::Contains("lamda"), DataError);
    }
}

TEST_CASE("geoscore on synthetic scenes") {
    testutil::TempDir dir("geo");

    SUBCASE("static scene scores near zero everywhere") {
        auto scene = generate_synth_scene(small_scene_cfg(true));
        write_synth_scene(scene, dir.path());
        LoadedScene loaded =
            load_scene(read_manifest(dir.path() / "manifest.json"), {.need_scores = false});
        auto maps = run_geoscore(loaded, small_run_cfg());
        REQUIRE(maps.size() == 3);
        double mean = 0;
        float peak = 0;
        std::size_t count = 0;
        for (const auto& m : maps) {
            for (float v : m.data) {
                mean += v;
                peak = std::max(peak, v);
            }
            count += m.size();
        }
        mean /= static_cast<double>(count);
        CHECK(mean < 0.05);
        CHECK(peak < 0.5);  // no pixel of a static scene looks confidently dynamic
    }

    SUBCASE("moving square stands out against the background") {
        auto scene = generate_synth_scene(small_scene_cfg(false));
        write_synth_scene(scene, dir.path());
        LoadedScene loaded =
            load_scene(read_manifest(dir.path() / "manifest.json"), {.need_scores = false});
        auto maps = run_geoscore(loaded, small_run_cfg());
        double patch = 0, bg = 0;
        std::size_t patch_n = 0, bg_n = 0;
        for (std::size_t i = 0; i < maps.size(); ++i) {
            for (std::size_t pix = 0; pix < maps[i].size(); ++pix) {
                if (scene.truths[i].data[pix] == PixelClass::Dynamic) {
                    patch += maps[i].data[pix];
                    ++patch_n;
                } else {
                    bg += maps[i].data[pix];
                    ++bg_n;
                }
            }
        }
        patch /= static_cast<double>(patch_n);
        bg /= static_cast<double>(bg_n);
        CHECK(patch - bg >= 0.3);
    }

    SUBCASE("missing match file names the pair") {
        auto scene = generate_synth_scene(small_scene_cfg());
        SceneManifest manifest = write_synth_scene(scene, dir.path());
        manifest.matches.erase(manifest.matches.begin());  // drop pair (0,1)
        LoadedScene loaded = load_scene(manifest, {.need_scores = false});
        CHECK_THROWS_WITH_AS(run_geoscore(loaded, small_run_cfg()),
                             doctest::Contains("(0,1)"), DataError);
    }

    SUBCASE("geometric scoring needs at least two images") {
        auto scene = generate_synth_scene(small_scene_cfg());
        SceneManifest manifest = write_synth_scene(scene, dir.path());
        manifest.images.resize(1);
        manifest.matches.clear();
        LoadedScene loaded = load_scene(manifest, {.need_scores = false});
        CHECK_THROWS_WITH_AS(run_geoscore(loaded, small_run_cfg()),
                             doctest::Contains("at least 2 images"), DataError);
    }
}

TEST_CASE("refine identity paths") {
    testutil::TempDir dir("refine_id");
    auto scene = generate_synth_scene(small_scene_cfg());
    write_synth_scene(scene, dir.path());
    LoadedScene loaded = load_scene(read_manifest(dir.path() / "manifest.json"));

    SUBCASE("alpha 1, lambda 0 returns midpoint-quantized inputs") {
        RunConfig cfg = small_run_cfg();
        cfg.alpha = 1.0;
        cfg.lambda = 0.0;
        auto refined = run_refine(loaded, cfg);
        for (std::size_t i = 0; i < refined.size(); ++i) {
            for (std::size_t pix = 0; pix < refined[i].size(); ++pix) {
                double s = loaded.scores[i].data[pix];
                double expect = label_to_score(discretize_bin(s, cfg.bins), cfg.bins);
                CHECK(refined[i].data[pix] == doctest::Approx(expect).epsilon(1e-7));
                CHECK(std::abs(refined[i].data[pix] - s) <= 0.5 / cfg.bins + 1e-7);
            }
        }
    }

    SUBCASE("--ml equals lambda 0") {
        RunConfig ml_cfg = small_run_cfg();
        ml_cfg.ml_only = true;
        RunConfig zero_cfg = small_run_cfg();
        zero_cfg.lambda = 0.0;
        auto a = run_refine(loaded, ml_cfg);
        auto b = run_refine(loaded, zero_cfg);
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].data == b[i].data);
    }

    SUBCASE("debug dump exposes valid pdfs") {
        RunConfig cfg = small_run_cfg();
        RefineDebug debug;
        run_refine(loaded, cfg, &debug);
        REQUIRE(debug.h.size() == loaded.images.size());
        for (const auto& field : {debug.hg[0], debug.ha[0], debug.h[0]}) {
            for (int pix = 0; pix < field.pixels(); ++pix) {
                double sum = 0;
                for (int m = 1; m <= field.bins; ++m) {
                    CHECK(field.at(pix, m) >= 0.0);
                    sum += field.at(pix, m);
                }
                CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("refinement beats the noisy input on the synthetic scene") {
    testutil::TempDir dir("refine_gain");
    auto scene = generate_synth_scene(small_scene_cfg());
    write_synth_scene(scene, dir.path());
    LoadedScene loaded =
        load_scene(read_manifest(dir.path() / "manifest.json"), {.need_scores = true,
                                                                 .need_truths = true});
    RunConfig cfg = small_run_cfg();
    auto refined = run_refine(loaded, cfg);
    EvalReport before = run_eval(loaded, loaded.scores, cfg);
    EvalReport after = run_eval(loaded, refined, cfg);
    CHECK(after.per_set.mean_j > before.per_set.mean_j);
    CHECK(after.per_image_mean > before.per_image_mean);
}

TEST_CASE("jobs do not change the result") {
    testutil::TempDir dir("jobs");
    auto scene = generate_synth_scene(small_scene_cfg());
    write_synth_scene(scene, dir.path());
    LoadedScene loaded = load_scene(read_manifest(dir.path() / "manifest.json"));
    RunConfig serial = small_run_cfg();
    RunConfig parallel = small_run_cfg();
    parallel.jobs = 3;
    auto a = run_refine(loaded, serial);
    auto b = run_refine(loaded, parallel);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].data == b[i].data);
}

TEST_CASE("file-level commands") {
    testutil::TempDir dir("cmd");
    auto scene = generate_synth_scene(small_scene_cfg());
    write_synth_scene(scene, dir.path());
    auto manifest_path = dir.path() / "manifest.json";
    RunConfig cfg = small_run_cfg();

    SUBCASE("cmd_refine writes maps, masks and previews") {
        RefineOutputOptions opts;
        opts.threshold = 0.5;
        opts.dump_pgm8 = true;
        cmd_refine(manifest_path, cfg, dir.path() / "out", opts);
        CHECK(std::filesystem::exists(refined_map_path(dir.path() / "out", 0)));
        CHECK(std::filesystem::exists(dir.path() / "out" / "mask0.pgm"));
        CHECK(std::filesystem::exists(dir.path() / "out" / "refined0.pgm"));
        ScalarMap m = read_scalar_map(refined_map_path(dir.path() / "out", 2));
        CHECK(m.height == 48);
    }

    SUBCASE("two refine runs are byte identical") {
        cmd_refine(manifest_path, cfg, dir.path() / "a");
        cmd_refine(manifest_path, cfg, dir.path() / "b");
        for (int i = 0; i < 3; ++i) {
            std::ifstream fa(refined_map_path(dir.path() / "a", i), std::ios::binary);
            std::ifstream fb(refined_map_path(dir.path() / "b", i), std::ios::binary);
            std::stringstream sa, sb;
            sa << fa.rdbuf();
            sb << fb.rdbuf();
            CHECK(sa.str() == sb.str());
            CHECK(!sa.str().empty());
        }
    }

    SUBCASE("cmd_eval on refined maps and on the initial maps") {
        cmd_refine(manifest_path, cfg, dir.path() / "out");
        EvalReport refined = cmd_eval(manifest_path, cfg, dir.path() / "out");
        EvalReport initial = cmd_eval(manifest_path, cfg, std::nullopt);
        CHECK(refined.per_set.mean_j >= initial.per_set.mean_j);
        CHECK(refined.per_image_mean >= refined.per_set.mean_j);
    }

    SUBCASE("cmd_sweep emits one row per value and matches refine+eval") {
        std::vector<double> values = {0.2};
        auto rows = cmd_sweep(manifest_path, cfg, "alpha", values, dir.path() / "sweep.csv");
        REQUIRE(rows.size() == 1);

        cmd_refine(manifest_path, cfg, dir.path() / "out");
        EvalReport direct = cmd_eval(manifest_path, cfg, dir.path() / "out");
        CHECK(rows[0].mean_per_image_j == doctest::Approx(direct.per_image_mean));
        CHECK(rows[0].mean_per_set_j == doctest::Approx(direct.per_set.mean_j));

        std::ifstream csv(dir.path() / "sweep.csv");
        std::string line;
        int lines = 0;
        while (std::getline(csv, line)) ++lines;
        CHECK(lines == 2);  // header + one row

        CHECK_THROWS_AS(cmd_sweep(manifest_path, cfg, "gamma", values, std::nullopt), DataError);
        CHECK_THROWS_AS(cmd_sweep(manifest_path, cfg, "alpha", {}, std::nullopt), DataError);
    }

    SUBCASE("cmd_geoscore writes one map per image") {
        cmd_geoscore(manifest_path, cfg, dir.path() / "geo");
        for (int i = 0; i < 3; ++i)
            CHECK(std::filesystem::exists(dir.path() / "geo" / ("scores" + std::to_string(i) +
                                                                ".fmap")));
    }
}
