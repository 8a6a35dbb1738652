#include <doctest.h>

#include "crowdseg/eval.hpp"
#include "crowdseg/rng.hpp"

using namespace crowdseg;

namespace {

Mask mask_from(std::initializer_list<int> vals, int h, int w) {
    Mask m(h, w);
    int i = 0;
    for (int v : vals) m.data[i++] = static_cast<PixelClass>(v);
    return m;
}

}  // namespace

TEST_CASE("jaccard") {
    SUBCASE("identical masks score 1") {
        Mask a = mask_from({1, 0, 1, 0}, 2, 2);
        CHECK(jaccard(a, a) == 1.0);
    }
    SUBCASE("disjoint non-empty masks score 0") {
        Mask a = mask_from({1, 0, 0, 0}, 2, 2);
        Mask b = mask_from({0, 0, 0, 1}, 2, 2);
        CHECK(jaccard(a, b) == 0.0);
    }
    SUBCASE("two vs two with one overlap is one third") {
        Mask pred = mask_from({1, 1, 0, 0}, 2, 2);
        Mask truth = mask_from({0, 1, 1, 0}, 2, 2);
        CHECK(jaccard(pred, truth) == doctest::Approx(1.0 / 3.0));
    }
    SUBCASE("dont-care pixels are excluded from both counts") {
        Mask pred = mask_from({1, 1, 0, 0}, 2, 2);
        Mask truth = mask_from({2, 1, 1, 0}, 2, 2);  // first pixel ignored
        CHECK(jaccard(pred, truth) == doctest::Approx(0.5));
    }
    SUBCASE("empty union counts as perfect agreement") {
        Mask a = mask_from({0, 0, 0, 0}, 2, 2);
        CHECK(jaccard(a, a) == 1.0);
    }
    SUBCASE("symmetric when no dont-care present") {
        Rng rng(1);
        for (int trial = 0; trial < 50; ++trial) {
            Mask a(3, 3), b(3, 3);
            for (auto& v : a.data) v = rng.uniform() < 0.5 ? PixelClass::Dynamic : PixelClass::Static;
            for (auto& v : b.data) v = rng.uniform() < 0.5 ? PixelClass::Dynamic : PixelClass::Static;
            CHECK(jaccard(a, b) == jaccard(b, a));
        }
    }
    SUBCASE("prediction with dont-care rejected") {
        Mask pred = mask_from({2, 0, 0, 0}, 2, 2);
        Mask truth = mask_from({0, 0, 0, 0}, 2, 2);
        CHECK_THROWS_AS(jaccard(pred, truth), DataError);
    }
    SUBCASE("dimension mismatch rejected") {
        CHECK_THROWS_AS(jaccard(Mask(2, 2), Mask(2, 3)), DataError);
    }
}

TEST_CASE("threshold_map") {
    ScalarMap m(1, 2);
    m.data = {0.2f, 0.7f};
    SUBCASE("t=1 leaves everything static") {
        Mask out = threshold_map(m, 1.0);
        CHECK(out.data[0] == PixelClass::Static);
        CHECK(out.data[1] == PixelClass::Static);
    }
    SUBCASE("negative t marks everything dynamic") {
        Mask out = threshold_map(m, -0.1);
        CHECK(out.data[0] == PixelClass::Dynamic);
        CHECK(out.data[1] == PixelClass::Dynamic);
    }
    SUBCASE("strict comparison at 0.5") {
        Mask out = threshold_map(m, 0.5);
        CHECK(out.data[0] == PixelClass::Static);
        CHECK(out.data[1] == PixelClass::Dynamic);
    }
    SUBCASE("dynamic region shrinks monotonically in t") {
        Rng rng(2);
        ScalarMap r(4, 4);
        for (auto& v : r.data) v = static_cast<float>(rng.uniform());
        int prev = 17;
        for (double t : threshold_grid(16)) {
            Mask out = threshold_map(r, t);
            int count = 0;
            for (auto v : out.data) count += v == PixelClass::Dynamic;
            CHECK(count <= prev);
            prev = count;
        }
    }
}

TEST_CASE("per-image threshold selection") {
    auto grid = threshold_grid(256);

    SUBCASE("perfect map reaches jaccard 1") {
        ScalarMap m(2, 2);
        m.data = {1.0f, 0.0f, 0.0f, 1.0f};
        Mask truth = mask_from({1, 0, 0, 1}, 2, 2);
        BestThreshold best = best_per_image(m, truth, grid);
        CHECK(best.j == 1.0);
        // every interior grid threshold also separates perfectly
        CHECK(jaccard(threshold_map(m, 0.5), truth) == 1.0);
    }
    SUBCASE("matches an exhaustive sweep on random maps") {
        Rng rng(3);
        for (int trial = 0; trial < 10; ++trial) {
            ScalarMap m(4, 4);
            for (auto& v : m.data) v = static_cast<float>(rng.uniform());
            Mask truth(4, 4);
            for (auto& v : truth.data)
                v = rng.uniform() < 0.4 ? PixelClass::Dynamic : PixelClass::Static;
            BestThreshold best = best_per_image(m, truth, grid);
            double oracle = -1, oracle_t = -1;
            for (double t : grid) {
                double j = jaccard(threshold_map(m, t), truth);
                if (j > oracle) {
                    oracle = j;
                    oracle_t = t;
                }
            }
            CHECK(best.j == oracle);
            CHECK(best.t == oracle_t);  // ties to the smallest threshold
        }
    }
}

TEST_CASE("per-set threshold selection") {
    auto grid = threshold_grid(256);
    Rng rng(4);

    std::vector<ScalarMap> maps;
    std::vector<Mask> truths;
    for (int i = 0; i < 3; ++i) {
        ScalarMap m(4, 4);
        for (auto& v : m.data) v = static_cast<float>(rng.uniform());
        maps.push_back(m);
        Mask t(4, 4);
        for (auto& v : t.data) v = rng.uniform() < 0.4 ? PixelClass::Dynamic : PixelClass::Static;
        truths.push_back(t);
    }

    SUBCASE("single image set reduces to per-image choice") {
        SetThreshold set = best_per_set({maps.data(), 1}, {truths.data(), 1}, grid);
        BestThreshold img = best_per_image(maps[0], truths[0], grid);
        CHECK(set.t == img.t);
        CHECK(set.mean_j == img.j);
    }
    SUBCASE("chosen threshold maximizes the mean over the grid") {
        SetThreshold set = best_per_set(maps, truths, grid);
        for (double t : grid) {
            double mean = 0;
            for (std::size_t i = 0; i < maps.size(); ++i)
                mean += jaccard(threshold_map(maps[i], t), truths[i]);
            mean /= static_cast<double>(maps.size());
            CHECK(set.mean_j >= mean);
        }
    }
    SUBCASE("per-image optima dominate the shared threshold") {
        SetThreshold set = best_per_set(maps, truths, grid);
        double mean_opt = 0;
        for (std::size_t i = 0; i < maps.size(); ++i)
            mean_opt += best_per_image(maps[i], truths[i], grid).j;
        mean_opt /= static_cast<double>(maps.size());
        CHECK(mean_opt >= set.mean_j);
        // and per image, the free optimum beats the shared threshold
        for (std::size_t i = 0; i < maps.size(); ++i)
            CHECK(best_per_image(maps[i], truths[i], grid).j >= set.per_image_j[i]);
    }
    SUBCASE("list mismatch rejected") {
        CHECK_THROWS_AS(best_per_set(maps, {truths.data(), 2}, grid), DataError);
    }
}

TEST_CASE("evaluate produces a consistent report") {
    Rng rng(5);
    std::vector<ScalarMap> maps;
    std::vector<Mask> truths;
    std::vector<std::string> names;
    for (int i = 0; i < 2; ++i) {
        ScalarMap m(3, 3);
        for (auto& v : m.data) v = static_cast<float>(rng.uniform());
        maps.push_back(m);
        Mask t(3, 3);
        for (auto& v : t.data) v = rng.uniform() < 0.5 ? PixelClass::Dynamic : PixelClass::Static;
        truths.push_back(t);
        names.push_back("im" + std::to_string(i));
    }
    auto grid = threshold_grid(64);
    EvalReport report = evaluate(maps, truths, names, grid);
    CHECK(report.per_image.size() == 2);
    CHECK(report.per_image_mean >= report.per_set.mean_j);
    for (auto& b : report.per_image) {
        CHECK(b.j >= 0.0);
        CHECK(b.j <= 1.0);
    }

    std::string table = report_table(report);
    CHECK(table.find("\\") != std::string::npos);
    CHECK(table.find("im0") != std::string::npos);

    std::string json = report_json(report);
    CHECK(json.find("per_set") != std::string::npos);
    // repeated rendering is byte-identical
    CHECK(json == report_json(report));
}
