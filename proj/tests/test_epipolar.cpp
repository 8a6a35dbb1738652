#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <fstream>

#include "crowdseg/epipolar.hpp"
#include "crowdseg/rng.hpp"
#include "test_util.hpp"

using namespace crowdseg;

namespace {

Eigen::Matrix3d cross_matrix(const Eigen::Vector3d& t) {
    Eigen::Matrix3d m;
    m << 0, -t.z(), t.y(), t.z(), 0, -t.x(), -t.y(), t.x(), 0;
    return m;
}

struct Rig {
    Eigen::Matrix3d rotation;
    Eigen::Vector3d translation;
    Eigen::Matrix3d k;

    // Ground-truth fundamental matrix for cameras P0 = K[I|0], P1 = K[R|t].
    FundamentalMatrix truth() const {
        Eigen::Matrix3d kinv = k.inverse();
        Eigen::Matrix3d f = kinv.transpose() * cross_matrix(translation) * rotation * kinv;
        return normalize_fundamental(f);
    }

    PointMatch project(const Eigen::Vector3d& point) const {
        Eigen::Vector3d p0 = k * point;
        Eigen::Vector3d p1 = k * (rotation * point + translation);
        return {p0.x() / p0.z(), p0.y() / p0.z(), p1.x() / p1.z(), p1.y() / p1.z()};
    }
};

Rig generic_rig() {
    Rig rig;
    double angle = 0.15;
    rig.rotation = Eigen::AngleAxisd(angle, Eigen::Vector3d(0.2, 1.0, 0.1).normalized())
                       .toRotationMatrix();
    rig.translation = Eigen::Vector3d(1.0, 0.15, 0.3);
    rig.k << 400, 0, 320, 0, 400, 240, 0, 0, 1;
    return rig;
}

SparseMatches project_cloud(const Rig& rig, Rng& rng, int count, bool planar) {
    SparseMatches out;
    while (static_cast<int>(out.size()) < count) {
        Eigen::Vector3d p(rng.uniform(-2, 2), rng.uniform(-1.5, 1.5),
                          planar ? 5.0 : rng.uniform(4, 9));
        PointMatch m = rig.project(p);
        if (std::abs(m.x0) > 1e4 || std::abs(m.x1) > 1e4) continue;
        out.push_back(m);
    }
    return out;
}

}  // namespace

TEST_CASE("eight-point recovers the fundamental matrix from clean matches") {
    Rig rig = generic_rig();
    Rng rng(101);
    SparseMatches matches = project_cloud(rig, rng, 60, false);

    RansacConfig cfg;
    cfg.seed = 4;
    FundamentalEstimate est = estimate_fundamental(matches, cfg);
    CHECK(est.inliers.size() == matches.size());
    for (const auto& m : matches) CHECK(sampson_distance(est.f, m) < 1e-6);

    // agrees with the camera-derived truth up to sign-fixed normalization
    FundamentalMatrix truth = rig.truth();
    CHECK((est.f.m - truth.m).norm() < 1e-6);

    // normalization invariants: rank 2, unit Frobenius norm, canonical sign
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(est.f.m);
    CHECK(svd.singularValues()[2] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(est.f.m.norm() == doctest::Approx(1.0).epsilon(1e-12));
    int ri = 0, ci = 0;
    est.f.m.cwiseAbs().maxCoeff(&ri, &ci);
    CHECK(est.f.m(ri, ci) > 0.0);
}

TEST_CASE("ransac rejects injected outliers") {
    Rig rig = generic_rig();
    Rng rng(202);
    SparseMatches matches = project_cloud(rig, rng, 70, true);  // planar scene
    std::size_t clean = matches.size();
    std::size_t outliers = clean * 3 / 7;  // ~30% of the final list
    for (std::size_t i = 0; i < outliers; ++i)
        matches.push_back({rng.uniform(0, 640), rng.uniform(0, 480), rng.uniform(0, 640),
                           rng.uniform(0, 480)});

    RansacConfig cfg;
    cfg.seed = 7;
    cfg.inlier_threshold = 0.05;  // the synthetic matches are exact
    FundamentalEstimate est = estimate_fundamental(matches, cfg);
    std::size_t outliers_kept = 0;
    for (int idx : est.inliers)
        if (static_cast<std::size_t>(idx) >= clean) ++outliers_kept;
    CHECK(outliers_kept * 10 <= outliers);  // >= 90% of outliers excluded
}

TEST_CASE("estimation preconditions") {
    SparseMatches seven(7, PointMatch{1, 2, 3, 4});
    CHECK_THROWS_AS(estimate_fundamental(seven, RansacConfig{}), DataError);
}

TEST_CASE("estimate is deterministic and permutation invariant") {
    Rig rig = generic_rig();
    Rng rng(303);
    SparseMatches matches = project_cloud(rig, rng, 40, false);
    RansacConfig cfg;
    cfg.seed = 11;
    FundamentalEstimate a = estimate_fundamental(matches, cfg);

    SparseMatches shuffled = matches;
    for (std::size_t i = shuffled.size(); i > 1; --i)
        std::swap(shuffled[i - 1], shuffled[rng.uniform_int(static_cast<int>(i))]);
    FundamentalEstimate b = estimate_fundamental(shuffled, cfg);
    CHECK((a.f.m - b.f.m).norm() == 0.0);
}

TEST_CASE("epipolar lines") {
    // pure horizontal translation: F = [t]_x, lines are image rows
    FundamentalMatrix f = normalize_fundamental(cross_matrix(Eigen::Vector3d(1, 0, 0)));

    SUBCASE("line passes through the true match") {
        for (double y : {3.0, 17.5, 240.0}) {
            auto line = epipolar_line(f, 12.0, y);
            REQUIRE(line.has_value());
            CHECK(std::abs(line->a * 99.0 + line->b * y + line->c) < 1e-9);
        }
    }
    SUBCASE("coefficients are unit-normalized") {
        auto line = epipolar_line(f, 5.0, 9.0);
        REQUIRE(line.has_value());
        CHECK(line->a * line->a + line->b * line->b == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("the epipole maps to a degenerate line") {
        // epipole of [t]_x with t = (1,0,0) is the point at infinity (1,0,0);
        // use a finite-epipole rig instead
        Rig rig = generic_rig();
        FundamentalMatrix truth = rig.truth();
        Eigen::JacobiSVD<Eigen::Matrix3d> svd(truth.m, Eigen::ComputeFullV);
        Eigen::Vector3d e = svd.matrixV().col(2);
        e /= e.z();
        CHECK_FALSE(epipolar_line(truth, e.x(), e.y()).has_value());
    }
}

TEST_CASE("match files round-trip and reject junk") {
    testutil::TempDir dir("matches");
    SparseMatches m = {{1.5, 2.0, 3.25, 4.0}, {10, 20, 30, 40}};
    write_matches(m, dir.path() / "m.txt");
    SparseMatches back = read_matches(dir.path() / "m.txt");
    REQUIRE(back.size() == 2);
    CHECK(back[0].x0 == 1.5);
    CHECK(back[1].y1 == 40.0);

    SparseMatches t = transposed(back);
    CHECK(t[0].x0 == 3.25);
    CHECK(t[0].x1 == 1.5);

    std::ofstream(dir.path() / "bad.txt") << "1 2 3\n";
    CHECK_THROWS_AS(read_matches(dir.path() / "bad.txt"), DataError);
}
