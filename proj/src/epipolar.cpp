#include "crowdseg/epipolar.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <tuple>

#include "crowdseg/rng.hpp"

namespace crowdseg {

SparseMatches read_matches(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path.string() + ": cannot open for reading");
    SparseMatches out;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        PointMatch m;
        if (!(ls >> m.x0)) continue;  // blank/comment-only line
        if (!(ls >> m.y0 >> m.x1 >> m.y1)) {
            std::ostringstream os;
            os << path.string() << ": line " << lineno << ": expected 'x y x' y''";
            throw DataError(os.str());
        }
        out.push_back(m);
    }
    return out;
}

void write_matches(const SparseMatches& matches, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError(path.string() + ": cannot open for writing");
    out << "# x y x' y'\n";
    out.precision(10);
    for (const auto& m : matches)
        out << m.x0 << " " << m.y0 << " " << m.x1 << " " << m.y1 << "\n";
    if (!out) throw IoError(path.string() + ": write failure");
}

SparseMatches transposed(const SparseMatches& matches) {
    SparseMatches out;
    out.reserve(matches.size());
    for (const auto& m : matches) out.push_back({m.x1, m.y1, m.x0, m.y0});
    return out;
}

FundamentalMatrix normalize_fundamental(const Eigen::Matrix3d& raw) {
    // Force rank 2, then unit Frobenius norm and a canonical sign.
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(raw, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Vector3d sv = svd.singularValues();
    sv[2] = 0.0;
    Eigen::Matrix3d f = svd.matrixU() * sv.asDiagonal() * svd.matrixV().transpose();
    double norm = f.norm();
    if (!(norm > 0.0) || !std::isfinite(norm))
        throw DataError("normalize_fundamental: degenerate matrix");
    f /= norm;
    int ri = 0, ci = 0;
    f.cwiseAbs().maxCoeff(&ri, &ci);
    if (f(ri, ci) < 0.0) f = -f;
    return {f};
}

double sampson_distance(const FundamentalMatrix& f, const PointMatch& match) {
    Eigen::Vector3d p0(match.x0, match.y0, 1.0);
    Eigen::Vector3d p1(match.x1, match.y1, 1.0);
    Eigen::Vector3d fp0 = f.m * p0;
    Eigen::Vector3d ftp1 = f.m.transpose() * p1;
    double r = p1.dot(fp0);
    double denom = fp0[0] * fp0[0] + fp0[1] * fp0[1] + ftp1[0] * ftp1[0] + ftp1[1] * ftp1[1];
    if (denom <= 0.0) return std::numeric_limits<double>::infinity();
    return std::abs(r) / std::sqrt(denom);
}

namespace {

struct Normalizer {
    Eigen::Matrix3d t;
};

// Hartley conditioning: translate centroid to origin, scale RMS radius to sqrt(2).
Normalizer normalizer_for(const SparseMatches& matches, bool second_side) {
    double cx = 0, cy = 0;
    for (const auto& m : matches) {
        cx += second_side ? m.x1 : m.x0;
        cy += second_side ? m.y1 : m.y0;
    }
    double n = static_cast<double>(matches.size());
    cx /= n;
    cy /= n;
    double rms = 0;
    for (const auto& m : matches) {
        double dx = (second_side ? m.x1 : m.x0) - cx;
        double dy = (second_side ? m.y1 : m.y0) - cy;
        rms += dx * dx + dy * dy;
    }
    rms = std::sqrt(rms / n);
    double s = rms > 1e-12 ? std::sqrt(2.0) / rms : 1.0;
    Normalizer out;
    out.t << s, 0, -s * cx, 0, s, -s * cy, 0, 0, 1;
    return out;
}

// Normalized 8-point estimate from the given matches (>= 8).
std::optional<FundamentalMatrix> eight_point(const SparseMatches& matches) {
    Normalizer n0 = normalizer_for(matches, false);
    Normalizer n1 = normalizer_for(matches, true);
    Eigen::MatrixXd a(matches.size(), 9);
    for (std::size_t i = 0; i < matches.size(); ++i) {
        Eigen::Vector3d p0 = n0.t * Eigen::Vector3d(matches[i].x0, matches[i].y0, 1.0);
        Eigen::Vector3d p1 = n1.t * Eigen::Vector3d(matches[i].x1, matches[i].y1, 1.0);
        a.row(i) << p1[0] * p0[0], p1[0] * p0[1], p1[0],
                    p1[1] * p0[0], p1[1] * p0[1], p1[1],
                    p0[0], p0[1], 1.0;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
    Eigen::VectorXd f = svd.matrixV().col(8);
    if (!f.allFinite()) return std::nullopt;
    Eigen::Matrix3d fn;
    fn << f[0], f[1], f[2], f[3], f[4], f[5], f[6], f[7], f[8];
    Eigen::Matrix3d denorm = n1.t.transpose() * fn * n0.t;
    if (!denorm.allFinite() || denorm.norm() <= 0.0) return std::nullopt;
    return normalize_fundamental(denorm);
}

}  // namespace

FundamentalEstimate estimate_fundamental(const SparseMatches& matches, const RansacConfig& cfg) {
    if (matches.size() < 8)
        throw DataError("estimate_fundamental: need at least 8 matches");

    // Canonical order makes the seeded sampling permutation-invariant.
    std::vector<int> order(matches.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const auto& ma = matches[a];
        const auto& mb = matches[b];
        return std::tie(ma.x0, ma.y0, ma.x1, ma.y1) < std::tie(mb.x0, mb.y0, mb.x1, mb.y1);
    });

    Rng rng(cfg.seed);
    const int n = static_cast<int>(matches.size());
    std::vector<int> pool(order);
    SparseMatches sample(8);
    std::size_t best_count = 0;
    std::vector<char> best_inlier(n, 0);

    for (int iter = 0; iter < cfg.iterations; ++iter) {
        // Partial Fisher-Yates over the canonical order.
        for (int k = 0; k < 8; ++k) {
            int j = k + rng.uniform_int(n - k);
            std::swap(pool[k], pool[j]);
        }
        for (int k = 0; k < 8; ++k) sample[k] = matches[pool[k]];
        auto cand = eight_point(sample);
        if (!cand) continue;

        std::size_t count = 0;
        for (int i = 0; i < n; ++i)
            if (sampson_distance(*cand, matches[i]) <= cfg.inlier_threshold) ++count;
        if (count > best_count) {
            best_count = count;
            for (int i = 0; i < n; ++i)
                best_inlier[i] = sampson_distance(*cand, matches[i]) <= cfg.inlier_threshold;
        }
    }

    if (best_count < 8)
        throw DataError("estimate_fundamental: consensus set smaller than 8 (degenerate geometry)");

    // Refit in canonical order so the result is independent of input order.
    SparseMatches consensus;
    consensus.reserve(best_count);
    for (int idx : order)
        if (best_inlier[idx]) consensus.push_back(matches[idx]);
    auto refit = eight_point(consensus);
    if (!refit) throw DataError("estimate_fundamental: refit failed (degenerate geometry)");

    FundamentalEstimate out;
    out.f = *refit;
    for (int i = 0; i < n; ++i)
        if (sampson_distance(out.f, matches[i]) <= cfg.inlier_threshold) out.inliers.push_back(i);
    if (out.inliers.size() < 8)
        throw DataError("estimate_fundamental: refit consensus smaller than 8 (degenerate geometry)");
    return out;
}

std::optional<Line> epipolar_line(const FundamentalMatrix& f, double x, double y) {
    Eigen::Vector3d l = f.m * Eigen::Vector3d(x, y, 1.0);
    double norm = std::hypot(l[0], l[1]);
    if (norm < 1e-12) return std::nullopt;
    return Line{l[0] / norm, l[1] / norm, l[2] / norm};
}

}  // namespace crowdseg
