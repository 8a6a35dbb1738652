#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "crowdseg/errors.hpp"

namespace crowdseg {

// One correspondence (x0,y0) in the first image <-> (x1,y1) in the second.
struct PointMatch {
    double x0 = 0, y0 = 0;
    double x1 = 0, y1 = 0;
};

using SparseMatches = std::vector<PointMatch>;

// Text format: one "x y x' y'" line per match, '#' starts a comment.
SparseMatches read_matches(const std::filesystem::path& path);
void write_matches(const SparseMatches& matches, const std::filesystem::path& path);

// Swap the two sides of every match.
SparseMatches transposed(const SparseMatches& matches);

// Rank-2, unit Frobenius norm, sign fixed so the largest-magnitude entry is
// positive. Satisfies p1^T * F * p0 = 0 for corresponding points.
struct FundamentalMatrix {
    Eigen::Matrix3d m = Eigen::Matrix3d::Zero();

    // Line in the second image for pixel (x, y) of the first.
    FundamentalMatrix transposed() const { return {m.transpose().eval()}; }
};

FundamentalMatrix normalize_fundamental(const Eigen::Matrix3d& raw);

// First-order geometric residual of a match under F, in pixels.
double sampson_distance(const FundamentalMatrix& f, const PointMatch& match);

struct RansacConfig {
    int iterations = 500;
    double inlier_threshold = 1.5;  // Sampson distance, pixels
    std::uint64_t seed = 1;
};

struct FundamentalEstimate {
    FundamentalMatrix f;
    std::vector<int> inliers;  // indices into the input match list
};

// RANSAC over the normalized 8-point algorithm, refit on the consensus set.
// Deterministic for a fixed seed: samples index into a canonically sorted
// copy of the match list, so the result is invariant to input permutation.
FundamentalEstimate estimate_fundamental(const SparseMatches& matches, const RansacConfig& cfg);

// Normalized line coefficients a*x + b*y + c = 0 with a^2 + b^2 = 1, so
// |a*x' + b*y' + c| is point-line distance.
struct Line {
    double a = 0, b = 0, c = 0;
};

// Epipolar line of pixel (x, y) in the other image, or nullopt when the
// pixel is (numerically) the epipole and the line degenerates.
std::optional<Line> epipolar_line(const FundamentalMatrix& f, double x, double y);

}  // namespace crowdseg
