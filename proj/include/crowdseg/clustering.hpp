#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "crowdseg/grid.hpp"
#include "crowdseg/pdf.hpp"

namespace crowdseg {

// Whether appearance statistics are pooled within one image or across the
// whole set.
enum class ClusterScope { SingleImage, MultiImage };

struct KmeansConfig {
    int max_iters = 40;
    double tol = 1e-6;  // max center movement that counts as converged
    std::uint64_t seed = 1;
    int sample_stride = 1;  // fit on every stride-th row/column; assignment always covers all pixels
};

struct ClusterModel {
    int k = 0;
    int depth = 0;
    std::vector<double> centers;      // k * depth
    std::vector<double> median_dist;  // per cluster: median member distance to center (M)
    // Per clustered image: per-pixel nearest-center index and distance to it.
    std::vector<std::vector<int>> assignment;
    std::vector<std::vector<double>> distance;
    // Per Lloyd iteration, sum of squared sample distances; non-increasing.
    std::vector<double> objective_history;

    int images() const { return static_cast<int>(assignment.size()); }
};

// Seeded k-means++ then Lloyd iterations over the (possibly strided) pixel
// sample; empty clusters are re-seeded to the current farthest point. The
// final assignment covers every pixel of every image. Deterministic for a
// fixed seed.
ClusterModel kmeans_fit(std::span<const FeatureMap> images, int k, const KmeansConfig& cfg);

// Eq-style cluster appearance PDF: weighted average of member PDFs with
// w_i = exp(-beta * d_i^2 / M^2); all weights 1 when M == 0.
DiscretePdf cluster_pdf(std::span<const DiscretePdf> member_pdfs, std::span<const double> dists,
                        double median_dist, double beta);

// Appearance PDF per cluster, accumulated from the delta PDFs of all member
// pixels (bins holds each pixel's geometric bin, per image, 1-based).
// Clusters without members get a uniform placeholder.
std::vector<DiscretePdf> cluster_pdf_table(const ClusterModel& model,
                                           const std::vector<std::vector<int>>& bins, int b,
                                           double beta);

// Materialized per-pixel appearance PDFs for every image the model covers.
// bins must line up with the model's assignment (same image count/sizes).
std::vector<PdfField> appearance_pdfs(const ClusterModel& model,
                                      const std::vector<std::vector<int>>& bins,
                                      std::span<const FeatureMap> images, int b, double beta);

// Debug/fixture dump: centers as a K x 1 x D tensor plus a text sidecar of
// per-cluster median distances.
void dump_cluster_model(const ClusterModel& model, const std::filesystem::path& centers_path,
                        const std::filesystem::path& medians_path);

}  // namespace crowdseg
