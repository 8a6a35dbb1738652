#include "crowdseg/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "crowdseg/rng.hpp"
#include "crowdseg/tensor_io.hpp"

namespace crowdseg {

namespace {

double sq_dist(const double* a, const double* b, int d) {
    double s = 0;
    for (int i = 0; i < d; ++i) {
        double diff = a[i] - b[i];
        s += diff * diff;
    }
    return s;
}

// Nearest center, ties broken by lowest index.
int nearest_center(const double* pt, const std::vector<double>& centers, int k, int d,
                   double* out_d2) {
    int best = 0;
    double best_d2 = sq_dist(pt, centers.data(), d);
    for (int c = 1; c < k; ++c) {
        double d2 = sq_dist(pt, centers.data() + static_cast<std::size_t>(c) * d, d);
        if (d2 < best_d2) {
            best_d2 = d2;
            best = c;
        }
    }
    if (out_d2) *out_d2 = best_d2;
    return best;
}

}  // namespace

ClusterModel kmeans_fit(std::span<const FeatureMap> images, int k, const KmeansConfig& cfg) {
    if (images.empty()) throw DataError("kmeans_fit: no images");
    if (k < 1) throw DataError("kmeans_fit: k must be >= 1");
    const int d = images[0].depth;
    if (d < 1) throw DataError("kmeans_fit: zero-depth features");
    std::size_t total = 0;
    for (const auto& img : images) {
        if (img.depth != d) throw DataError("kmeans_fit: feature depths differ across images");
        total += static_cast<std::size_t>(img.pixels());
    }
    if (total < static_cast<std::size_t>(k))
        throw DataError("kmeans_fit: fewer pixels than clusters");

    const int stride = std::max(1, cfg.sample_stride);
    std::vector<double> pts;  // m * d, strided sample across all images
    for (const auto& img : images) {
        for (int y = 0; y < img.height; y += stride) {
            for (int x = 0; x < img.width; x += stride) {
                auto f = img.feature(y, x);
                for (int c = 0; c < d; ++c) pts.push_back(f[c]);
            }
        }
    }
    const std::size_t m = pts.size() / d;
    if (m < static_cast<std::size_t>(k))
        throw DataError("kmeans_fit: strided sample smaller than k; lower sample_stride");

    ClusterModel model;
    model.k = k;
    model.depth = d;
    model.centers.assign(static_cast<std::size_t>(k) * d, 0.0);

    // k-means++ seeding
    Rng rng(cfg.seed);
    std::vector<double> min_d2(m, std::numeric_limits<double>::infinity());
    {
        std::size_t first = static_cast<std::size_t>(rng.uniform_int(static_cast<int>(m)));
        std::copy_n(pts.data() + first * d, d, model.centers.data());
        for (std::size_t i = 0; i < m; ++i)
            min_d2[i] = sq_dist(pts.data() + i * d, model.centers.data(), d);
        for (int c = 1; c < k; ++c) {
            double sum = 0;
            for (double v : min_d2) sum += v;
            std::size_t pick = 0;
            if (sum > 0) {
                double r = rng.uniform() * sum;
                double acc = 0;
                for (std::size_t i = 0; i < m; ++i) {
                    acc += min_d2[i];
                    if (acc >= r) {
                        pick = i;
                        break;
                    }
                }
            } else {
                pick = static_cast<std::size_t>(rng.uniform_int(static_cast<int>(m)));
            }
            double* ctr = model.centers.data() + static_cast<std::size_t>(c) * d;
            std::copy_n(pts.data() + pick * d, d, ctr);
            for (std::size_t i = 0; i < m; ++i)
                min_d2[i] = std::min(min_d2[i], sq_dist(pts.data() + i * d, ctr, d));
        }
    }

    // Lloyd iterations on the sample
    std::vector<int> assign(m, 0);
    std::vector<double> dist2(m, 0.0);
    std::vector<double> sums(static_cast<std::size_t>(k) * d);
    std::vector<std::size_t> counts(k);
    for (int iter = 0; iter < cfg.max_iters; ++iter) {
        double objective = 0;
        for (std::size_t i = 0; i < m; ++i) {
            assign[i] = nearest_center(pts.data() + i * d, model.centers, k, d, &dist2[i]);
            objective += dist2[i];
        }
        if (!model.objective_history.empty()) {
            double prev = model.objective_history.back();
            CSEG_CHECK(objective <= prev + 1e-9 * (1.0 + prev));
        }
        model.objective_history.push_back(objective);

        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < m; ++i) {
            double* s = sums.data() + static_cast<std::size_t>(assign[i]) * d;
            const double* p = pts.data() + i * d;
            for (int c = 0; c < d; ++c) s[c] += p[c];
            ++counts[assign[i]];
        }

        double max_move2 = 0;
        std::vector<std::size_t> taken;  // points consumed by empty-cluster reseeds
        for (int c = 0; c < k; ++c) {
            double* ctr = model.centers.data() + static_cast<std::size_t>(c) * d;
            if (counts[c] > 0) {
                double inv = 1.0 / static_cast<double>(counts[c]);
                double move2 = 0;
                for (int j = 0; j < d; ++j) {
                    double nv = sums[static_cast<std::size_t>(c) * d + j] * inv;
                    double diff = nv - ctr[j];
                    move2 += diff * diff;
                    ctr[j] = nv;
                }
                max_move2 = std::max(max_move2, move2);
            } else {
                // Re-seed to the farthest sample point not already taken.
                std::size_t far = 0;
                double far_d2 = -1;
                for (std::size_t i = 0; i < m; ++i) {
                    if (std::find(taken.begin(), taken.end(), i) != taken.end()) continue;
                    if (dist2[i] > far_d2) {
                        far_d2 = dist2[i];
                        far = i;
                    }
                }
                taken.push_back(far);
                std::copy_n(pts.data() + far * d, d, ctr);
                max_move2 = std::numeric_limits<double>::infinity();
            }
        }
        if (max_move2 <= cfg.tol * cfg.tol) break;
    }

    // Full assignment over every pixel of every image.
    model.assignment.resize(images.size());
    model.distance.resize(images.size());
    std::vector<std::vector<double>> per_cluster_dist(k);
    std::vector<double> fpt(d);
    for (std::size_t im = 0; im < images.size(); ++im) {
        const auto& img = images[im];
        auto& asg = model.assignment[im];
        auto& dst = model.distance[im];
        asg.resize(img.pixels());
        dst.resize(img.pixels());
        for (int pix = 0; pix < img.pixels(); ++pix) {
            const float* f = img.data.data() + static_cast<std::size_t>(pix) * d;
            for (int c = 0; c < d; ++c) fpt[c] = f[c];
            double d2 = 0;
            int c = nearest_center(fpt.data(), model.centers, k, d, &d2);
            asg[pix] = c;
            dst[pix] = std::sqrt(d2);
            per_cluster_dist[c].push_back(dst[pix]);
        }
    }

    model.median_dist.assign(k, 0.0);
    for (int c = 0; c < k; ++c) {
        auto& ds = per_cluster_dist[c];
        if (ds.empty()) continue;
        std::size_t mid = ds.size() / 2;
        std::nth_element(ds.begin(), ds.begin() + mid, ds.end());
        model.median_dist[c] = ds[mid];
    }
    return model;
}

DiscretePdf cluster_pdf(std::span<const DiscretePdf> member_pdfs, std::span<const double> dists,
                        double median_dist, double beta) {
    if (member_pdfs.empty()) throw DataError("cluster_pdf: empty cluster");
    if (member_pdfs.size() != dists.size())
        throw DataError("cluster_pdf: member/distance count mismatch");
    if (beta < 0) throw DataError("cluster_pdf: beta must be >= 0");

    const int b = member_pdfs[0].bins;
    DiscretePdf out(b);
    double wsum = 0;
    for (std::size_t i = 0; i < member_pdfs.size(); ++i) {
        if (member_pdfs[i].bins != b) throw DataError("cluster_pdf: bin-count mismatch");
        double w = 1.0;
        if (median_dist > 0.0) {
            double r = dists[i] / median_dist;
            w = std::exp(-beta * r * r);
        }
        wsum += w;
        for (int j = 0; j < b; ++j) out.p[j] += w * member_pdfs[i].p[j];
    }
    for (int j = 0; j < b; ++j) out.p[j] /= wsum;
    return out;
}

std::vector<DiscretePdf> cluster_pdf_table(const ClusterModel& model,
                                           const std::vector<std::vector<int>>& bins, int b,
                                           double beta) {
    if (bins.size() != model.assignment.size())
        throw DataError("cluster_pdf_table: image count does not match the fitted model");
    if (beta < 0) throw DataError("cluster_pdf_table: beta must be >= 0");

    std::vector<double> wsum(model.k, 0.0);
    std::vector<std::vector<double>> acc(model.k, std::vector<double>(b, 0.0));
    for (std::size_t im = 0; im < bins.size(); ++im) {
        const auto& asg = model.assignment[im];
        const auto& dst = model.distance[im];
        if (bins[im].size() != asg.size())
            throw DataError("cluster_pdf_table: pixel count does not match the fitted model");
        for (std::size_t pix = 0; pix < asg.size(); ++pix) {
            int c = asg[pix];
            double mdist = model.median_dist[c];
            double w = 1.0;
            if (mdist > 0.0) {
                double r = dst[pix] / mdist;
                w = std::exp(-beta * r * r);
            }
            wsum[c] += w;
            acc[c][bins[im][pix] - 1] += w;
        }
    }

    std::vector<DiscretePdf> table(model.k, DiscretePdf(b));
    for (int c = 0; c < model.k; ++c) {
        if (wsum[c] > 0.0) {
            for (int j = 0; j < b; ++j) table[c].p[j] = acc[c][j] / wsum[c];
        } else {
            for (int j = 0; j < b; ++j) table[c].p[j] = 1.0 / b;  // unused placeholder
        }
    }
    return table;
}

std::vector<PdfField> appearance_pdfs(const ClusterModel& model,
                                      const std::vector<std::vector<int>>& bins,
                                      std::span<const FeatureMap> images, int b, double beta) {
    if (images.size() != model.assignment.size())
        throw DataError("appearance_pdfs: image count does not match the fitted model");
    auto table = cluster_pdf_table(model, bins, b, beta);
    std::vector<PdfField> out;
    out.reserve(images.size());
    for (std::size_t im = 0; im < images.size(); ++im) {
        PdfField field(images[im].height, images[im].width, b);
        const auto& asg = model.assignment[im];
        for (std::size_t pix = 0; pix < asg.size(); ++pix) {
            const auto& pdf = table[asg[pix]];
            std::copy(pdf.p.begin(), pdf.p.end(), field.p.begin() + pix * b);
        }
        out.push_back(std::move(field));
    }
    return out;
}

void dump_cluster_model(const ClusterModel& model, const std::filesystem::path& centers_path,
                        const std::filesystem::path& medians_path) {
    FeatureMap centers(model.k, 1, model.depth);
    for (std::size_t i = 0; i < model.centers.size(); ++i)
        centers.data[i] = static_cast<float>(model.centers[i]);
    write_tensor(centers, centers_path);

    std::ofstream out(medians_path);
    if (!out) throw IoError(medians_path.string() + ": cannot open for writing");
    out.precision(10);
    for (double m : model.median_dist) out << m << "\n";
    if (!out) throw IoError(medians_path.string() + ": write failure");
}

}  // namespace crowdseg
