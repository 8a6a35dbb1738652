#pragma once

#include <vector>

#include "crowdseg/errors.hpp"

namespace crowdseg {

// Probability vector over the discrete score labels 1..bins.
struct DiscretePdf {
    int bins = 0;
    std::vector<double> p;

    DiscretePdf() = default;
    explicit DiscretePdf(int b, double fill = 0.0) : bins(b), p(b, fill) {}

    // label is 1-based
    double at_label(int m) const { return p[m - 1]; }
    double& at_label(int m) { return p[m - 1]; }

    bool valid(double tol = 1e-9) const;
};

// Per-pixel PDFs over a grid, one flat buffer.
struct PdfField {
    int height = 0;
    int width = 0;
    int bins = 0;
    std::vector<double> p;  // pixel-major, then bins

    PdfField() = default;
    PdfField(int h, int w, int b)
        : height(h), width(w), bins(b), p(static_cast<std::size_t>(h) * w * b, 0.0) {}

    double at(int pix, int label) const { return p[static_cast<std::size_t>(pix) * bins + label - 1]; }
    double& at(int pix, int label) { return p[static_cast<std::size_t>(pix) * bins + label - 1]; }
    int pixels() const { return height * width; }
};

// Bin index for a score: ceil(s * b), clamped into [1, b]. Requires s in [0,1].
int discretize_bin(double s, int b);

// Delta PDF at discretize_bin(s, b).
DiscretePdf discretize(double s, int b);

// alpha * hg + (1 - alpha) * ha.
DiscretePdf mix(const DiscretePdf& hg, const DiscretePdf& ha, double alpha);

// -log(max(h(label), eps_log)); finite for every label.
double unary_potential(const DiscretePdf& h, int label, double eps_log);

// Bin midpoint (m - 0.5) / b; inverse of the discretization for map output.
double label_to_score(int m, int b);

}  // namespace crowdseg
