#pragma once

#include "crowdseg/grid.hpp"
#include "crowdseg/pdf.hpp"

namespace crowdseg {

// Grid MRF over score labels 1..bins, 4-connectivity.
//
// E(x) = sum_j U_j(x_j) + lambda * sum_j sum_{i in N(j)} w_j * [x_j != x_i]
//
// The directed smoothness weight w_j depends only on the pixel the term is
// anchored at (inverse gradient magnitude), so the double sum gives every
// undirected edge {j,i} the symmetric effective weight w_j + w_i.
struct EnergyModel {
    int height = 0;
    int width = 0;
    int bins = 0;
    double lambda = 0.0;
    std::vector<double> unary;         // pixels * bins, finite and >= 0
    std::vector<double> pixel_weight;  // per pixel, finite and >= 0

    int pixels() const { return height * width; }
    double unary_at(int pix, int label) const {
        return unary[static_cast<std::size_t>(pix) * bins + label - 1];
    }
};

// Unary = -log(max(h, eps_log)); directed weight at j = 1/max(g_j, eps_grad)
// where g is the supplied gradient-magnitude map.
EnergyModel build_energy_from_gradient(const PdfField& h, const ScalarMap& gradient,
                                       double lambda, double eps_grad, double eps_log);

// Same, computing the gradient from a grayscale image (no rescaling).
EnergyModel build_energy(const PdfField& h, const ScalarMap& gray, double lambda,
                         double eps_grad, double eps_log);

// Exact evaluation of the double-sum objective.
double energy(const EnergyModel& model, const LabelField& x);

// Per-pixel argmax of h, ties to the lowest label.
LabelField ml_estimate(const PdfField& h);

// Optimal single expansion move: every pixel either keeps its label or
// switches to alpha_label; solved exactly with one min-cut.
LabelField expansion_move(const EnergyModel& model, const LabelField& x, int alpha_label);

// Sweeps labels in ascending order, accepting strictly improving moves,
// until a full sweep changes nothing or max_sweeps is reached. Energy is
// non-increasing; for bins == 2 the result attains the global minimum.
LabelField alpha_expansion(const EnergyModel& model, const LabelField& init, int max_sweeps = 10);

// Number of 4-neighbour edges whose endpoints carry different labels.
int discontinuous_edges(const LabelField& x);

}  // namespace crowdseg
