#include "crowdseg/energy.hpp"

#include <algorithm>
#include <cmath>

#include "crowdseg/features.hpp"
#include "crowdseg/maxflow.hpp"

namespace crowdseg {

EnergyModel build_energy_from_gradient(const PdfField& h, const ScalarMap& gradient,
                                       double lambda, double eps_grad, double eps_log) {
    if (h.height != gradient.height || h.width != gradient.width)
        throw DataError("build_energy: pdf/image dimension mismatch");
    if (lambda < 0) throw DataError("build_energy: lambda must be >= 0");
    if (eps_grad <= 0 || eps_log <= 0)
        throw DataError("build_energy: eps_grad and eps_log must be positive");

    EnergyModel model;
    model.height = h.height;
    model.width = h.width;
    model.bins = h.bins;
    model.lambda = lambda;
    const int n = h.pixels();
    model.unary.resize(static_cast<std::size_t>(n) * h.bins);
    for (int pix = 0; pix < n; ++pix) {
        for (int m = 1; m <= h.bins; ++m) {
            model.unary[static_cast<std::size_t>(pix) * h.bins + m - 1] =
                -std::log(std::max(h.at(pix, m), eps_log));
        }
    }
    model.pixel_weight.resize(n);
    for (int pix = 0; pix < n; ++pix)
        model.pixel_weight[pix] = 1.0 / std::max(static_cast<double>(gradient.data[pix]), eps_grad);
    return model;
}

EnergyModel build_energy(const PdfField& h, const ScalarMap& gray, double lambda,
                         double eps_grad, double eps_log) {
    return build_energy_from_gradient(h, gradient_magnitude(gray), lambda, eps_grad, eps_log);
}

double energy(const EnergyModel& model, const LabelField& x) {
    if (x.height != model.height || x.width != model.width)
        throw DataError("energy: label field dimension mismatch");
    const int h = model.height, w = model.width;
    double total = 0;
    for (int pix = 0; pix < model.pixels(); ++pix) {
        int label = x.data[pix];
        if (label < 1 || label > model.bins) throw DataError("energy: label out of range");
        total += model.unary_at(pix, label);
    }
    // The double sum visits every undirected edge in both orientations;
    // each contributes w_j + w_i when the labels differ.
    double pairwise = 0;
    for (int y = 0; y < h; ++y) {
        for (int x0 = 0; x0 < w; ++x0) {
            int pix = y * w + x0;
            if (x0 + 1 < w && x.data[pix] != x.data[pix + 1])
                pairwise += model.pixel_weight[pix] + model.pixel_weight[pix + 1];
            if (y + 1 < h && x.data[pix] != x.data[pix + w])
                pairwise += model.pixel_weight[pix] + model.pixel_weight[pix + w];
        }
    }
    return total + model.lambda * pairwise;
}

LabelField ml_estimate(const PdfField& h) {
    LabelField out(h.height, h.width);
    for (int pix = 0; pix < h.pixels(); ++pix) {
        int best = 1;
        double best_p = h.at(pix, 1);
        for (int m = 2; m <= h.bins; ++m) {
            if (h.at(pix, m) > best_p) {
                best_p = h.at(pix, m);
                best = m;
            }
        }
        out.data[pix] = best;
    }
    return out;
}

LabelField expansion_move(const EnergyModel& model, const LabelField& x, int alpha_label) {
    if (alpha_label < 1 || alpha_label > model.bins)
        throw DataError("expansion_move: label out of range");
    const int n = model.pixels();
    const int h = model.height, w = model.width;

    // Binary move: y_p = 0 keeps x_p (source side), y_p = 1 takes alpha
    // (sink side). Pairwise terms are decomposed into t-link adjustments
    // plus one submodular arc paid when p stays and q switches.
    std::vector<double> cost0(n), cost1(n);
    for (int pix = 0; pix < n; ++pix) {
        cost0[pix] = model.unary_at(pix, x.data[pix]);
        cost1[pix] = model.unary_at(pix, alpha_label);
    }

    FlowGraph g(n + 2, n, n + 1);
    g.reserve_arcs(static_cast<std::size_t>(3) * n);
    auto add_edge_terms = [&](int p, int q) {
        double wgt = model.lambda * (model.pixel_weight[p] + model.pixel_weight[q]);
        if (wgt == 0.0) return;
        int xp = x.data[p], xq = x.data[q];
        double e00 = xp != xq ? wgt : 0.0;
        double e01 = xp != alpha_label ? wgt : 0.0;
        double e10 = alpha_label != xq ? wgt : 0.0;
        cost1[p] += e10 - e00;
        cost1[q] += -e10;  // e11 - e10 with e11 = 0
        double c = e01 + e10 - e00;
        if (c > 0.0) g.add_arc(p, q, c);
    };
    for (int y = 0; y < h; ++y) {
        for (int x0 = 0; x0 < w; ++x0) {
            int pix = y * w + x0;
            if (x0 + 1 < w) add_edge_terms(pix, pix + 1);
            if (y + 1 < h) add_edge_terms(pix, pix + w);
        }
    }
    for (int pix = 0; pix < n; ++pix) {
        double delta = cost1[pix] - cost0[pix];
        if (delta > 0.0)
            g.add_arc(n, pix, delta);  // extra price for switching
        else if (delta < 0.0)
            g.add_arc(pix, n + 1, -delta);  // extra price for keeping
    }

    CutResult cut = solve(g);
    LabelField out(x.height, x.width);
    for (int pix = 0; pix < n; ++pix)
        out.data[pix] = cut.side[pix] == CutSide::Sink ? alpha_label : x.data[pix];
    return out;
}

LabelField alpha_expansion(const EnergyModel& model, const LabelField& init, int max_sweeps) {
    if (init.height != model.height || init.width != model.width)
        throw DataError("alpha_expansion: init dimension mismatch");
    for (int label : init.data)
        if (label < 1 || label > model.bins)
            throw DataError("alpha_expansion: init label out of range");

    LabelField x = init;
    double e = energy(model, x);
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool changed = false;
        for (int a = 1; a <= model.bins; ++a) {
            LabelField moved = expansion_move(model, x, a);
            double em = energy(model, moved);
            CSEG_CHECK(em <= e + 1e-6 * (1.0 + std::abs(e)));
            if (em < e) {
                x = std::move(moved);
                e = em;
                changed = true;
            }
        }
        if (!changed) break;
    }
    return x;
}

int discontinuous_edges(const LabelField& x) {
    int count = 0;
    for (int y = 0; y < x.height; ++y) {
        for (int x0 = 0; x0 < x.width; ++x0) {
            int pix = y * x.width + x0;
            if (x0 + 1 < x.width && x.data[pix] != x.data[pix + 1]) ++count;
            if (y + 1 < x.height && x.data[pix] != x.data[pix + x.width]) ++count;
        }
    }
    return count;
}

}  // namespace crowdseg
