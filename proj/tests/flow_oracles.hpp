#pragma once

// Test-only reference solvers, kept independent of the library's solver.

#include <limits>
#include <queue>
#include <vector>

#include "crowdseg/maxflow.hpp"

namespace testutil {

// Minimum cut by exhaustive enumeration over subsets of non-terminal nodes.
// Usable up to ~20 non-terminals.
inline double brute_force_min_cut(const crowdseg::FlowGraph& g) {
    int n = g.node_count();
    std::vector<int> free_nodes;
    for (int i = 0; i < n; ++i)
        if (i != g.source() && i != g.sink()) free_nodes.push_back(i);
    double best = std::numeric_limits<double>::infinity();
    std::vector<crowdseg::CutSide> side(n);
    for (std::uint64_t bits = 0; bits < (1ull << free_nodes.size()); ++bits) {
        side.assign(n, crowdseg::CutSide::Sink);
        side[g.source()] = crowdseg::CutSide::Source;
        for (std::size_t k = 0; k < free_nodes.size(); ++k)
            if (bits & (1ull << k)) side[free_nodes[k]] = crowdseg::CutSide::Source;
        best = std::min(best, crowdseg::cut_capacity(g, side));
    }
    return best;
}

// Plain Edmonds-Karp max-flow, written from scratch as a second opinion.
inline double edmonds_karp(const crowdseg::FlowGraph& g) {
    int n = g.node_count();
    std::size_t na = g.arc_count();
    std::vector<double> res(na);
    std::vector<std::vector<int>> out(n);
    for (std::size_t a = 0; a < na; ++a) {
        res[a] = g.arc_cap(a);
        out[g.arc_from(a)].push_back(static_cast<int>(a));
    }
    double flow = 0;
    while (true) {
        std::vector<int> via(n, -1);
        via[g.source()] = -2;
        std::queue<int> q;
        q.push(g.source());
        while (!q.empty() && via[g.sink()] == -1) {
            int u = q.front();
            q.pop();
            for (int a : out[u]) {
                int v = g.arc_to(a);
                if (via[v] == -1 && res[a] > 0) {
                    via[v] = a;
                    q.push(v);
                }
            }
        }
        if (via[g.sink()] == -1) break;
        double delta = std::numeric_limits<double>::infinity();
        for (int v = g.sink(); v != g.source(); v = g.arc_from(via[v]))
            delta = std::min(delta, res[via[v]]);
        for (int v = g.sink(); v != g.source(); v = g.arc_from(via[v])) {
            res[via[v]] -= delta;
            res[via[v] ^ 1] += delta;
        }
        flow += delta;
    }
    return flow;
}

}  // namespace testutil
