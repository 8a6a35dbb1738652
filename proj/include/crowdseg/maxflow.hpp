#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <vector>

#include "crowdseg/errors.hpp"

namespace crowdseg {

enum class CutSide : std::uint8_t { Source = 0, Sink = 1 };

// Sparse s-t network. Arcs are directed; every add_arc stores the forward
// arc and its reverse (default capacity 0) as an adjacent pair, so the
// sister of arc i is i^1. The arc list is frozen once a solve starts.
class FlowGraph {
public:
    FlowGraph(int node_count, int source, int sink);

    void add_arc(int from, int to, double cap, double rev_cap = 0.0);
    void reserve_arcs(std::size_t n);

    int node_count() const { return static_cast<int>(head_.size()); }
    int source() const { return source_; }
    int sink() const { return sink_; }
    std::size_t arc_count() const { return cap_.size(); }

    // Arc accessors (idx into the directed arc array; sister is idx^1).
    int arc_from(std::size_t idx) const { return to_[idx ^ 1]; }
    int arc_to(std::size_t idx) const { return to_[idx]; }
    double arc_cap(std::size_t idx) const { return cap_[idx]; }

private:
    friend class BkSolver;
    std::vector<int> head_;   // per node, first arc index or -1
    std::vector<int> to_;     // per arc
    std::vector<int> next_;   // per arc, next arc with same origin
    std::vector<double> cap_;
    int source_;
    int sink_;
};

struct CutResult {
    double flow = 0.0;
    // Canonical minimum cut: Source side = nodes reachable from the source
    // in the final residual graph; everything else is Sink side.
    std::vector<CutSide> side;
    // Net flow per directed arc (capacity minus final residual); the sister
    // arc carries the negation. Lets callers check conservation and
    // capacity constraints.
    std::vector<double> arc_flow;
};

// Exact max-flow / min-cut via Boykov-Kolmogorov search trees.
CutResult solve(const FlowGraph& g);

// Capacity of the cut induced by a side assignment (sum of original
// capacities of arcs from Source side to Sink side). For checking
// max-flow == min-cut.
double cut_capacity(const FlowGraph& g, const std::vector<CutSide>& side);

// DIMACS max-flow text format ("p max", "n", "a" lines), for test fixtures.
FlowGraph read_dimacs(std::istream& in);
FlowGraph read_dimacs_file(const std::filesystem::path& path);

}  // namespace crowdseg
