#include "crowdseg/maxflow.hpp"

#include <array>
#include <deque>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

namespace crowdseg {

FlowGraph::FlowGraph(int node_count, int source, int sink)
    : head_(node_count, -1), source_(source), sink_(sink) {
    if (node_count < 2) throw DataError("FlowGraph: need at least 2 nodes");
    if (source < 0 || source >= node_count || sink < 0 || sink >= node_count)
        throw DataError("FlowGraph: terminal id out of range");
    if (source == sink) throw DataError("FlowGraph: source == sink");
}

void FlowGraph::reserve_arcs(std::size_t n) {
    to_.reserve(2 * n);
    next_.reserve(2 * n);
    cap_.reserve(2 * n);
}

void FlowGraph::add_arc(int from, int to, double cap, double rev_cap) {
    if (from < 0 || from >= node_count() || to < 0 || to >= node_count())
        throw DataError("add_arc: node id out of range");
    if (!(cap >= 0.0) || !(rev_cap >= 0.0)) throw DataError("add_arc: negative capacity");
    int idx = static_cast<int>(cap_.size());
    to_.push_back(to);
    next_.push_back(head_[from]);
    cap_.push_back(cap);
    head_[from] = idx;
    to_.push_back(from);
    next_.push_back(head_[to]);
    cap_.push_back(rev_cap);
    head_[to] = idx + 1;
}

namespace {
constexpr int kNoArc = -1;
constexpr int kTerminalRoot = -2;
enum : std::uint8_t { kFree = 0, kSrcTree = 1, kSnkTree = 2 };
}  // namespace

// Boykov-Kolmogorov augmenting paths. Two search trees grow from the
// source and the sink; when they touch, the connecting path is augmented
// and nodes whose parent arc saturated are re-adopted. parent[x] is the
// arc from x to its tree parent; for a source-tree node the residual that
// keeps the link alive is on the sister arc (parent -> x), for a sink-tree
// node it is on the arc itself (x -> parent).
class BkSolver {
public:
    explicit BkSolver(const FlowGraph& g)
        : g_(g),
          rc_(g.cap_),
          parent_(g.node_count(), kNoArc),
          tree_(g.node_count(), kFree),
          ts_(g.node_count(), 0),
          dist_(g.node_count(), 0),
          in_active_(g.node_count(), 0) {}

    CutResult run() {
        const int s = g_.source_, t = g_.sink_;
        tree_[s] = kSrcTree;
        tree_[t] = kSnkTree;
        parent_[s] = kTerminalRoot;
        parent_[t] = kTerminalRoot;
        activate(s);
        activate(t);

        while (!active_.empty()) {
            int p = active_.front();
            active_.pop_front();
            in_active_[p] = 0;
            if (tree_[p] == kFree) continue;

            std::uint8_t tr = tree_[p];
            int a = g_.head_[p];
            while (a != kNoArc) {
                double res = (tr == kSrcTree) ? rc_[a] : rc_[a ^ 1];
                if (res > 0.0) {
                    int q = g_.to_[a];
                    if (tree_[q] == kFree) {
                        tree_[q] = tr;
                        parent_[q] = a ^ 1;  // arc q -> p
                        ts_[q] = ts_[p];
                        dist_[q] = dist_[p] + 1;
                        activate(q);
                    } else if (tree_[q] != tr) {
                        int middle = (tr == kSrcTree) ? a : (a ^ 1);
                        augment(middle);
                        adopt();
                        if (tree_[p] != tr) break;  // p was freed during adoption
                        // the contact arc may still carry residual; rescan
                        a = g_.head_[p];
                        continue;
                    }
                }
                a = g_.next_[a];
            }
        }

        CutResult out;
        out.flow = flow_;
        out.side = residual_reachability();
        out.arc_flow.resize(rc_.size());
        for (std::size_t a = 0; a < rc_.size(); ++a) out.arc_flow[a] = g_.cap_[a] - rc_[a];
        return out;
    }

private:
    void activate(int x) {
        if (!in_active_[x]) {
            in_active_[x] = 1;
            active_.push_back(x);
        }
    }

    // middle goes from a source-tree node to a sink-tree node.
    void augment(int middle) {
        ++time_;
        int u = g_.to_[middle ^ 1];
        int v = g_.to_[middle];

        double bottleneck = rc_[middle];
        for (int x = u; parent_[x] != kTerminalRoot; x = g_.to_[parent_[x]]) {
            int a = parent_[x];  // x -> parent; flow enters x via a^1
            if (rc_[a ^ 1] < bottleneck) bottleneck = rc_[a ^ 1];
        }
        for (int x = v; parent_[x] != kTerminalRoot; x = g_.to_[parent_[x]]) {
            int a = parent_[x];  // flow leaves x via a
            if (rc_[a] < bottleneck) bottleneck = rc_[a];
        }

        rc_[middle] -= bottleneck;
        rc_[middle ^ 1] += bottleneck;
        for (int x = u; parent_[x] != kTerminalRoot;) {
            int a = parent_[x];
            int nx = g_.to_[a];
            rc_[a ^ 1] -= bottleneck;
            rc_[a] += bottleneck;
            if (rc_[a ^ 1] == 0.0) {
                parent_[x] = kNoArc;
                orphans_.push_back(x);
            }
            x = nx;
        }
        for (int x = v; parent_[x] != kTerminalRoot;) {
            int a = parent_[x];
            int nx = g_.to_[a];
            rc_[a] -= bottleneck;
            rc_[a ^ 1] += bottleneck;
            if (rc_[a] == 0.0) {
                parent_[x] = kNoArc;
                orphans_.push_back(x);
            }
            x = nx;
        }
        flow_ += bottleneck;
    }

    // Distance from q to its tree root through valid parents, or -1 if q is
    // hanging off an orphaned subtree. Marks the walked path with the current
    // timestamp to amortize repeated walks within one adoption round.
    int origin_distance(int q) {
        int d = 0;
        int x = q;
        while (true) {
            if (ts_[x] == time_) {
                d += dist_[x];
                break;
            }
            int a = parent_[x];
            if (a == kTerminalRoot) break;
            if (a == kNoArc) return -1;
            ++d;
            x = g_.to_[a];
        }
        int dd = d;
        x = q;
        while (ts_[x] != time_) {
            ts_[x] = time_;
            dist_[x] = dd;
            if (parent_[x] == kTerminalRoot) break;
            --dd;
            x = g_.to_[parent_[x]];
        }
        return d;
    }

    void adopt() {
        while (!orphans_.empty()) {
            int o = orphans_.front();
            orphans_.pop_front();
            std::uint8_t tr = tree_[o];

            int best_arc = kNoArc;
            int best_d = std::numeric_limits<int>::max();
            for (int a = g_.head_[o]; a != kNoArc; a = g_.next_[a]) {
                int q = g_.to_[a];
                if (tree_[q] != tr) continue;
                double res = (tr == kSrcTree) ? rc_[a ^ 1] : rc_[a];
                if (res <= 0.0) continue;
                int d = origin_distance(q);
                if (d >= 0 && d < best_d) {
                    best_d = d;
                    best_arc = a;
                }
            }

            if (best_arc != kNoArc) {
                parent_[o] = best_arc;
                ts_[o] = time_;
                dist_[o] = best_d + 1;
                continue;
            }

            // No valid parent: o leaves the tree. Its tree neighbours with
            // spare residual become active again and its children become
            // orphans themselves.
            for (int a = g_.head_[o]; a != kNoArc; a = g_.next_[a]) {
                int q = g_.to_[a];
                if (tree_[q] != tr) continue;
                double res = (tr == kSrcTree) ? rc_[a ^ 1] : rc_[a];
                if (res > 0.0) activate(q);
                int pq = parent_[q];
                if (pq >= 0 && g_.to_[pq] == o) {
                    parent_[q] = kNoArc;
                    orphans_.push_back(q);
                }
            }
            tree_[o] = kFree;
        }
    }

    std::vector<CutSide> residual_reachability() const {
        std::vector<CutSide> side(g_.node_count(), CutSide::Sink);
        std::deque<int> queue;
        side[g_.source_] = CutSide::Source;
        queue.push_back(g_.source_);
        while (!queue.empty()) {
            int p = queue.front();
            queue.pop_front();
            for (int a = g_.head_[p]; a != kNoArc; a = g_.next_[a]) {
                int q = g_.to_[a];
                if (rc_[a] > 0.0 && side[q] == CutSide::Sink) {
                    side[q] = CutSide::Source;
                    queue.push_back(q);
                }
            }
        }
        CSEG_CHECK(side[g_.sink_] == CutSide::Sink);
        return side;
    }

    const FlowGraph& g_;
    std::vector<double> rc_;
    std::vector<int> parent_;
    std::vector<std::uint8_t> tree_;
    std::vector<std::uint32_t> ts_;
    std::vector<int> dist_;
    std::vector<std::uint8_t> in_active_;
    std::deque<int> active_;
    std::deque<int> orphans_;
    std::uint32_t time_ = 1;
    double flow_ = 0.0;
};

CutResult solve(const FlowGraph& g) {
    return BkSolver(g).run();
}

double cut_capacity(const FlowGraph& g, const std::vector<CutSide>& side) {
    if (side.size() != static_cast<std::size_t>(g.node_count()))
        throw DataError("cut_capacity: side assignment size mismatch");
    double total = 0.0;
    for (std::size_t a = 0; a < g.arc_count(); ++a) {
        if (side[g.arc_from(a)] == CutSide::Source && side[g.arc_to(a)] == CutSide::Sink)
            total += g.arc_cap(a);
    }
    return total;
}

FlowGraph read_dimacs(std::istream& in) {
    int nodes = -1;
    long arcs = -1;
    int source = -1, sink = -1;
    std::vector<std::array<double, 3>> pending;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == 'c') continue;
        std::istringstream ls(line);
        char kind;
        ls >> kind;
        auto bad = [&](const std::string& what) {
            std::ostringstream os;
            os << "DIMACS line " << lineno << ": " << what;
            throw DataError(os.str());
        };
        if (kind == 'p') {
            std::string problem;
            ls >> problem >> nodes >> arcs;
            if (!ls || problem != "max" || nodes < 2) bad("expected 'p max <nodes> <arcs>'");
        } else if (kind == 'n') {
            int id;
            char which;
            ls >> id >> which;
            if (!ls) bad("expected 'n <id> s|t'");
            if (which == 's') source = id - 1;
            else if (which == 't') sink = id - 1;
            else bad("terminal must be s or t");
        } else if (kind == 'a') {
            double u, v, cap;
            ls >> u >> v >> cap;
            if (!ls) bad("expected 'a <from> <to> <cap>'");
            pending.push_back({u, v, cap});
        } else {
            bad("unknown line kind");
        }
    }
    if (nodes < 0) throw DataError("DIMACS: missing problem line");
    if (source < 0 || sink < 0) throw DataError("DIMACS: missing source or sink");
    FlowGraph g(nodes, source, sink);
    g.reserve_arcs(pending.size());
    for (const auto& a : pending)
        g.add_arc(static_cast<int>(a[0]) - 1, static_cast<int>(a[1]) - 1, a[2]);
    return g;
}

FlowGraph read_dimacs_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path.string() + ": cannot open for reading");
    return read_dimacs(in);
}

}  // namespace crowdseg
