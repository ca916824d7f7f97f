// Graph representation and instance I/O.
//
// Vertices are 0-based everywhere inside the library; the 1-based convention
// of the DIMACS and rudy file formats is translated at the parse/serialize
// boundary and nowhere else.
#pragma once

#include <algorithm>
#include <armadillo>
#include <cstdint>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "escbundle/common.hpp"

namespace escbundle {

struct Edge {
    int u, v;  // u < v
    double w;

    friend bool operator==(const Edge& a, const Edge& b) {
        return a.u == b.u && a.v == b.v && a.w == b.w;
    }
};

// Undirected graph with optional real edge weights. Immutable after
// construction: every mutating path goes through make(), which validates,
// canonicalizes edge orientation, sorts and resolves duplicates.
class WeightedGraph {
  public:
    enum class Duplicates { reject, collapse, sum };

    WeightedGraph() = default;

    static WeightedGraph make(int n, std::vector<Edge> edges,
                              Duplicates dup = Duplicates::reject) {
        if (n < 0) throw ParseError("negative vertex count");
        for (auto& e : edges) {
            if (e.u > e.v) std::swap(e.u, e.v);
            if (e.u == e.v) throw ParseError("self-loop on vertex " + std::to_string(e.u + 1));
            if (e.u < 0 || e.v >= n)
                throw ParseError("vertex index out of range: " + std::to_string(e.v + 1));
        }
        std::sort(edges.begin(), edges.end(),
                  [](const Edge& a, const Edge& b) { return std::tie(a.u, a.v) < std::tie(b.u, b.v); });
        std::vector<Edge> out;
        out.reserve(edges.size());
        for (const auto& e : edges) {
            if (!out.empty() && out.back().u == e.u && out.back().v == e.v) {
                switch (dup) {
                    case Duplicates::reject:
                        throw ParseError("duplicate edge " + std::to_string(e.u + 1) + " " +
                                         std::to_string(e.v + 1));
                    case Duplicates::collapse: break;  // keep first
                    case Duplicates::sum: out.back().w += e.w; break;
                }
            } else {
                out.push_back(e);
            }
        }
        WeightedGraph g;
        g.n_ = n;
        g.edges_ = std::move(out);
        return g;
    }

    int n() const { return n_; }
    int m() const { return static_cast<int>(edges_.size()); }
    const std::vector<Edge>& edges() const { return edges_; }

    bool has_edge(int u, int v) const {
        if (u > v) std::swap(u, v);
        Edge probe{u, v, 0.0};
        auto it = std::lower_bound(edges_.begin(), edges_.end(), probe,
                                   [](const Edge& a, const Edge& b) {
                                       return std::tie(a.u, a.v) < std::tie(b.u, b.v);
                                   });
        return it != edges_.end() && it->u == u && it->v == v;
    }

    bool unweighted() const {
        return std::all_of(edges_.begin(), edges_.end(), [](const Edge& e) { return e.w == 1.0; });
    }

    arma::mat adjacency() const {
        arma::mat w(n_, n_, arma::fill::zeros);
        for (const auto& e : edges_) {
            w(e.u, e.v) = e.w;
            w(e.v, e.u) = e.w;
        }
        return w;
    }

  private:
    int n_ = 0;
    std::vector<Edge> edges_;
};

// Strictly increasing list of vertices of some host graph.
struct VertexSubset {
    std::vector<int> idx;  // 0-based, strictly increasing

    static VertexSubset of(std::vector<int> v, int n) {
        std::sort(v.begin(), v.end());
        VertexSubset s{std::move(v)};
        s.validate(n);
        return s;
    }

    int k() const { return static_cast<int>(idx.size()); }

    void validate(int n) const {
        if (k() < 2 || k() > n) throw ParseError("vertex subset size out of range");
        for (size_t i = 0; i < idx.size(); ++i) {
            if (idx[i] < 0 || idx[i] >= n) throw ParseError("subset vertex out of range");
            if (i > 0 && idx[i] <= idx[i - 1]) throw ParseError("subset vertices not distinct");
        }
    }

    friend bool operator==(const VertexSubset& a, const VertexSubset& b) { return a.idx == b.idx; }
    friend bool operator<(const VertexSubset& a, const VertexSubset& b) { return a.idx < b.idx; }
};

namespace detail {

inline bool next_content_line(std::istream& in, std::string& line, long& lineno) {
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        // skip blank lines
        if (line.find_first_not_of(" \t") != std::string::npos) return true;
    }
    return false;
}

}  // namespace detail

// DIMACS .col-style edge format: `c` comments, one `p edge n m` header,
// `e i j` lines with 1-based endpoints. Both orientations of the same edge
// collapse to a single unweighted edge.
inline WeightedGraph parse_dimacs(std::istream& in) {
    std::string line;
    long lineno = 0;
    int n = -1;
    long m_header = -1;
    std::vector<Edge> edges;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue;
        if (tag == "c") continue;
        if (tag == "p") {
            if (n >= 0) throw ParseError("duplicate problem header", lineno);
            std::string kind;
            if (!(ls >> kind >> n >> m_header) || (kind != "edge" && kind != "edges" && kind != "col"))
                throw ParseError("malformed problem header", lineno);
            if (n < 0 || m_header < 0) throw ParseError("malformed problem header", lineno);
            continue;
        }
        if (tag == "e") {
            if (n < 0) throw ParseError("edge before problem header", lineno);
            int i, j;
            if (!(ls >> i >> j)) throw ParseError("malformed edge line", lineno);
            if (i < 1 || i > n || j < 1 || j > n)
                throw ParseError("vertex index out of range", lineno);
            if (i == j) throw ParseError("self-loop", lineno);
            edges.push_back({i - 1, j - 1, 1.0});
            continue;
        }
        if (tag == "n") continue;  // node lines of .col files carry no structure we use
        throw ParseError("unrecognized line tag '" + tag + "'", lineno);
    }
    if (n < 0) throw ParseError("missing problem header");
    return WeightedGraph::make(n, std::move(edges), WeightedGraph::Duplicates::collapse);
}

inline WeightedGraph parse_dimacs(const std::string& text) {
    std::istringstream in(text);
    return parse_dimacs(in);
}

// rudy format: first line `n m`, then m lines `i j w` (1-based, real w,
// possibly negative). Duplicate pairs have their weights summed.
inline WeightedGraph parse_rudy(std::istream& in) {
    std::string line;
    long lineno = 0;
    if (!detail::next_content_line(in, line, lineno)) throw ParseError("empty rudy input");
    std::istringstream hs(line);
    long n, m;
    if (!(hs >> n >> m) || n < 0 || m < 0) throw ParseError("malformed rudy header", lineno);
    std::vector<Edge> edges;
    edges.reserve(m);
    for (long r = 0; r < m; ++r) {
        if (!detail::next_content_line(in, line, lineno))
            throw ParseError("expected " + std::to_string(m) + " edge lines, got " +
                             std::to_string(r), lineno);
        std::istringstream ls(line);
        long i, j;
        double w;
        if (!(ls >> i >> j >> w)) throw ParseError("malformed rudy edge line", lineno);
        if (i < 1 || i > n || j < 1 || j > n) throw ParseError("vertex index out of range", lineno);
        if (i == j) throw ParseError("self-loop", lineno);
        edges.push_back({static_cast<int>(i - 1), static_cast<int>(j - 1), w});
    }
    if (detail::next_content_line(in, line, lineno))
        throw ParseError("trailing content after " + std::to_string(m) + " edges", lineno);
    return WeightedGraph::make(static_cast<int>(n), std::move(edges),
                               WeightedGraph::Duplicates::sum);
}

inline WeightedGraph parse_rudy(const std::string& text) {
    std::istringstream in(text);
    return parse_rudy(in);
}

inline void serialize_dimacs(const WeightedGraph& g, std::ostream& out) {
    out << "p edge " << g.n() << ' ' << g.m() << '\n';
    for (const auto& e : g.edges()) out << "e " << e.u + 1 << ' ' << e.v + 1 << '\n';
}

inline void serialize_rudy(const WeightedGraph& g, std::ostream& out) {
    out << g.n() << ' ' << g.m() << '\n';
    for (const auto& e : g.edges()) out << e.u + 1 << ' ' << e.v + 1 << ' ' << e.w << '\n';
}

// L = Diag(W 1) - W. Row sums vanish exactly because each edge contributes
// +w to two diagonal entries and -w to the two mirrored off-diagonals.
inline arma::mat laplacian(const WeightedGraph& g) {
    arma::mat l(g.n(), g.n(), arma::fill::zeros);
    for (const auto& e : g.edges()) {
        l(e.u, e.u) += e.w;
        l(e.v, e.v) += e.w;
        l(e.u, e.v) -= e.w;
        l(e.v, e.u) -= e.w;
    }
    return l;
}

// Subgraph induced by I, relabelled 0..k-1 in the order of I.
inline WeightedGraph induced_subgraph(const WeightedGraph& g, const VertexSubset& I) {
    I.validate(g.n());
    std::vector<int> pos(g.n(), -1);
    for (int p = 0; p < I.k(); ++p) pos[I.idx[p]] = p;
    std::vector<Edge> edges;
    for (const auto& e : g.edges())
        if (pos[e.u] >= 0 && pos[e.v] >= 0) edges.push_back({pos[e.u], pos[e.v], e.w});
    return WeightedGraph::make(I.k(), std::move(edges));
}

// Canonical form of an unweighted graph of order <= 8: the lexicographically
// smallest adjacency bitmask over all vertex permutations, together with one
// permutation realizing it. Exhaustive minimization -- 8! checks at most.
struct CanonicalForm {
    std::uint64_t key = 0;  // bit (a*8+b) set, a < b, in the canonical labelling
    int k = 0;
    std::vector<int> perm;  // original position p maps to canonical position perm[p]

    friend bool operator==(const CanonicalForm& a, const CanonicalForm& b) {
        return a.key == b.key && a.k == b.k;
    }
};

inline CanonicalForm canonical_form(const WeightedGraph& g) {
    const int k = g.n();
    if (k < 2 || k > 8) throw SolverError("canonical_form supports orders 2..8");
    if (!g.unweighted()) throw SolverError("canonical_form requires an unweighted graph");
    std::vector<std::pair<int, int>> pairs;
    for (const auto& e : g.edges()) pairs.emplace_back(e.u, e.v);

    std::vector<int> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    std::uint64_t best = ~0ULL;
    std::vector<int> best_perm = perm;
    do {
        std::uint64_t mask = 0;
        for (auto [u, v] : pairs) {
            int a = perm[u], b = perm[v];
            if (a > b) std::swap(a, b);
            mask |= 1ULL << (a * 8 + b);
        }
        if (mask < best) {
            best = mask;
            best_perm = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return CanonicalForm{best, k, std::move(best_perm)};
}

inline std::uint64_t canonical_key(const WeightedGraph& g) { return canonical_form(g).key; }

// The graph relabelled by a canonizing permutation: edge {a,b} present in the
// result iff {p,q} with perm[p]=a, perm[q]=b is an edge of g.
inline WeightedGraph apply_permutation(const WeightedGraph& g, const std::vector<int>& perm) {
    std::vector<Edge> edges;
    edges.reserve(g.m());
    for (const auto& e : g.edges()) edges.push_back({perm[e.u], perm[e.v], e.w});
    return WeightedGraph::make(g.n(), std::move(edges));
}

}  // namespace escbundle
