// Constructive generators for the benchmark families used in the tests and
// the README reproduction runs.
#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include "escbundle/common.hpp"
#include "escbundle/graph.hpp"

namespace escbundle {
namespace gen {

inline WeightedGraph path(int n) {
    std::vector<Edge> e;
    for (int i = 0; i + 1 < n; ++i) e.push_back({i, i + 1, 1.0});
    return WeightedGraph::make(n, std::move(e));
}

inline WeightedGraph cycle(int n) {
    std::vector<Edge> e;
    for (int i = 0; i < n; ++i) e.push_back({i, (i + 1) % n, 1.0});
    return WeightedGraph::make(n, std::move(e));
}

inline WeightedGraph complete(int n) {
    std::vector<Edge> e;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) e.push_back({i, j, 1.0});
    return WeightedGraph::make(n, std::move(e));
}

inline WeightedGraph complement(const WeightedGraph& g) {
    std::vector<Edge> e;
    for (int i = 0; i < g.n(); ++i)
        for (int j = i + 1; j < g.n(); ++j)
            if (!g.has_edge(i, j)) e.push_back({i, j, 1.0});
    return WeightedGraph::make(g.n(), std::move(e));
}

// Outer cycle 0..n-1, spokes to n..2n-1, inner star polygon with skip k.
inline WeightedGraph generalized_petersen(int n, int k) {
    std::vector<Edge> e;
    for (int i = 0; i < n; ++i) {
        e.push_back({i, (i + 1) % n, 1.0});
        e.push_back({i, n + i, 1.0});
        e.push_back({n + i, n + (i + k) % n, 1.0});
    }
    return WeightedGraph::make(2 * n, std::move(e));
}

inline WeightedGraph petersen() { return generalized_petersen(5, 2); }

// Mycielskian: shadow vertex n+i adjacent to the neighbours of i, apex 2n
// adjacent to every shadow. Triples the edges plus n apex edges.
inline WeightedGraph mycielskian(const WeightedGraph& g) {
    const int n = g.n();
    std::vector<Edge> e;
    for (const auto& ed : g.edges()) {
        e.push_back({ed.u, ed.v, 1.0});
        e.push_back({ed.u, n + ed.v, 1.0});
        e.push_back({ed.v, n + ed.u, 1.0});
    }
    for (int i = 0; i < n; ++i) e.push_back({n + i, 2 * n, 1.0});
    return WeightedGraph::make(2 * n + 1, std::move(e));
}

// DIMACS naming: myciel3 is the Grotzsch graph (n=11), myciel4 has n=23,
// myciel5 has n=47; each is the Mycielskian of the previous one, starting
// from a single edge.
inline WeightedGraph mycielski(int level) {
    if (level < 2) throw ParseError("mycielski level must be >= 2");
    WeightedGraph g = complete(2);
    for (int i = 1; i < level; ++i) g = mycielskian(g);
    return g;
}

// Stable set instance hamming6_4 (n=64, m=1312): binary 6-strings adjacent at
// Hamming distance at most 3, i.e. the complement of the DIMACS clique graph
// hamming6-4 whose edges require distance >= 4.
inline WeightedGraph hamming6_4() {
    std::vector<Edge> e;
    for (int u = 0; u < 64; ++u)
        for (int v = u + 1; v < 64; ++v)
            if (std::popcount(static_cast<unsigned>(u ^ v)) <= 3) e.push_back({u, v, 1.0});
    return WeightedGraph::make(64, std::move(e));
}

// 3-dimensional toroidal grid s x s x s (the spin-glass topology); spin5 is
// s=5 with n=125, m=375.
inline WeightedGraph torus3d(int s) {
    auto id = [s](int x, int y, int z) { return (x * s + y) * s + z; };
    std::vector<Edge> e;
    for (int x = 0; x < s; ++x)
        for (int y = 0; y < s; ++y)
            for (int z = 0; z < s; ++z) {
                e.push_back({id(x, y, z), id((x + 1) % s, y, z), 1.0});
                e.push_back({id(x, y, z), id(x, (y + 1) % s, z), 1.0});
                e.push_back({id(x, y, z), id(x, y, (z + 1) % s), 1.0});
            }
    return WeightedGraph::make(s * s * s, std::move(e), WeightedGraph::Duplicates::collapse);
}

// Cubic vertex-transitive graph on 26 vertices used for the stable set runs:
// the generalized Petersen graph GP(13, 5), which is vertex-transitive since
// 5^2 = -1 mod 13 (n=26, m=39, alpha=10).
inline WeightedGraph cubicvt26_5() { return generalized_petersen(13, 5); }

inline WeightedGraph gnp(int n, double p, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Edge> e;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (rng.uniform01() < p) e.push_back({i, j, 1.0});
    return WeightedGraph::make(n, std::move(e));
}

// Random weighted graph in the style of the Biq Mac pw/w families: density p,
// integer weights; negative_span widens the range to [-wmax, wmax] \ {0}.
inline WeightedGraph random_weighted(int n, double p, int wmax, bool allow_negative,
                                     std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Edge> e;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            if (rng.uniform01() >= p) continue;
            double w = 1.0 + rng.below_int(wmax);
            if (allow_negative && rng.coin()) w = -w;
            e.push_back({i, j, w});
        }
    return WeightedGraph::make(n, std::move(e));
}

// Named lookup for the CLI `gen` subcommand and the test harness.
inline WeightedGraph by_name(const std::string& name) {
    if (name == "c5") return cycle(5);
    if (name == "k2") return complete(2);
    if (name == "petersen") return petersen();
    if (name == "myciel3") return mycielski(3);
    if (name == "myciel4") return mycielski(4);
    if (name == "myciel5") return mycielski(5);
    if (name == "hamming6_4") return hamming6_4();
    if (name == "cubicvt26_5") return cubicvt26_5();
    if (name == "spin5") return torus3d(5);
    throw ParseError("unknown instance name: " + name);
}

}  // namespace gen
}  // namespace escbundle
