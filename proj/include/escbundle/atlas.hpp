// Atom matrices of small induced subgraphs: the vertex sets of CUT_k,
// STAB^2(G_I) and COL(G_I). A relaxed principal submatrix is "exact" when it
// lies in the convex hull of these atoms.
//
// Atom lists are deduplicated and sorted by matrix content, so the list for a
// given labelled graph is a pure function of that graph no matter whether it
// was enumerated directly or recovered from the canonical-form cache.
#pragma once

#include <armadillo>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "escbundle/common.hpp"
#include "escbundle/graph.hpp"

namespace escbundle {

struct AtomSet {
    Problem problem;
    int k = 0;
    std::vector<arma::mat> atoms;
    arma::mat gram;  // gram(i,j) = <atoms[i], atoms[j]>

    int t() const { return static_cast<int>(atoms.size()); }
};

namespace detail {

inline bool mat_less(const arma::mat& a, const arma::mat& b) {
    const double* pa = a.memptr();
    const double* pb = b.memptr();
    for (arma::uword i = 0; i < a.n_elem; ++i) {
        if (pa[i] != pb[i]) return pa[i] < pb[i];
    }
    return false;
}

// Sort by content, drop exact duplicates (entries are small integers, so
// equality is exact), fill the Gram matrix.
inline void finalize_atoms(AtomSet& set) {
    std::sort(set.atoms.begin(), set.atoms.end(), mat_less);
    set.atoms.erase(std::unique(set.atoms.begin(), set.atoms.end(),
                                [](const arma::mat& a, const arma::mat& b) {
                                    return arma::all(arma::vectorise(a) == arma::vectorise(b));
                                }),
                    set.atoms.end());
    const int t = set.t();
    set.gram.set_size(t, t);
    for (int i = 0; i < t; ++i)
        for (int j = i; j < t; ++j)
            set.gram(i, j) = set.gram(j, i) = arma::dot(set.atoms[i], set.atoms[j]);
}

// Restricted-growth strings enumerate set partitions of {0..k-1}.
template <typename Fn>
void for_each_partition(int k, Fn&& fn) {
    std::vector<int> rgs(k, 0);
    while (true) {
        fn(rgs);
        int i = k - 1;
        for (; i > 0; --i) {
            int mx = 0;
            for (int j = 0; j < i; ++j) mx = std::max(mx, rgs[j]);
            if (rgs[i] <= mx) break;
        }
        if (i == 0) return;
        ++rgs[i];
        std::fill(rgs.begin() + i + 1, rgs.end(), 0);
    }
}

}  // namespace detail

// All cut matrices cc^T of order k; c and -c coincide so the first entry of
// each generating c is fixed to +1, giving exactly 2^(k-1) atoms.
inline AtomSet cut_matrices(int k) {
    if (k < 2 || k > 10) throw SolverError("cut_matrices requires 2 <= k <= 10");
    AtomSet set{Problem::maxcut, k, {}, {}};
    arma::vec c(k);
    c(0) = 1.0;
    for (std::uint32_t bits = 0; bits < (1u << (k - 1)); ++bits) {
        for (int i = 1; i < k; ++i) c(i) = (bits >> (i - 1)) & 1u ? -1.0 : 1.0;
        set.atoms.push_back(c * c.t());
    }
    detail::finalize_atoms(set);
    return set;
}

// All stable set matrices ss^T of g, including s = 0 (the zero matrix).
inline AtomSet stable_set_matrices(const WeightedGraph& g) {
    const int k = g.n();
    if (k < 1 || k > 10) throw SolverError("stable_set_matrices requires order <= 10");
    std::uint32_t edge_masks[10] = {};
    for (const auto& e : g.edges()) {
        edge_masks[e.u] |= 1u << e.v;
        edge_masks[e.v] |= 1u << e.u;
    }
    AtomSet set{Problem::stableset, k, {}, {}};
    for (std::uint32_t s = 0; s < (1u << k); ++s) {
        bool stable = true;
        for (int i = 0; i < k && stable; ++i)
            if ((s >> i) & 1u) stable = (s & edge_masks[i]) == 0;
        if (!stable) continue;
        arma::vec v(k);
        for (int i = 0; i < k; ++i) v(i) = (s >> i) & 1u ? 1.0 : 0.0;
        set.atoms.push_back(v * v.t());
    }
    detail::finalize_atoms(set);
    return set;
}

// All coloring matrices SS^T over partitions of the vertices into nonempty
// stable sets. Distinct partitions give distinct matrices (the 1-blocks are
// readable from SS^T), but the list is deduplicated regardless.
inline AtomSet coloring_matrices(const WeightedGraph& g) {
    const int k = g.n();
    if (k < 1 || k > 10) throw SolverError("coloring_matrices requires order <= 10");
    AtomSet set{Problem::coloring, k, {}, {}};
    detail::for_each_partition(k, [&](const std::vector<int>& rgs) {
        for (const auto& e : g.edges())
            if (rgs[e.u] == rgs[e.v]) return;  // part contains an edge
        arma::mat atom(k, k, arma::fill::zeros);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j)
                if (rgs[i] == rgs[j]) atom(i, j) = 1.0;
        set.atoms.push_back(std::move(atom));
    });
    detail::finalize_atoms(set);
    return set;
}

// Cache. Max-Cut atoms depend only on the order; stable set and coloring
// atoms are cached per isomorphism class (canonical key) and mapped back to
// the requested labelling on the way out.
class AtomCache {
  public:
    static AtomCache& instance() {
        static AtomCache cache;
        return cache;
    }

    std::shared_ptr<const AtomSet> cuts(int k) {
        std::lock_guard<std::mutex> lock(mutex_);
        auto& slot = cut_cache_[k];
        if (!slot) slot = std::make_shared<AtomSet>(cut_matrices(k));
        return slot;
    }

    // Atoms of the canonical representative of g's isomorphism class plus the
    // canonizing permutation. Projection distances may be computed in this
    // frame directly, sharing the cached Gram matrix.
    std::pair<std::shared_ptr<const AtomSet>, std::vector<int>> canonical(Problem problem,
                                                                          const WeightedGraph& g) {
        if (problem == Problem::maxcut) {
            std::vector<int> id(g.n());
            std::iota(id.begin(), id.end(), 0);
            return {cuts(g.n()), std::move(id)};
        }
        CanonicalForm form = canonical_form(g);
        Key key{problem, form.k, form.key};
        std::lock_guard<std::mutex> lock(mutex_);
        auto& slot = class_cache_[key];
        if (!slot) {
            WeightedGraph canon = apply_permutation(g, form.perm);
            slot = std::make_shared<AtomSet>(problem == Problem::stableset
                                                 ? stable_set_matrices(canon)
                                                 : coloring_matrices(canon));
        }
        return {slot, std::move(form.perm)};
    }

  private:
    struct Key {
        Problem problem;
        int k;
        std::uint64_t bits;
        friend bool operator<(const Key& a, const Key& b) {
            return std::tie(a.problem, a.k, a.bits) < std::tie(b.problem, b.k, b.bits);
        }
    };
    std::mutex mutex_;
    std::map<int, std::shared_ptr<AtomSet>> cut_cache_;
    std::map<Key, std::shared_ptr<AtomSet>> class_cache_;
};

// Atom set of g in g's own labelling. For Max-Cut the cached set is returned
// as-is (it only depends on the order, and callers may rely on pointer
// identity); otherwise the canonical atoms are conjugated back and re-sorted,
// which reproduces direct enumeration exactly. Orders 9 and 10 (the
// exhaustive block of the desk-scale certificate) bypass the canonical cache,
// whose permutation search is capped at 8.
inline std::shared_ptr<const AtomSet> atoms_for(Problem problem, const WeightedGraph& g) {
    auto& cache = AtomCache::instance();
    if (problem == Problem::maxcut) return cache.cuts(g.n());
    if (g.n() > 8)
        return std::make_shared<AtomSet>(problem == Problem::stableset ? stable_set_matrices(g)
                                                                       : coloring_matrices(g));

    auto [canon_set, perm] = cache.canonical(problem, g);
    const int k = g.n();
    auto out = std::make_shared<AtomSet>();
    out->problem = problem;
    out->k = k;
    out->atoms.reserve(canon_set->t());
    for (const auto& a : canon_set->atoms) {
        arma::mat m(k, k);
        for (int p = 0; p < k; ++p)
            for (int q = 0; q < k; ++q) m(p, q) = a(perm[p], perm[q]);
        out->atoms.push_back(std::move(m));
    }
    // Track where each matrix lands after sorting so the Gram matrix can be
    // re-indexed instead of recomputed (inner products are permutation
    // invariant).
    std::vector<arma::uword> order(out->atoms.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](arma::uword a, arma::uword b) {
        return detail::mat_less(out->atoms[a], out->atoms[b]);
    });
    std::vector<arma::mat> sorted;
    sorted.reserve(out->atoms.size());
    for (auto i : order) sorted.push_back(std::move(out->atoms[i]));
    out->atoms = std::move(sorted);
    arma::uvec uorder(order);
    out->gram = canon_set->gram.submat(uorder, uorder);
    return out;
}

}  // namespace escbundle
