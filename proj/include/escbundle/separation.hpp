// Finding violated exact subgraph constraints.
//
// The violation score of a candidate subgraph is the Frobenius distance from
// X*_I to the convex hull of its atom matrices, computed by away-step
// Frank-Wolfe on the simplex: with K the atom Gram matrix and
// r_i = <C_i, X_I>, the objective 1/2 ||sum lambda_i C_i - X_I||^2 is the
// quadratic 1/2 l'Kl - r'l + const, all iterations run in atom coordinates
// and never touch matrices. Candidates come from a hill-climbing local
// search that aligns a random template atom with X*.
#pragma once

#include <armadillo>
#include <set>
#include <vector>

#include "escbundle/atlas.hpp"
#include "escbundle/common.hpp"
#include "escbundle/graph.hpp"
#include "escbundle/operators.hpp"

namespace escbundle {

struct ViolationRecord {
    VertexSubset I;
    double distance = 0.0;
    arma::vec lambda;  // hull coefficients in the atom order of atoms_for(problem, G_I)
};

struct ProjectionOptions {
    double tol = 1e-9;  // Frank-Wolfe gap target, in units of the 1/2||.||^2 objective
    int max_iters = 20000;
};

struct ProjectionResult {
    double distance = 0.0;
    arma::vec lambda;
    double fw_gap = 0.0;
    int iters = 0;
};

inline ProjectionResult project_to_hull(const arma::mat& X_I, const AtomSet& atoms,
                                        const ProjectionOptions& opts = {}) {
    const int t = atoms.t();
    if (t < 1) throw SolverError("project_to_hull needs at least one atom");
    const arma::mat& K = atoms.gram;
    arma::vec r(t);
    for (int i = 0; i < t; ++i) r(i) = arma::dot(atoms.atoms[i], X_I);
    const double x2 = arma::dot(X_I, X_I);

    ProjectionResult res;
    arma::vec lam(t, arma::fill::zeros);
    lam(r.index_max()) = 1.0;  // nearest-looking vertex
    arma::vec grad = K * lam - r;

    auto objective = [&] { return 0.5 * arma::dot(lam, grad) - 0.5 * arma::dot(lam, r) + 0.5 * x2; };

    for (int iter = 1; iter <= opts.max_iters; ++iter) {
        res.iters = iter;
        const arma::uword s = grad.index_min();
        res.fw_gap = arma::dot(grad, lam) - grad(s);
        if (res.fw_gap <= opts.tol) break;

        // away vertex: support atom with the steepest ascent
        arma::uword a = 0;
        double worst = -arma::datum::inf;
        for (arma::uword i = 0; i < static_cast<arma::uword>(t); ++i) {
            if (lam(i) > 0.0 && grad(i) > worst) {
                worst = grad(i);
                a = i;
            }
        }

        const double fw_improve = res.fw_gap;
        const double away_improve = grad(a) - arma::dot(grad, lam);
        arma::vec kd;
        double gd, gamma_max;
        bool away = away_improve > fw_improve && lam(a) < 1.0;
        if (away) {
            kd = (K * lam - K.col(a));  // K d for d = lam - e_a
            gd = arma::dot(grad, lam) - grad(a);
            gamma_max = lam(a) / (1.0 - lam(a));
        } else {
            kd = K.col(s) - K * lam;
            gd = grad(s) - arma::dot(grad, lam);
            gamma_max = 1.0;
        }
        const double curv = away ? arma::dot(lam, kd) - kd(a) : kd(s) - arma::dot(lam, kd);
        double gamma = gamma_max;
        if (curv > 0.0) gamma = std::clamp(-gd / curv, 0.0, gamma_max);
        if (gamma <= 0.0) break;  // numerically stationary

        if (away) {
            lam *= (1.0 + gamma);
            lam(a) -= gamma;
            if (lam(a) < 1e-15) lam(a) = 0.0;  // drop step
        } else {
            lam *= (1.0 - gamma);
            lam(s) += gamma;
        }
        grad += gamma * kd;
        if (iter % 256 == 0) grad = K * lam - r;  // refresh accumulated roundoff
    }
    grad = K * lam - r;
    res.lambda = lam;
    res.distance = std::sqrt(std::max(0.0, 2.0 * objective()));
    return res;
}

struct SeparationOptions {
    int candidates_per_new = 20;  // candidate pool size = this * max_new
    int swap_budget = 50;
    double threshold = 1e-4;  // distances at or below count as exact
    ProjectionOptions projection;
};

// Random atom of order k used as a hill-climbing template.
inline arma::mat random_template_atom(Problem problem, int k, Rng& rng) {
    arma::mat b(k, k, arma::fill::zeros);
    switch (problem) {
        case Problem::maxcut: {
            arma::vec c(k);
            for (int i = 0; i < k; ++i) c(i) = rng.coin() ? 1.0 : -1.0;
            b = c * c.t();
            break;
        }
        case Problem::stableset: {
            arma::vec s(k);
            for (int i = 0; i < k; ++i) s(i) = rng.coin() ? 1.0 : 0.0;
            b = s * s.t();
            break;
        }
        case Problem::coloring: {
            std::vector<int> part(k);
            for (int i = 0; i < k; ++i) part[i] = rng.below_int(k);
            for (int i = 0; i < k; ++i)
                for (int j = 0; j < k; ++j)
                    if (part[i] == part[j]) b(i, j) = 1.0;
            break;
        }
    }
    return b;
}

// Hill-climb vertex tuples so that <B, X*_I> is locally minimal; a small
// inner product with an atom flags X*_I as far from the hull faces through
// that atom. Template positions stay fixed during the climb so single-vertex
// swaps update the objective in O(k).
inline std::vector<VertexSubset> local_search_candidates(const arma::mat& X, Problem problem,
                                                         const WeightedGraph& g, int k,
                                                         int n_candidates, Rng& rng,
                                                         int swap_budget = 50) {
    const int n = g.n();
    std::vector<VertexSubset> out;
    if (k > n) return out;
    if (k == n) {
        std::vector<int> all(n);
        std::iota(all.begin(), all.end(), 0);
        out.push_back(VertexSubset::of(all, n));
        return out;
    }

    std::vector<int> pool(n);
    std::vector<char> in_set(n);
    for (int cand = 0; cand < n_candidates; ++cand) {
        const arma::mat B = random_template_atom(problem, k, rng);

        // random k-tuple (partial Fisher-Yates)
        std::iota(pool.begin(), pool.end(), 0);
        std::vector<int> tuple(k);
        for (int p = 0; p < k; ++p) {
            const int j = p + rng.below_int(n - p);
            std::swap(pool[p], pool[j]);
            tuple[p] = pool[p];
        }
        std::fill(in_set.begin(), in_set.end(), 0);
        for (int v : tuple) in_set[v] = 1;

        for (int swap = 0; swap < swap_budget; ++swap) {
            double best_delta = -1e-12;
            int best_p = -1, best_u = -1;
            for (int p = 0; p < k; ++p) {
                const int old = tuple[p];
                for (int u = 0; u < n; ++u) {
                    if (in_set[u]) continue;
                    double delta = B(p, p) * (X(u, u) - X(old, old));
                    for (int q = 0; q < k; ++q) {
                        if (q == p) continue;
                        delta += 2.0 * B(p, q) * (X(u, tuple[q]) - X(old, tuple[q]));
                    }
                    if (delta < best_delta) {
                        best_delta = delta;
                        best_p = p;
                        best_u = u;
                    }
                }
            }
            if (best_p < 0) break;  // local minimum
            in_set[tuple[best_p]] = 0;
            in_set[best_u] = 1;
            tuple[best_p] = best_u;
        }
        out.push_back(VertexSubset::of(tuple, n));
    }
    return out;
}

struct SeparationResult {
    std::vector<ViolationRecord> selected;  // descending distance
    double max_distance = 0.0;              // over every scored candidate
    int scanned = 0;
};

// Generate candidates, score them by projection distance in the canonical
// frame (sharing the cached atom Grams), and return the most violated ones.
inline SeparationResult select_escs(const arma::mat& X, Problem problem, const WeightedGraph& g,
                                    int k, int max_new, const std::set<VertexSubset>& existing,
                                    std::uint64_t seed, const SeparationOptions& opts = {}) {
    SeparationResult res;
    if (max_new <= 0) return res;
    Rng rng(seed);
    auto candidates = local_search_candidates(X, problem, g, k,
                                              opts.candidates_per_new * max_new, rng,
                                              opts.swap_budget);
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    std::vector<std::pair<double, VertexSubset>> scored;
    for (const auto& I : candidates) {
        if (existing.count(I)) continue;
        WeightedGraph sub = induced_subgraph(g, I);
        auto [atoms, perm] = AtomCache::instance().canonical(problem, sub);
        arma::mat Xc(I.k(), I.k());
        for (int p = 0; p < I.k(); ++p)
            for (int q = 0; q < I.k(); ++q)
                Xc(perm[p], perm[q]) = X(I.idx[p], I.idx[q]);
        const double dist = project_to_hull(Xc, *atoms, opts.projection).distance;
        ++res.scanned;
        res.max_distance = std::max(res.max_distance, dist);
        if (dist > opts.threshold) scored.emplace_back(dist, I);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    if (static_cast<int>(scored.size()) > max_new) scored.resize(max_new);

    for (const auto& [dist, I] : scored) {
        WeightedGraph sub = induced_subgraph(g, I);
        auto atoms = atoms_for(problem, sub);
        arma::mat X_I(I.k(), I.k());
        for (int p = 0; p < I.k(); ++p)
            for (int q = 0; q < I.k(); ++q) X_I(p, q) = X(I.idx[p], I.idx[q]);
        auto proj = project_to_hull(X_I, *atoms, opts.projection);
        res.selected.push_back({I, proj.distance, proj.lambda});
    }
    return res;
}

}  // namespace escbundle
