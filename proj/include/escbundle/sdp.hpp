// Basic semidefinite relaxations and their interior-point oracle.
//
// Standard form throughout:   max <C, X>  s.t.  <A_i, X> = b_i,  X psd,
// with dual  min b'y  s.t.  Z = A'(y) - C psd.  The three builders produce
// the Max-Cut spectrahedron (diag(X) = 1), the theta body, and the coloring
// spectrahedron; for coloring the cost is -t so that one maximize form serves
// all three problems and user-facing bounds are negated on the way out.
//
// The solver is a dense primal-dual path-following method with HKM direction
// and Mehrotra predictor-corrector, following the classical
// Helmberg/Rendl/Vanderbei/Wolkowicz scheme. Constraint matrices are kept as
// short sparse entry lists, so forming the Schur complement costs
// O(m^2 * nnz^2) and the m x m Cholesky dominates each iteration.
#pragma once

#include <armadillo>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <vector>

#include "escbundle/common.hpp"
#include "escbundle/graph.hpp"
#include "escbundle/operators.hpp"

namespace escbundle {

// Symmetric matrix as a list of upper-triangle entries (r <= c); an entry
// with r < c implicitly mirrors to (c, r) with the same value.
struct SparseSym {
    struct Entry {
        int r, c;
        double v;
    };
    std::vector<Entry> entries;

    void add(int r, int c, double v) {
        if (r > c) std::swap(r, c);
        entries.push_back({r, c, v});
    }

    // trace(A * S); S need not be symmetric (the IPM feeds products like
    // Zi*Rd*X through this), so mirrored entries are read individually.
    double inner(const arma::mat& s) const {
        double acc = 0.0;
        for (const auto& e : entries)
            acc += e.v * (e.r == e.c ? s(e.r, e.r) : s(e.r, e.c) + s(e.c, e.r));
        return acc;
    }

    void add_scaled_to(arma::mat& s, double scale) const {
        for (const auto& e : entries) {
            s(e.r, e.c) += scale * e.v;
            if (e.r != e.c) s(e.c, e.r) += scale * e.v;
        }
    }
};

struct SdpProblem {
    Problem problem;
    int d = 0;                    // matrix order
    arma::mat C;                  // cost, maximize <C, X>
    std::vector<SparseSym> A;     // equality constraint matrices
    arma::vec b;                  // right-hand sides
    arma::mat X0;                 // strictly feasible interior starting point
    int esc_offset = 0;           // vertex v sits at matrix index v + esc_offset

    int m() const { return static_cast<int>(A.size()); }
};

struct IpmOptions {
    double tol = 1e-8;
    int max_iters = 100;
    double deadline_seconds = std::numeric_limits<double>::infinity();
};

struct OracleResult {
    double value = 0.0;         // dual objective b'y: the reported bound on max <C, X>
    double primal_value = 0.0;  // <C, X*>
    arma::mat X;                // primal maximizer
    arma::vec subgrad;          // -extract(P_I(X*)) per block, concatenated (evaluate_h only)
    double rel_gap = 0.0;
    double primal_infeas = 0.0;
    double dual_infeas = 0.0;
    int iterations = 0;
    bool converged = false;
    double seconds = 0.0;
};

inline SdpProblem build_basic(Problem problem, const WeightedGraph& g) {
    const int n = g.n();
    SdpProblem p;
    p.problem = problem;
    switch (problem) {
        case Problem::maxcut: {
            p.d = n;
            p.esc_offset = 0;
            p.C = laplacian(g);
            p.A.resize(n);
            for (int i = 0; i < n; ++i) p.A[i].add(i, i, 1.0);
            p.b = arma::vec(n, arma::fill::ones);
            p.X0 = arma::eye(n, n);
            break;
        }
        case Problem::stableset: {
            // Theta body: Y = [[1, x'], [x, X]], x = diag(X), X_ij = 0 on edges.
            p.d = n + 1;
            p.esc_offset = 1;
            p.C = arma::mat(p.d, p.d, arma::fill::zeros);
            for (int i = 1; i <= n; ++i) p.C(i, i) = 1.0;
            SparseSym corner;
            corner.add(0, 0, 1.0);
            p.A.push_back(corner);
            for (int i = 1; i <= n; ++i) {
                SparseSym link;  // Y_{0i} - Y_{ii} = 0
                link.add(0, i, 0.5);
                link.add(i, i, -1.0);
                p.A.push_back(std::move(link));
            }
            for (const auto& e : g.edges()) {
                SparseSym zero;
                zero.add(e.u + 1, e.v + 1, 0.5);
                p.A.push_back(std::move(zero));
            }
            p.b = arma::vec(p.m(), arma::fill::zeros);
            p.b(0) = 1.0;
            p.X0 = arma::mat(p.d, p.d, arma::fill::zeros);
            p.X0(0, 0) = 1.0;
            const double s = 0.5 / n;
            for (int i = 1; i <= n; ++i) {
                p.X0(i, i) = s;
                p.X0(0, i) = p.X0(i, 0) = s;
            }
            break;
        }
        case Problem::coloring: {
            // Y = [[t, 1'], [1, X]], diag(X) = 1, X_ij = 0 on edges; max -t.
            p.d = n + 1;
            p.esc_offset = 1;
            p.C = arma::mat(p.d, p.d, arma::fill::zeros);
            p.C(0, 0) = -1.0;
            for (int i = 1; i <= n; ++i) {
                SparseSym row;  // Y_{0i} = 1
                row.add(0, i, 0.5);
                p.A.push_back(std::move(row));
            }
            for (int i = 1; i <= n; ++i) {
                SparseSym diag;  // Y_{ii} = 1
                diag.add(i, i, 1.0);
                p.A.push_back(std::move(diag));
            }
            for (const auto& e : g.edges()) {
                SparseSym zero;
                zero.add(e.u + 1, e.v + 1, 0.5);
                p.A.push_back(std::move(zero));
            }
            p.b = arma::vec(p.m(), arma::fill::ones);
            p.b.subvec(2 * n, p.m() - 1).zeros();
            for (int i = 0; i < n; ++i) p.b(i) = 1.0;
            p.X0 = arma::eye(p.d, p.d);
            p.X0(0, 0) = n + 1.0;
            for (int i = 1; i <= n; ++i) p.X0(0, i) = p.X0(i, 0) = 1.0;
            break;
        }
    }
    return p;
}

namespace detail {

inline arma::vec apply_A(const SdpProblem& p, const arma::mat& s) {
    arma::vec out(p.m());
    for (int i = 0; i < p.m(); ++i) out(i) = p.A[i].inner(s);
    return out;
}

inline arma::mat apply_At(const SdpProblem& p, const arma::vec& y) {
    arma::mat out(p.d, p.d, arma::fill::zeros);
    for (int i = 0; i < p.m(); ++i) p.A[i].add_scaled_to(out, y(i));
    return out;
}

// Schur complement M_pq = tr(A_p Zi A_q X); symmetric positive definite for
// X, Zi pd and independent constraints.
inline arma::mat schur_matrix(const SdpProblem& p, const arma::mat& zi, const arma::mat& x) {
    const int m = p.m();
    arma::mat M(m, m, arma::fill::zeros);
    for (int pq = 0; pq < m; ++pq) {
        const auto& ap = p.A[pq].entries;
        for (int q = pq; q < m; ++q) {
            const auto& aq = p.A[q].entries;
            double acc = 0.0;
            for (const auto& ep : ap) {
                for (const auto& eq : aq) {
                    // expand implicit mirrored entries
                    acc += ep.v * eq.v * zi(ep.c, eq.r) * x(eq.c, ep.r);
                    if (eq.r != eq.c) acc += ep.v * eq.v * zi(ep.c, eq.c) * x(eq.r, ep.r);
                    if (ep.r != ep.c) {
                        acc += ep.v * eq.v * zi(ep.r, eq.r) * x(eq.c, ep.c);
                        if (eq.r != eq.c) acc += ep.v * eq.v * zi(ep.r, eq.c) * x(eq.r, ep.c);
                    }
                }
            }
            M(pq, q) = acc;
            M(q, pq) = acc;
        }
    }
    return M;
}

// Largest alpha in (0, 1] with S + alpha dS psd, via the smallest eigenvalue
// of L^-1 dS L^-T where S = L L'.
inline double max_psd_step(const arma::mat& s, const arma::mat& ds) {
    arma::mat L;
    if (!arma::chol(L, s, "lower")) return 0.0;
    arma::mat t1 = arma::solve(arma::trimatl(L), ds);
    arma::mat w = arma::solve(arma::trimatl(L), t1.t());
    w = 0.5 * (w + w.t());
    double lam_min = arma::eig_sym(w).min();
    if (lam_min >= -1e-14) return 1.0;
    return std::min(1.0, -1.0 / lam_min);
}

}  // namespace detail

// Solve the SDP, optionally with the cost replaced (the constraint structure
// and thus the whole factorization pattern is unchanged -- this is how the
// dual function is evaluated at different multipliers).
inline OracleResult solve_sdp(const SdpProblem& p, const arma::mat& cost, const IpmOptions& opts) {
    const auto t_start = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    };

    const int d = p.d, m = p.m();
    arma::mat X = p.X0;
    arma::vec y(m, arma::fill::zeros);
    arma::mat Z = arma::eye(d, d) * (1.0 + arma::norm(cost, "fro"));

    const double bnorm = 1.0 + arma::norm(p.b, 2);
    const double cnorm = 1.0 + arma::norm(cost, "fro");

    OracleResult res;
    res.X = X;
    const double step_frac = 0.97;

    for (int iter = 1; iter <= opts.max_iters; ++iter) {
        const double mu = arma::dot(X, Z) / d;
        const arma::vec rp = p.b - detail::apply_A(p, X);
        // dual residual: A'(y) - Z - C, zero at dual feasibility
        const arma::mat Rd = detail::apply_At(p, y) - Z - cost;

        const double pobj = arma::dot(cost, X);
        const double dobj = arma::dot(p.b, y);
        res.primal_value = pobj;
        res.value = dobj;
        res.X = X;
        res.rel_gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
        res.primal_infeas = arma::norm(rp, 2) / bnorm;
        res.dual_infeas = arma::norm(Rd, "fro") / cnorm;
        res.iterations = iter - 1;
        if (res.rel_gap <= opts.tol && res.primal_infeas <= opts.tol &&
            res.dual_infeas <= opts.tol) {
            res.converged = true;
            break;
        }
        if (elapsed() > opts.deadline_seconds) break;

        arma::mat Zi = arma::inv_sympd(Z);
        Zi = 0.5 * (Zi + Zi.t());

        arma::mat M = detail::schur_matrix(p, Zi, X);
        arma::mat Mchol;
        {
            double jitter = 0.0;
            const double scale = arma::trace(M) / m;
            while (!arma::chol(Mchol, M + jitter * arma::eye(m, m), "lower")) {
                jitter = (jitter == 0.0) ? 1e-14 * scale : jitter * 100.0;
                if (jitter > 1e-6 * scale)
                    throw SolverError("IPM Schur complement not positive definite");
            }
        }
        auto solve_schur = [&](const arma::vec& rhs) {
            arma::vec t = arma::solve(arma::trimatl(Mchol), rhs);
            return arma::vec(arma::solve(arma::trimatu(Mchol.t()), t));
        };

        const arma::mat ZiRdX = Zi * Rd * X;

        // predictor (affine scaling, sigma = 0)
        arma::vec dy_aff = solve_schur(detail::apply_A(p, -ZiRdX) - p.b);
        arma::mat dZ_aff = detail::apply_At(p, dy_aff) + Rd;
        arma::mat dX_aff = -X - Zi * dZ_aff * X;
        dX_aff = 0.5 * (dX_aff + dX_aff.t());

        const double ap_aff = detail::max_psd_step(X, dX_aff);
        const double ad_aff = detail::max_psd_step(Z, dZ_aff);
        const double mu_aff =
            arma::dot(X + ap_aff * dX_aff, Z + ad_aff * dZ_aff) / d;
        double sigma = std::pow(mu_aff / mu, 3);
        sigma = std::clamp(sigma, 1e-8, 1.0);

        // corrector with second-order term
        arma::mat corr = Zi * (sigma * mu * arma::eye(d, d) - dZ_aff * dX_aff);
        arma::vec dy = solve_schur(detail::apply_A(p, corr - ZiRdX) - p.b);
        arma::mat dZ = detail::apply_At(p, dy) + Rd;
        arma::mat dX = corr - X - Zi * dZ * X;
        dX = 0.5 * (dX + dX.t());

        double ap = step_frac * detail::max_psd_step(X, dX);
        double ad = step_frac * detail::max_psd_step(Z, dZ);
        ap = std::min(1.0, ap);
        ad = std::min(1.0, ad);
        if (ap <= 1e-14 || ad <= 1e-14) break;  // stalled

        X += ap * dX;
        y += ad * dy;
        Z += ad * dZ;
        res.iterations = iter;
    }

    res.seconds = elapsed();
    return res;
}

inline OracleResult solve_sdp(const SdpProblem& p, const IpmOptions& opts = {}) {
    return solve_sdp(p, p.C, opts);
}

// Dual function evaluation: h(y) = max_X <C - sum P_I' M_I(y_I), X> over the
// basic spectrahedron. The maximizer yields the subgradient
// g_I = -M_I' P_I(X*) for every block.
inline OracleResult evaluate_h(const SdpProblem& base, const BlockSet& blocks, const arma::vec& y,
                               const IpmOptions& opts) {
    arma::mat cost = shifted_cost(base.C, y, blocks, base.esc_offset);
    OracleResult res = solve_sdp(base, cost, opts);
    res.subgrad.set_size(blocks.total_b());
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const EscBlock& blk = blocks[i];
        for (int e = 0; e < blk.b(); ++e) {
            auto [pp, qq] = blk.positions[e];
            res.subgrad(blocks.offset(i) + e) =
                -res.X(blk.I.idx[pp] + base.esc_offset, blk.I.idx[qq] + base.esc_offset);
        }
    }
    return res;
}

// SDPA sparse export (initial-point free), for cross-checks against external
// solvers: our max form matches SDPA's dual with F0 = C, F_i = A_i, c = b.
inline void write_sdpa(const SdpProblem& p, const arma::mat& cost, std::ostream& out) {
    out << p.m() << "\n1\n" << p.d << "\n";
    for (int i = 0; i < p.m(); ++i) out << p.b(i) << (i + 1 < p.m() ? ' ' : '\n');
    for (int r = 0; r < p.d; ++r)
        for (int c = r; c < p.d; ++c)
            if (cost(r, c) != 0.0) out << "0 1 " << r + 1 << ' ' << c + 1 << ' ' << cost(r, c) << '\n';
    for (int i = 0; i < p.m(); ++i)
        for (const auto& e : p.A[i].entries)
            out << i + 1 << " 1 " << e.r + 1 << ' ' << e.c + 1 << ' ' << e.v << '\n';
}

}  // namespace escbundle
