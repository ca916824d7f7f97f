// Exact active-set solver for the simplex-constrained QP
//
//     min  1/2 x'Qx - c'x   s.t.  sum(x) = 1,  x >= 0,
//
// with Q symmetric positive semidefinite. This is the work-horse both for
// the multiplier blocks of the trial-point QP dual and for its plane
// simplex; dimensions stay small (a few hundred at most), so dense bordered
// KKT solves per pivot are fine.
#pragma once

#include <armadillo>

#include "escbundle/common.hpp"

namespace escbundle {

struct SimplexQpResult {
    arma::vec x;
    double sigma = 0.0;  // multiplier of the sum constraint: (Qx - c)_i = sigma on the support
    int pivots = 0;
    bool optimal = false;
};

inline SimplexQpResult simplex_qp(const arma::mat& Q, const arma::vec& c, arma::vec warm,
                                  double tol) {
    const arma::uword t = c.n_elem;
    if (t == 0) throw SolverError("simplex_qp on empty dimension");
    SimplexQpResult res;
    if (t == 1) {
        res.x = arma::vec{1.0};
        res.sigma = Q(0, 0) - c(0);
        res.optimal = true;
        return res;
    }

    arma::vec x;
    if (warm.n_elem == t && warm.min() >= 0.0 && std::abs(arma::accu(warm) - 1.0) < 1e-9) {
        x = warm;
    } else {
        x = arma::vec(t, arma::fill::zeros);
        x(c.index_max()) = 1.0;  // steepest vertex of the linear part
    }

    const double ridge = 1e-13 * (1.0 + arma::abs(Q.diag()).max());
    std::vector<arma::uword> support;
    for (arma::uword i = 0; i < t; ++i)
        if (x(i) > 1e-14) support.push_back(i);

    const int max_pivots = static_cast<int>(4 * t + 64);
    for (int pivot = 0; pivot < max_pivots; ++pivot) {
        res.pivots = pivot;
        const arma::uvec S(support);
        const arma::uword s = S.n_elem;

        // equality-constrained optimum on the support:
        // [Q_SS + ridge, 1; 1', 0] [xS; sigma] = [c_S; 1]
        arma::mat kkt(s + 1, s + 1, arma::fill::zeros);
        kkt.submat(0, 0, s - 1, s - 1) = Q.submat(S, S) + ridge * arma::eye(s, s);
        kkt.col(s).head(s).ones();
        kkt.row(s).head(s).ones();
        arma::vec rhs(s + 1);
        rhs.head(s) = c(S);
        rhs(s) = 1.0;
        arma::vec sol;
        if (!arma::solve(sol, kkt, rhs)) throw SolverError("simplex_qp KKT solve failed");
        arma::vec xs = sol.head(s);
        // the bordered system encodes (Qx - c)_S = -sol(s): the common
        // gradient value on the support is the KKT multiplier
        const double sigma = -sol(s);

        if (xs.min() >= -1e-12) {
            // accept, then test optimality of the inactive coordinates
            arma::vec xn(t, arma::fill::zeros);
            for (arma::uword i = 0; i < s; ++i) xn(S(i)) = std::max(xs(i), 0.0);
            xn /= arma::accu(xn);
            x = xn;
            arma::vec grad = Q * x - c;
            double worst = 0.0;
            arma::uword worst_idx = t;
            for (arma::uword i = 0; i < t; ++i) {
                if (x(i) > 1e-14) continue;
                const double slack = grad(i) - sigma;  // nu_i >= 0 at the optimum
                if (slack < worst) {
                    worst = slack;
                    worst_idx = i;
                }
            }
            if (worst_idx == t || worst >= -tol) {
                res.x = x;
                res.sigma = sigma;
                res.optimal = true;
                return res;
            }
            support.push_back(worst_idx);
            std::sort(support.begin(), support.end());
        } else {
            // step toward the equality optimum until a coordinate hits zero
            double alpha = 1.0;
            arma::uword blocker = t;
            for (arma::uword i = 0; i < s; ++i) {
                const double xi = x(S(i));
                const double di = xs(i) - xi;
                if (di < -1e-16) {
                    const double a = xi / -di;
                    if (a < alpha) {
                        alpha = a;
                        blocker = S(i);
                    }
                }
            }
            for (arma::uword i = 0; i < s; ++i) {
                const double xi = x(S(i));
                x(S(i)) = std::max(0.0, xi + alpha * (xs(i) - xi));
            }
            if (blocker != t) x(blocker) = 0.0;
            support.clear();
            for (arma::uword i = 0; i < t; ++i)
                if (x(i) > 1e-14) support.push_back(i);
            if (support.empty()) {
                // numerically everything collapsed; restart from best vertex
                x.zeros();
                x(c.index_max()) = 1.0;
                support.push_back(c.index_max());
            }
        }
    }
    // Return the best iterate found; caller decides whether the residual it
    // cares about is small enough.
    res.x = x;
    res.optimal = false;
    return res;
}

}  // namespace escbundle
