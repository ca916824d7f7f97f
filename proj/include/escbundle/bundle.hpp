// Proximal bundle method for the partial Lagrangian dual
//
//     min_y  F(y) = h(y) + sum_I max_i [D_I(y_I)]_i .
//
// h is sampled through the SDP oracle and modelled by cutting planes; the
// max-terms are cheap and handled exactly. The trial point solves
//
//     min  w + sum_I v_I + mu/2 ||y - ybar||^2
//     s.t. w   >= hbar - e_j + <g_j, y - ybar>      j = 1..r
//          v_I >= [D_I(y_I)]_i                      i = 1..t_I, I in J
//
// which we attack through its Lagrangian dual: with weights alpha in the
// r-simplex for the planes and lambda_I in the t_I-simplex per block,
//
//     max  a'alpha + sum_I lambda_I' D_I ybar_I - ||G alpha + F lambda||^2 / (2 mu)
//
// where a_j = hbar - e_j, G collects the g_j and F lambda scatters D_I'
// lambda_I into the block coordinates. The coupling between blocks runs only
// through the planes, so exact coordinate maximization over one simplex at a
// time (a small active-set QP each) converges linearly; the primal-dual gap
// equals the total complementarity violation and serves as the KKT residual.
// The trial point is recovered as y = ybar - (G alpha + F lambda)/mu.
#pragma once

#include <armadillo>
#include <chrono>
#include <string>
#include <vector>

#include "escbundle/common.hpp"
#include "escbundle/operators.hpp"
#include "escbundle/sdp.hpp"
#include "escbundle/simplex_qp.hpp"

namespace escbundle {

struct BundleElement {
    arma::vec y;
    double h = 0.0;  // oracle value at y
    arma::vec g;     // subgradient of h at y
    arma::mat X;     // oracle maximizer (kept for separation/diagnostics)
    double e = 0.0;  // linearization error at the current center
    double alpha = 0.0;  // warm-start weight in the trial QP dual
};

struct BundleOptions {
    double mu0 = 1.0;
    double mu_min = 1e-4;
    double mu_max = 1e4;
    int r_max = 25;
    double m_ss = 0.1;
    int max_iters = 30;
    double tol = 1e-6;      // stop when predicted decrease <= tol * (1 + |F|)
    double qp_tol = 1e-9;   // relative primal-dual gap accepted by the trial QP
    int qp_max_sweeps = 5000;
    IpmOptions oracle = {1e-6, 100, std::numeric_limits<double>::infinity()};
};

struct IterationRecord {
    int iter = 0;
    double f_center = 0.0;
    double model = 0.0;
    char step = '-';  // 'S' serious, 'N' null, 'C' converged
    double mu = 0.0;
    double grad_norm = 0.0;
    double oracle_seconds = 0.0;
    double qp_gap = 0.0;
    double best_bound = 0.0;
};

struct BundleResult {
    arma::vec best_y;
    double best_bound = 0.0;  // min dual value over all evaluated points
    arma::mat last_X;         // maximizer of the final oracle call
    arma::vec center;
    double f_center = 0.0;
    std::vector<IterationRecord> trace;
    int serious_steps = 0;
    int null_steps = 0;
    int oracle_calls = 0;
    bool converged = false;
    bool aborted = false;
    std::string abort_reason;
};

// Serious iff the achieved decrease is at least m_ss times the decrease the
// model promised.
inline bool step_decision(double f_center, double f_trial, double model_trial, double m_ss) {
    if (model_trial > f_center + 1e-10 * (1.0 + std::abs(f_center)))
        throw SolverError("trial model value exceeds center value");
    return f_center - f_trial >= m_ss * (f_center - model_trial);
}

class TrialQpSolver {
  public:
    struct Solution {
        arma::vec y;
        double w = 0.0;
        arma::vec v;
        double model = 0.0;  // w + sum(v), the cutting-plane model at y
        double gap = 0.0;    // primal-dual gap at acceptance (KKT residual)
        int sweeps = 0;
    };

    TrialQpSolver(const BlockSet& blocks, double tol, int max_sweeps)
        : blocks_(blocks), tol_(tol), max_sweeps_(max_sweeps) {
        grams_.reserve(blocks.size());
        for (const auto& blk : blocks.blocks()) grams_.push_back(blk.D * blk.D.t());
        lambdas_.resize(blocks.size());
    }

    Solution solve(const arma::vec& center, double h_center, std::vector<BundleElement>& elements,
                   double mu) {
        const arma::uword r = elements.size();
        const arma::uword b = center.n_elem;
        const std::size_t q = blocks_.size();

        arma::vec a(r);
        arma::mat G(b, r);
        for (arma::uword j = 0; j < r; ++j) {
            a(j) = h_center - elements[j].e;
            G.col(j) = elements[j].g;
        }
        const arma::mat GtG = G.t() * G;

        arma::vec alpha(r);
        for (arma::uword j = 0; j < r; ++j) alpha(j) = elements[j].alpha;
        if (alpha.min() < 0.0 || arma::accu(alpha) <= 0.0) alpha.zeros();
        if (arma::accu(alpha) <= 0.0)
            alpha(r - 1) = 1.0;
        else
            alpha /= arma::accu(alpha);

        std::vector<arma::vec> rI(q);
        for (std::size_t i = 0; i < q; ++i) {
            const arma::vec ybar_I = blocks_.segment(center, i);
            rI[i] = blocks_[i].D * ybar_I;
            if (lambdas_[i].n_elem != static_cast<arma::uword>(blocks_[i].t())) {
                lambdas_[i].zeros(blocks_[i].t());
                lambdas_[i](rI[i].index_max()) = 1.0;
            }
        }

        arma::vec u = G * alpha;
        for (std::size_t i = 0; i < q; ++i)
            u.subvec(blocks_.offset(i), blocks_.offset(i) + blocks_[i].b() - 1) +=
                blocks_[i].D.t() * lambdas_[i];

        const double scale = 1.0 + std::abs(h_center);
        Solution sol;
        for (int sweep = 1; sweep <= max_sweeps_; ++sweep) {
            if (r > 1) {
                const arma::vec f = u - G * alpha;
                const arma::vec c = a - (G.t() * f) / mu;
                auto sub = simplex_qp(GtG / mu, c, alpha, 1e-12 * scale);
                alpha = sub.x;
                u = f + G * alpha;
            }
            for (std::size_t i = 0; i < q; ++i) {
                const EscBlock& blk = blocks_[i];
                auto ui = u.subvec(blocks_.offset(i), blocks_.offset(i) + blk.b() - 1);
                const arma::vec f = ui - blk.D.t() * lambdas_[i];
                const arma::vec c = rI[i] - (blk.D * f) / mu;
                auto sub = simplex_qp(grams_[i] / mu, c, lambdas_[i], 1e-12 * scale);
                lambdas_[i] = sub.x;
                ui = f + blk.D.t() * lambdas_[i];
            }

            // primal reconstruction and gap test
            sol.y = center - u / mu;
            const arma::vec plane_vals = a + G.t() * (sol.y - center);
            sol.w = plane_vals.max();
            sol.v.set_size(q);
            double dual = arma::dot(a, alpha);
            for (std::size_t i = 0; i < q; ++i) {
                sol.v(i) = arma::vec(blocks_[i].D * blocks_.segment(sol.y, i)).max();
                dual += arma::dot(lambdas_[i], rI[i]);
            }
            const double prox = arma::dot(u, u) / (2.0 * mu);
            dual -= prox;
            const double primal = sol.w + arma::accu(sol.v) + prox;
            sol.model = sol.w + arma::accu(sol.v);
            sol.gap = primal - dual;
            sol.sweeps = sweep;
            if (sol.gap <= tol_ * (1.0 + std::abs(primal))) {
                for (arma::uword j = 0; j < r; ++j) elements[j].alpha = alpha(j);
                return sol;
            }
        }
        throw SolverError("trial-point QP did not reach its gap target: gap " +
                          std::to_string(sol.gap) + " after " + std::to_string(max_sweeps_) +
                          " sweeps");
    }

  private:
    const BlockSet& blocks_;
    double tol_;
    int max_sweeps_;
    std::vector<arma::mat> grams_;
    std::vector<arma::vec> lambdas_;
};

struct BundleState {
    arma::vec center;
    double h_center = 0.0;
    double f_center = 0.0;
    std::vector<BundleElement> elements;
    double mu = 1.0;
    int consecutive_nulls = 0;
    int center_plane = 0;

    // Linearization error of plane j at the current center; nonnegative up to
    // oracle error by convexity, clamped so the model keeps minorizing h.
    double lin_error(const BundleElement& el) const {
        return std::max(0.0, h_center - el.h - arma::dot(el.g, center - el.y));
    }

    void update(bool serious, BundleElement trial, double f_trial, double predicted,
                const BundleOptions& opts) {
        trial.e = lin_error(trial);
        trial.alpha = 0.0;
        elements.push_back(std::move(trial));
        const int newest = static_cast<int>(elements.size()) - 1;

        if (serious) {
            const double actual = f_center - f_trial;
            center = elements[newest].y;
            h_center = elements[newest].h;
            f_center = f_trial;
            center_plane = newest;
            for (auto& el : elements) el.e = lin_error(el);
            consecutive_nulls = 0;
            if (actual >= 0.7 * predicted) mu = std::max(mu / 2.0, opts.mu_min);
        } else {
            if (++consecutive_nulls >= 3) {
                mu = std::min(2.0 * mu, opts.mu_max);
                consecutive_nulls = 0;
            }
        }

        while (static_cast<int>(elements.size()) > opts.r_max) {
            int victim = -1;
            double worst = -1.0;
            for (int j = 0; j < static_cast<int>(elements.size()); ++j) {
                if (j == static_cast<int>(elements.size()) - 1 || j == center_plane) continue;
                if (elements[j].e > worst) {
                    worst = elements[j].e;
                    victim = j;
                }
            }
            if (victim < 0) break;
            elements.erase(elements.begin() + victim);
            if (center_plane > victim) --center_plane;
        }
    }
};

// F(y) = h(y) + sum of max-terms; every evaluation is a valid bound on the
// generic optimum regardless of y.
inline double dual_value_from(const OracleResult& oracle, const BlockSet& blocks,
                              const arma::vec& y) {
    double f = oracle.value;
    for (std::size_t i = 0; i < blocks.size(); ++i)
        f += max_term(blocks[i], blocks.segment(y, i)).first;
    return f;
}

inline double dual_value(const arma::vec& y, const BlockSet& blocks, const SdpProblem& base,
                         const IpmOptions& opts) {
    return dual_value_from(evaluate_h(base, blocks, y, opts), blocks, y);
}

inline BundleResult run_bundle(const SdpProblem& base, const BlockSet& blocks,
                               const arma::vec& y_start, const BundleOptions& opts) {
    BundleResult res;
    auto timed_eval = [&](const arma::vec& y, double& secs) {
        const auto t0 = std::chrono::steady_clock::now();
        OracleResult o = evaluate_h(base, blocks, y, opts.oracle);
        secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        ++res.oracle_calls;
        return o;
    };

    double secs = 0.0;
    OracleResult first = timed_eval(y_start, secs);
    res.last_X = first.X;
    res.best_y = y_start;
    res.best_bound = dual_value_from(first, blocks, y_start);
    res.trace.push_back({0, res.best_bound, res.best_bound, '-', opts.mu0,
                         arma::norm(first.subgrad, 2), secs, 0.0, res.best_bound});

    if (blocks.empty() || opts.max_iters < 1) {
        res.center = y_start;
        res.f_center = res.best_bound;
        res.converged = blocks.empty();
        return res;
    }

    BundleState state;
    state.center = y_start;
    state.h_center = first.value;
    state.f_center = res.best_bound;
    state.mu = opts.mu0;
    state.elements.push_back(
        {y_start, first.value, first.subgrad, first.X, 0.0, 1.0});
    state.center_plane = 0;

    TrialQpSolver qp(blocks, opts.qp_tol, opts.qp_max_sweeps);

    try {
        // max_iters counts oracle evaluations including the one at y_start
        for (int iter = 1; iter < opts.max_iters; ++iter) {
            auto sol = qp.solve(state.center, state.h_center, state.elements, state.mu);
            const double predicted = state.f_center - sol.model;
            if (predicted <= opts.tol * (1.0 + std::abs(state.f_center))) {
                res.converged = true;
                res.trace.push_back({iter, state.f_center, sol.model, 'C', state.mu, 0.0, 0.0,
                                     sol.gap, res.best_bound});
                break;
            }

            OracleResult oracle = timed_eval(sol.y, secs);
            res.last_X = oracle.X;
            const double f_trial = dual_value_from(oracle, blocks, sol.y);
            if (f_trial < res.best_bound) {
                res.best_bound = f_trial;
                res.best_y = sol.y;
            }

            const bool serious = step_decision(state.f_center, f_trial, sol.model, opts.m_ss);
            serious ? ++res.serious_steps : ++res.null_steps;
            state.update(serious,
                         BundleElement{sol.y, oracle.value, oracle.subgrad, oracle.X, 0.0, 0.0},
                         f_trial, predicted, opts);
            res.trace.push_back({iter, state.f_center, sol.model, serious ? 'S' : 'N', state.mu,
                                 arma::norm(oracle.subgrad, 2), secs, sol.gap, res.best_bound});
        }
    } catch (const SolverError& err) {
        res.aborted = true;
        res.abort_reason = err.what();
    }
    res.center = state.center;
    res.f_center = state.f_center;
    return res;
}

}  // namespace escbundle
